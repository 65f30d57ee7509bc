#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace salad {

/// Base of every error thrown by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value (hidden_units = 0, b < 4, negative slack, ...).
class config_error : public error {
public:
    using error::error;
};

class window_too_short : public error {
public:
    using error::error;
};

class non_finite_loss : public error {
public:
    using error::error;
};

class empty_input : public error {
public:
    using error::error;
};

class length_mismatch : public error {
public:
    using error::error;
};

class insufficient_history : public error {
public:
    using error::error;
};

class out_of_order_point : public error {
public:
    out_of_order_point(std::size_t expected, std::size_t got)
        : error("out-of-order point: expected t=" + std::to_string(expected) +
                ", got t=" + std::to_string(got)),
          expected_(expected), got_(got) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t got() const noexcept { return got_; }

private:
    std::size_t expected_;
    std::size_t got_;
};

class series_too_short : public error {
public:
    using error::error;
};

class invalid_window : public error {
public:
    using error::error;
};

class out_of_range : public error {
public:
    using error::error;
};

/// Malformed input record. line() is 1-based; 0 when the source has no lines.
class parse_error : public error {
public:
    parse_error(std::size_t line, const std::string& what)
        : error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace salad
