#pragma once

// `timestamp,value` CSV. The row ordinal (0-based, header excluded) is the time
// index; timestamps are carried through as opaque labels.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salad/conversion.hpp"
#include "salad/errors.hpp"

namespace salad {

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_double(std::string_view s) noexcept {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

} // namespace detail

class point_csv_reader {
public:
    explicit point_csv_reader(std::istream& in) : in_(in) {}

    /// Next point, or nullopt at end of input. Throws parse_error naming the line.
    std::optional<raw_point> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            const auto text = detail::trim(line);
            if (text.empty()) continue;
            if (!header_seen_) {
                check_header(text);
                header_seen_ = true;
                continue;
            }
            return parse_row(text);
        }
        return std::nullopt;
    }

    std::size_t line() const noexcept { return line_no_; }

private:
    void check_header(std::string_view text) const {
        const auto comma = text.find(',');
        if (comma == std::string_view::npos ||
            detail::trim(text.substr(0, comma)) != "timestamp" ||
            detail::trim(text.substr(comma + 1)) != "value")
            throw parse_error(line_no_, "expected header 'timestamp,value', got '" +
                                            std::string(text) + "'");
    }

    raw_point parse_row(std::string_view text) {
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos)
            throw parse_error(line_no_, "expected 2 fields 'timestamp,value'");
        const auto value = detail::parse_double(text.substr(comma + 1));
        if (!value || !std::isfinite(*value))
            throw parse_error(line_no_, "invalid value '" +
                                            std::string(detail::trim(text.substr(comma + 1))) + "'");
        return raw_point{next_t_++, *value, std::string(detail::trim(text.substr(0, comma)))};
    }

    std::istream& in_;
    std::size_t line_no_ = 0;
    std::size_t next_t_ = 0;
    bool header_seen_ = false;
};

inline std::vector<raw_point> read_points_csv(std::istream& in) {
    point_csv_reader reader(in);
    std::vector<raw_point> points;
    while (auto p = reader.next()) points.push_back(std::move(*p));
    return points;
}

inline void write_points_csv(std::ostream& out, std::span<const raw_point> points) {
    out << "timestamp,value\n";
    char buf[64];
    for (const auto& p : points) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p.value);
        out << p.timestamp << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf))
            << '\n';
    }
}

} // namespace salad
