#pragma once

#include <algorithm>
#include <span>

#include "salad/errors.hpp"

namespace salad {

/// Maps [lo, hi] onto [0, 1]. A degenerate range (hi == lo) sends every input to 0.5
/// and every output back to lo.
class min_max_scaler {
public:
    min_max_scaler() = default;
    min_max_scaler(double lo, double hi) : lo_(lo), hi_(hi) {
        if (!(hi >= lo)) throw config_error("min_max_scaler: hi must be >= lo");
    }

    static min_max_scaler fit(std::span<const double> values) {
        if (values.empty()) throw empty_input("min_max_scaler::fit: no values");
        auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        return {*lo, *hi};
    }

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    bool degenerate() const noexcept { return hi_ == lo_; }

    double transform(double x) const noexcept {
        return degenerate() ? 0.5 : (x - lo_) / (hi_ - lo_);
    }

    double inverse(double y) const noexcept {
        return degenerate() ? lo_ : lo_ + y * (hi_ - lo_);
    }

    bool operator==(const min_max_scaler&) const = default;

private:
    double lo_ = 0.0;
    double hi_ = 1.0;
};

} // namespace salad
