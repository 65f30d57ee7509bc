#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "salad/errors.hpp"

namespace salad {

/// Average absolute relative error: mean of |obs - pred| / max(|obs|, epsilon).
inline double mean_relative_error(std::span<const double> observed,
                                  std::span<const double> predicted, double epsilon) {
    if (observed.size() != predicted.size())
        throw length_mismatch("mean_relative_error: " + std::to_string(observed.size()) +
                              " observed vs " + std::to_string(predicted.size()) + " predicted");
    if (observed.empty()) throw empty_input("mean_relative_error: empty window");
    if (!(epsilon > 0.0)) throw config_error("mean_relative_error: epsilon must be > 0");
    double sum = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i)
        sum += std::abs(observed[i] - predicted[i]) / std::max(std::abs(observed[i]), epsilon);
    return sum / static_cast<double>(observed.size());
}

/// AARE over the conversion window (length b).
inline double window_aare(std::span<const double> observed, std::span<const double> predicted,
                          double epsilon) {
    return mean_relative_error(observed, predicted, epsilon);
}

/// AARE over the three most recent calibrated values in the detection stage.
inline double short_aare(std::span<const double> actual, std::span<const double> predicted,
                         double epsilon) {
    if (actual.size() != 3 || predicted.size() != 3)
        throw length_mismatch("short_aare: both windows must hold exactly 3 values");
    return mean_relative_error(actual, predicted, epsilon);
}

struct mean_std {
    double mean = 0.0;
    double std = 0.0;  // population
};

inline mean_std population_mean_std(std::span<const double> values) {
    if (values.empty()) throw empty_input("population_mean_std: no values");
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq / n)};
}

/// mean + 3 * population standard deviation.
inline double three_sigma_threshold(std::span<const double> history, std::size_t min_entries) {
    if (history.size() < min_entries)
        throw insufficient_history("threshold needs at least " + std::to_string(min_entries) +
                                   " entries, got " + std::to_string(history.size()));
    const auto [mean, sd] = population_mean_std(history);
    return mean + 3.0 * sd;
}

inline double conversion_threshold(std::span<const double> history) {
    return three_sigma_threshold(history, 2);
}

inline double detection_threshold(std::span<const double> history) {
    return three_sigma_threshold(history, 3);
}

/// Relative-error floor: 1e-8 scaled by the largest magnitude seen so far (at least 1).
class epsilon_policy {
public:
    explicit epsilon_policy(double factor = 1e-8) : factor_(factor) {
        if (!(factor > 0.0)) throw config_error("epsilon factor must be > 0");
    }

    void observe(double v) noexcept { max_abs_ = std::max(max_abs_, std::abs(v)); }
    double value() const noexcept { return factor_ * std::max(1.0, max_abs_); }
    double factor() const noexcept { return factor_; }

private:
    double factor_;
    double max_abs_ = 0.0;
};

} // namespace salad
