#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "salad/detection.hpp"

namespace salad {

/// One record per decided raw point.
struct anomaly_alert {
    std::size_t t = 0;
    std::string timestamp;
    double raw_value = 0.0;
    detection_verdict verdict;
    double decision_time = 0.0;  // seconds; NaN when the record carries no timing

    bool is_anomaly() const noexcept { return verdict.kind == verdict_kind::anomaly; }
};

struct timing_stats {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

inline timing_stats summarize_timing(std::span<const double> seconds) {
    timing_stats s;
    s.count = seconds.size();
    if (seconds.empty()) return s;
    double sum = 0.0;
    for (double v : seconds) sum += v;
    s.mean = sum / static_cast<double>(s.count);
    double sq = 0.0;
    for (double v : seconds) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.count));
    return s;
}

inline timing_stats summarize_timing(std::span<const anomaly_alert> alerts) {
    std::vector<double> seconds;
    seconds.reserve(alerts.size());
    for (const auto& a : alerts)
        if (std::isfinite(a.decision_time)) seconds.push_back(a.decision_time);
    return summarize_timing(seconds);
}

} // namespace salad
