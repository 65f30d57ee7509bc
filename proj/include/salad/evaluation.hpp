#pragma once

// Event-level scoring with a Valid Detection Period: a labelled window [s, e] counts
// as detected when an anomaly verdict falls inside [s - X, e + X].

#include <algorithm>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "salad/alert.hpp"
#include "salad/errors.hpp"

namespace salad {

struct label_window {
    std::size_t s = 0;
    std::size_t e = 0;  // inclusive
    std::string note;

    void validate() const {
        if (s > e)
            throw invalid_window("label window has s=" + std::to_string(s) + " > e=" +
                                 std::to_string(e));
    }

    bool operator==(const label_window&) const = default;
};

struct eval_config {
    std::size_t slack = 3;  // X
};

struct eval_report {
    std::size_t tp = 0;
    std::size_t fp = 0;         // runs of consecutive anomaly points outside every window
    std::size_t fn = 0;
    std::size_t fp_points = 0;  // individual anomaly points outside every window
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
    timing_stats timing;
};

inline double fscore(double precision, double recall) {
    if (!(precision >= 0.0 && precision <= 1.0) || !(recall >= 0.0 && recall <= 1.0))
        throw out_of_range("fscore: precision and recall must lie in [0, 1]");
    const double sum = precision + recall;
    return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

inline eval_report score(std::span<const anomaly_alert> alerts,
                         std::span<const label_window> labels, const eval_config& config) {
    for (const auto& w : labels) w.validate();

    struct period {
        std::size_t lo, hi;
    };
    std::vector<period> periods;
    periods.reserve(labels.size());
    for (const auto& w : labels)
        periods.push_back({w.s >= config.slack ? w.s - config.slack : 0, w.e + config.slack});

    std::vector<std::size_t> flagged;
    for (const auto& a : alerts)
        if (a.is_anomaly()) flagged.push_back(a.t);
    std::sort(flagged.begin(), flagged.end());
    flagged.erase(std::unique(flagged.begin(), flagged.end()), flagged.end());

    // Each flagged point credits at most one window: windows in order of period end
    // take the earliest unused flagged point inside their period.
    std::vector<std::size_t> order(periods.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return periods[a].hi != periods[b].hi ? periods[a].hi < periods[b].hi
                                              : periods[a].lo < periods[b].lo;
    });
    std::set<std::size_t> unused(flagged.begin(), flagged.end());
    eval_report r;
    for (std::size_t i : order) {
        auto it = unused.lower_bound(periods[i].lo);
        if (it != unused.end() && *it <= periods[i].hi) {
            ++r.tp;
            unused.erase(it);
        } else {
            ++r.fn;
        }
    }

    auto inside_any = [&](std::size_t t) {
        return std::any_of(periods.begin(), periods.end(),
                           [t](const period& p) { return t >= p.lo && t <= p.hi; });
    };
    for (std::size_t i = 0; i < flagged.size();) {
        std::size_t j = i;
        bool outside = true;
        while (true) {
            const bool in = inside_any(flagged[j]);
            if (in) outside = false;
            else ++r.fp_points;
            if (j + 1 < flagged.size() && flagged[j + 1] == flagged[j] + 1) ++j;
            else break;
        }
        if (outside) ++r.fp;
        i = j + 1;
    }

    r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp)
                                  : 0.0;
    r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn)
                               : 0.0;
    r.fscore = fscore(r.precision, r.recall);
    r.timing = summarize_timing(alerts);
    return r;
}

} // namespace salad
