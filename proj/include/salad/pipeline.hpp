#pragma once

// Drivers that wire the conversion stage into the detection stage (SALAD), or run
// the detection state machine directly on raw values with a look-back of 3 (the
// RePAD-style baseline). Both batch and streaming drivers go through
// salad_pipeline::step, so their verdict sequences are identical by construction.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salad/alert.hpp"
#include "salad/conversion.hpp"
#include "salad/detection.hpp"
#include "salad/errors.hpp"
#include "salad/point_csv.hpp"

namespace salad {

enum class detector_mode { salad, repad_baseline };

inline std::string_view to_string(detector_mode m) noexcept {
    return m == detector_mode::salad ? "salad" : "repad";
}

struct pipeline_config {
    std::size_t b = 100;
    std::size_t slack = 3;  // X, only consumed by evaluation
    std::uint64_t seed = 0;
    detector_mode mode = detector_mode::salad;
    double epsilon_factor = 1e-8;
    std::size_t hidden_units = 10;
    std::size_t repad_lookback = 3;
    double learning_rate = 0.01;
    std::size_t early_stop_patience = 5;
    double early_stop_min_delta = 1e-5;

    void validate() const {
        if (mode == detector_mode::salad && b < 4)
            throw config_error("b must be >= 4, got " + std::to_string(b));
        if (hidden_units < 1) throw config_error("hidden_units must be >= 1");
        if (!(epsilon_factor > 0.0)) throw config_error("epsilon factor must be > 0");
    }

    /// Seeds for M1 and M2 derived from the run seed.
    std::uint64_t conversion_seed() const noexcept { return mix(seed, 0x4d31); }
    std::uint64_t detection_seed() const noexcept { return mix(seed, 0x4d32); }

    conversion_config conversion() const {
        conversion_config c;
        c.b = b;
        c.network = network_config::conversion(conversion_seed());
        apply_training(c.network);
        c.epsilon_factor = epsilon_factor;
        return c;
    }

    detection_config detection() const {
        detection_config c;
        c.lookback = mode == detector_mode::salad ? 3 : repad_lookback;
        c.network = network_config::detection(detection_seed());
        apply_training(c.network);
        c.epsilon_factor = epsilon_factor;
        return c;
    }

    /// Index of the first raw point that can receive a verdict.
    std::size_t first_decision_index() const {
        const std::size_t first_input = mode == detector_mode::salad ? 2 * b + 1 : 0;
        return detector::first_decision_index(first_input, detection());
    }

    /// Shortest series a batch run accepts.
    std::size_t minimum_length() const {
        return mode == detector_mode::salad ? 2 * b + 11 : 21;
    }

private:
    void apply_training(network_config& n) const {
        n.hidden_units = hidden_units;
        n.learning_rate = learning_rate;
        n.early_stop_patience = early_stop_patience;
        n.early_stop_min_delta = early_stop_min_delta;
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
        detail::splitmix64 g(a ^ (b * 0x9e3779b97f4a7c15ULL));
        return g.next();
    }
};

/// Per-point diagnostics, enough to plot the raw/predicted series, the calibrated
/// AARE series and the detection AARE against its threshold.
struct trace_row {
    std::size_t t = 0;
    std::string timestamp;
    double value = 0.0;
    std::optional<double> predicted_value;  // v̂_t (SALAD only)
    std::optional<double> calibrated_aare;  // A_t (SALAD only)
    std::optional<double> predicted_aare;   // Â_t, or predicted raw value in baseline mode
    std::optional<double> detection_aare;
    std::optional<double> threshold;
    std::optional<verdict_kind> verdict;
};

class salad_pipeline {
public:
    explicit salad_pipeline(pipeline_config config)
        : config_(config), detector_(config.detection()) {
        config_.validate();
        if (config_.mode == detector_mode::salad) converter_.emplace(config_.conversion());
    }

    const pipeline_config& config() const noexcept { return config_; }
    const trace_row& last_trace() const noexcept { return trace_; }
    const std::optional<converter>& conversion_stage() const noexcept { return converter_; }
    const detector& detection_stage() const noexcept { return detector_; }

    std::optional<anomaly_alert> step(const raw_point& point) {
        using clock = std::chrono::steady_clock;
        const auto start = clock::now();

        trace_ = trace_row{};
        trace_.t = point.t;
        trace_.timestamp = point.timestamp;
        trace_.value = point.value;

        std::optional<detection_verdict> verdict;
        if (converter_) {
            const auto a = converter_->ingest(point);
            trace_.predicted_value = converter_->last_step().predicted;
            if (a) {
                trace_.calibrated_aare = a->value;
                verdict = detector_.ingest(a->t, a->value);
                fill_detection_trace();
            }
        } else {
            verdict = detector_.ingest(point.t, point.value);
            fill_detection_trace();
        }

        const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
        if (!verdict) return std::nullopt;
        trace_.verdict = verdict->kind;
        return anomaly_alert{point.t, point.timestamp, point.value, *verdict, elapsed};
    }

private:
    void fill_detection_trace() {
        const auto& s = detector_.last_step();
        trace_.predicted_aare = s.predicted;
        trace_.detection_aare = s.aare;
        trace_.threshold = s.threshold;
    }

    pipeline_config config_;
    std::optional<converter> converter_;
    detector detector_;
    trace_row trace_;
};

struct run_result {
    std::vector<anomaly_alert> alerts;
    timing_stats timing;
};

namespace detail {

inline run_result run_batch(std::span<const raw_point> points, const pipeline_config& config,
                            std::vector<trace_row>* trace) {
    config.validate();
    if (points.size() < config.minimum_length())
        throw series_too_short("series has " + std::to_string(points.size()) +
                               " points; at least " + std::to_string(config.minimum_length()) +
                               " are required");
    salad_pipeline pipeline(config);
    run_result result;
    if (trace) {
        trace->clear();
        trace->reserve(points.size());
    }
    for (const auto& p : points) {
        if (auto alert = pipeline.step(p)) result.alerts.push_back(std::move(*alert));
        if (trace) trace->push_back(pipeline.last_trace());
    }
    result.timing = summarize_timing(result.alerts);
    return result;
}

} // namespace detail

inline run_result run_salad(std::span<const raw_point> points, pipeline_config config,
                            std::vector<trace_row>* trace = nullptr) {
    config.mode = detector_mode::salad;
    return detail::run_batch(points, config, trace);
}

inline run_result run_repad_baseline(std::span<const raw_point> points, pipeline_config config,
                                     std::vector<trace_row>* trace = nullptr) {
    config.mode = detector_mode::repad_baseline;
    return detail::run_batch(points, config, trace);
}

/// Dispatches on config.mode.
inline run_result run_detector(std::span<const raw_point> points, const pipeline_config& config,
                               std::vector<trace_row>* trace = nullptr) {
    return detail::run_batch(points, config, trace);
}

struct stream_summary {
    std::size_t points = 0;
    std::size_t decided = 0;
    std::size_t anomalies = 0;
    timing_stats timing;
};

using alert_sink = std::function<void(const anomaly_alert&, const trace_row&)>;

/// Reads a `timestamp,value` CSV feed line by line and emits every decided point to
/// `sink` before the next line is read. An empty feed yields an empty summary.
inline stream_summary stream(std::istream& feed, const pipeline_config& config,
                             const alert_sink& sink) {
    salad_pipeline pipeline(config);
    point_csv_reader reader(feed);
    stream_summary summary;
    std::vector<double> times;
    while (auto point = reader.next()) {
        ++summary.points;
        if (auto alert = pipeline.step(*point)) {
            ++summary.decided;
            if (alert->is_anomaly()) ++summary.anomalies;
            times.push_back(alert->decision_time);
            if (sink) sink(*alert, pipeline.last_trace());
        }
    }
    summary.timing = summarize_timing(times);
    return summary;
}

} // namespace salad
