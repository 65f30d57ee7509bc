#pragma once

// Detection stage: predicts the calibrated AARE stream with a small model (M2)
// trained on the `lookback` most recent values and flags points whose short-window
// AARE exceeds mean+3sd of all earlier detection AARE values twice, once with the
// current M2 and once more after retraining on the values preceding t.
//
// With lookback L and first input index f:
//   f .. f+L-2              buffer
//   f+L-1 .. f+2L-2         train on the last L values, predict next
//   f+2L-1 ..               short AARE available (L consecutive predictions)
//   first `min_history` of those only seed the history (still retraining each step)
//   from f+2L-1+min_history verdicts are emitted; M2 changes only on PatternChange
//
// For the SALAD detection stage f = 2b+1 and L = 3, so the first verdict is at 2b+9.

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "salad/errors.hpp"
#include "salad/lstm.hpp"
#include "salad/stats.hpp"

namespace salad {

enum class verdict_kind { normal, pattern_change, anomaly };

inline std::string_view to_string(verdict_kind k) noexcept {
    switch (k) {
    case verdict_kind::normal: return "normal";
    case verdict_kind::pattern_change: return "pattern_change";
    case verdict_kind::anomaly: return "anomaly";
    }
    return "unknown";
}

inline verdict_kind parse_verdict_kind(std::string_view s) {
    if (s == "normal") return verdict_kind::normal;
    if (s == "pattern_change") return verdict_kind::pattern_change;
    if (s == "anomaly") return verdict_kind::anomaly;
    throw config_error("unknown verdict kind '" + std::string(s) + "'");
}

struct detection_verdict {
    std::size_t t = 0;
    verdict_kind kind = verdict_kind::normal;
    double aare_first = 0.0;
    std::optional<double> aare_recheck;
    double threshold = 0.0;

    /// Field consistency between kind, both AARE values and the threshold.
    bool consistent() const noexcept {
        switch (kind) {
        case verdict_kind::normal: return aare_first <= threshold && !aare_recheck;
        case verdict_kind::pattern_change:
            return aare_first > threshold && aare_recheck && *aare_recheck <= threshold;
        case verdict_kind::anomaly:
            return aare_first > threshold && aare_recheck && *aare_recheck > threshold;
        }
        return false;
    }

    bool operator==(const detection_verdict&) const = default;
};

struct detection_config {
    std::size_t lookback = 3;
    std::size_t min_history = 3;
    network_config network = network_config::detection(0);
    double epsilon_factor = 1e-8;

    void validate() const {
        if (lookback < 2) throw config_error("lookback must be >= 2");
        if (min_history < 3) throw config_error("min_history must be >= 3");
        network.validate();
    }
};

struct detection_step {
    std::size_t t = 0;
    std::optional<double> predicted;       // final prediction for t
    std::optional<double> aare;            // detection AARE appended to history
    std::optional<double> threshold;
    std::optional<double> next_predicted;
    bool model_replaced = false;           // M2 trained or swapped during this step
};

class detector {
public:
    explicit detector(detection_config config)
        : config_(std::move(config)), epsilon_(config_.epsilon_factor) {
        config_.validate();
    }

    const detection_config& config() const noexcept { return config_; }
    std::span<const double> aare_history() const noexcept { return history_; }
    const std::optional<sequence_model>& model() const noexcept { return model_; }
    const detection_step& last_step() const noexcept { return step_; }
    std::size_t model_generation() const noexcept { return generation_; }

    std::optional<std::size_t> first_index() const noexcept { return first_; }

    /// Index of the first verdict once the first input index is known.
    static std::size_t first_decision_index(std::size_t first_input, const detection_config& c) {
        return first_input + 2 * c.lookback - 1 + c.min_history;
    }

    std::optional<double> prediction_for(std::size_t t) const {
        if (t < pred_base_ || t >= pred_base_ + predictions_.size()) return std::nullopt;
        return predictions_[t - pred_base_];
    }

    std::optional<detection_verdict> ingest(std::size_t t, double value) {
        if (!first_) {
            first_ = t;
            next_t_ = t;
            value_base_ = t;
        }
        if (t != next_t_) throw out_of_order_point(next_t_, t);
        if (!std::isfinite(value))
            throw config_error("non-finite value at t=" + std::to_string(t));

        const std::size_t L = config_.lookback;
        step_ = detection_step{};
        step_.t = t;
        values_.push_back(value);
        if (values_.size() > L + 1) {
            values_.pop_front();
            ++value_base_;
        }
        epsilon_.observe(value);
        ++next_t_;

        const std::size_t seen = t - *first_ + 1;
        std::optional<detection_verdict> out;
        if (seen < L) return out;

        if (seen < 2 * L) {
            replace_model(train_on(last_values(L)));
        } else if (history_.size() < config_.min_history) {
            const double aare = current_aare(t);
            history_.push_back(aare);
            step_.aare = aare;
            replace_model(train_on(last_values(L)));
        } else {
            out = decide(t);
        }

        step_.predicted = prediction_for(t);
        const double next = predict_next(*model_, last_values(L));
        set_prediction(t + 1, next);
        step_.next_predicted = next;
        return out;
    }

private:
    detection_verdict decide(std::size_t t) {
        const std::size_t L = config_.lookback;
        detection_verdict v;
        v.t = t;
        v.aare_first = current_aare(t);
        v.threshold = detection_threshold(history_);
        step_.threshold = v.threshold;

        if (v.aare_first <= v.threshold) {
            v.kind = verdict_kind::normal;
            history_.push_back(v.aare_first);
            step_.aare = v.aare_first;
            return v;
        }

        const auto previous = values_before(t, L);
        sequence_model candidate = train_on(previous);
        set_prediction(t, predict_next(candidate, previous));
        const double recheck = current_aare(t);
        v.aare_recheck = recheck;
        if (recheck <= v.threshold) {
            v.kind = verdict_kind::pattern_change;
            replace_model(std::move(candidate));
        } else {
            v.kind = verdict_kind::anomaly;
        }
        history_.push_back(recheck);
        step_.aare = recheck;
        return v;
    }

    sequence_model train_on(std::span<const double> window) const {
        return train(window, config_.network).model;
    }

    void replace_model(sequence_model m) {
        model_ = std::move(m);
        ++generation_;
        step_.model_replaced = true;
    }

    std::vector<double> last_values(std::size_t n) const {
        return {values_.end() - static_cast<std::ptrdiff_t>(n), values_.end()};
    }

    std::vector<double> values_before(std::size_t t, std::size_t n) const {
        const std::size_t end = t - value_base_;
        return {values_.begin() + static_cast<std::ptrdiff_t>(end - n),
                values_.begin() + static_cast<std::ptrdiff_t>(end)};
    }

    void set_prediction(std::size_t t, double v) {
        if (predictions_.empty()) pred_base_ = t;
        while (pred_base_ + predictions_.size() <= t) predictions_.push_back(0.0);
        predictions_[t - pred_base_] = v;
        while (predictions_.size() > config_.lookback + 2) {
            predictions_.pop_front();
            ++pred_base_;
        }
    }

    double current_aare(std::size_t t) const {
        const std::size_t L = config_.lookback;
        const auto actual = last_values(L);
        std::vector<double> predicted(L);
        for (std::size_t k = 0; k < L; ++k) predicted[k] = *prediction_for(t + 1 - L + k);
        return mean_relative_error(actual, predicted, epsilon_.value());
    }

    detection_config config_;
    epsilon_policy epsilon_;
    std::optional<std::size_t> first_;
    std::size_t next_t_ = 0;

    std::deque<double> values_;
    std::size_t value_base_ = 0;
    std::deque<double> predictions_;
    std::size_t pred_base_ = 0;

    std::optional<sequence_model> model_;
    std::size_t generation_ = 0;
    std::vector<double> history_;
    detection_step step_;
};

} // namespace salad
