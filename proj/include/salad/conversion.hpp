#pragma once

// Conversion stage: turns the raw series into a calibrated AARE series.
//
// Schedule for window length b (t is the index of the point being ingested):
//   t <  b-1          buffer only
//   t == b-1          train M1 on v_0..v_{b-1}, predict v_b
//   b <= t < 2b-1     predict v_{t+1} with M1, no retraining
//   2b-1 <= t < 2b+1  AARE_t into history, retrain M1 on the last b points, predict
//   t >= 2b+1         AARE_t against mean+3sd of history; on breach retrain M1 on
//                     v_{t-b}..v_{t-1}, re-predict v_t and recompute AARE_t; emit A_t

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salad/errors.hpp"
#include "salad/lstm.hpp"
#include "salad/stats.hpp"

namespace salad {

struct raw_point {
    std::size_t t = 0;
    double value = 0.0;
    std::string timestamp;  // opaque label, may be empty
};

struct calibrated_aare {
    std::size_t t = 0;
    double value = 0.0;
    bool recalibrated = false;

    bool operator==(const calibrated_aare&) const = default;
};

struct conversion_config {
    std::size_t b = 100;
    network_config network = network_config::conversion(0);
    double epsilon_factor = 1e-8;

    void validate() const {
        if (b < 4) throw config_error("b must be >= 4, got " + std::to_string(b));
        network.validate();
    }
};

/// Diagnostics for the most recent ingest call.
struct conversion_step {
    std::size_t t = 0;
    std::optional<double> predicted;       // final v̂_t, if one exists
    std::optional<double> aare_initial;    // AARE_t before any recalibration
    std::optional<double> aare;            // value appended to history
    std::optional<double> threshold;       // conversion threshold used at t
    std::optional<double> next_predicted;  // v̂_{t+1}
    bool retrained = false;                // M1 trained or replaced during this step
};

class converter {
public:
    explicit converter(conversion_config config)
        : config_(std::move(config)), epsilon_(config_.epsilon_factor) {
        config_.validate();
    }

    const conversion_config& config() const noexcept { return config_; }
    std::size_t window() const noexcept { return config_.b; }
    std::size_t next_index() const noexcept { return next_t_; }
    std::size_t first_emission_index() const noexcept { return 2 * config_.b + 1; }
    std::span<const double> aare_history() const noexcept { return history_; }
    const std::optional<sequence_model>& model() const noexcept { return model_; }
    const conversion_step& last_step() const noexcept { return step_; }
    std::size_t trainings() const noexcept { return trainings_; }

    /// Prediction for index t if it is still within the retained range.
    std::optional<double> prediction_for(std::size_t t) const {
        if (t < pred_base_ || t >= pred_base_ + predictions_.size()) return std::nullopt;
        return predictions_[t - pred_base_];
    }

    std::optional<calibrated_aare> ingest(const raw_point& point) {
        if (point.t != next_t_) throw out_of_order_point(next_t_, point.t);
        if (!std::isfinite(point.value))
            throw config_error("non-finite value at t=" + std::to_string(point.t));

        const std::size_t b = config_.b;
        const std::size_t t = point.t;
        step_ = conversion_step{};
        step_.t = t;

        values_.push_back(point.value);
        if (values_.size() > b + 1) {
            values_.pop_front();
            ++value_base_;
        }
        epsilon_.observe(point.value);
        ++next_t_;

        std::optional<calibrated_aare> out;
        if (t + 1 < b) {
            return out;
        }
        if (t + 1 == b) {
            retrain(last_values(b));
        } else if (t + 1 < 2 * b) {
            // warm-up: M1 is reused as-is
        } else if (t < 2 * b + 1) {
            const double aare = current_aare(t);
            step_.aare_initial = aare;
            step_.aare = aare;
            history_.push_back(aare);
            retrain(last_values(b));
        } else {
            double aare = current_aare(t);
            step_.aare_initial = aare;
            const double thd = conversion_threshold(history_);
            step_.threshold = thd;
            bool recalibrated = false;
            if (aare > thd) {
                const auto previous = values_before(t, b);  // v_{t-b}..v_{t-1}
                retrain(previous);
                set_prediction(t, predict_next(*model_, previous));
                aare = current_aare(t);
                recalibrated = true;
            }
            step_.aare = aare;
            history_.push_back(aare);
            out = calibrated_aare{t, aare, recalibrated};
        }

        step_.predicted = prediction_for(t);
        const double next = predict_next(*model_, last_values(b));
        set_prediction(t + 1, next);
        step_.next_predicted = next;
        return out;
    }

private:
    std::vector<double> last_values(std::size_t n) const {
        return {values_.end() - static_cast<std::ptrdiff_t>(n), values_.end()};
    }

    // n values ending just before index t.
    std::vector<double> values_before(std::size_t t, std::size_t n) const {
        const std::size_t end = t - value_base_;
        return {values_.begin() + static_cast<std::ptrdiff_t>(end - n),
                values_.begin() + static_cast<std::ptrdiff_t>(end)};
    }

    void retrain(std::span<const double> window) {
        model_ = train(window, config_.network).model;
        step_.retrained = true;
        ++trainings_;
    }

    void set_prediction(std::size_t t, double v) {
        if (predictions_.empty()) pred_base_ = t;
        if (t < pred_base_) return;
        while (pred_base_ + predictions_.size() <= t) predictions_.push_back(0.0);
        predictions_[t - pred_base_] = v;
        while (predictions_.size() > config_.b + 2) {
            predictions_.pop_front();
            ++pred_base_;
        }
    }

    // AARE over y = t-b+1..t.
    double current_aare(std::size_t t) const {
        const std::size_t b = config_.b;
        const auto observed = last_values(b);
        std::vector<double> predicted(b);
        for (std::size_t k = 0; k < b; ++k) predicted[k] = *prediction_for(t + 1 - b + k);
        return window_aare(observed, predicted, epsilon_.value());
    }

    conversion_config config_;
    epsilon_policy epsilon_;
    std::size_t next_t_ = 0;

    std::deque<double> values_;  // most recent b+1 values
    std::size_t value_base_ = 0;
    std::deque<double> predictions_;
    std::size_t pred_base_ = 0;

    std::optional<sequence_model> model_;
    std::vector<double> history_;
    conversion_step step_;
    std::size_t trainings_ = 0;
};

} // namespace salad
