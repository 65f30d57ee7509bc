#pragma once

// Single-hidden-layer LSTM regressor with one input feature and one output.
//
// Training consumes one window as a single sequence: input v_i, target v_{i+1},
// so a window of n values yields n-1 supervised steps. The loss is the mean
// squared error over those steps in scaled units, and gradients come from full
// backpropagation through time. Optimisation is full-batch Adam, one update per
// epoch, with early stopping on the training loss.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "salad/errors.hpp"
#include "salad/scaler.hpp"

namespace salad {

struct network_config {
    std::size_t hidden_units = 10;
    std::size_t epoch_cap = 100;
    std::size_t early_stop_patience = 5;
    double early_stop_min_delta = 1e-5;
    double learning_rate = 0.01;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (hidden_units < 1) throw config_error("hidden_units must be >= 1");
        if (epoch_cap < 1) throw config_error("epoch_cap must be >= 1");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw config_error("learning_rate must be > 0");
        if (!(early_stop_min_delta >= 0.0)) throw config_error("early_stop_min_delta must be >= 0");
    }

    /// M1: conversion-stage model, up to 100 epochs.
    static network_config conversion(std::uint64_t seed) {
        network_config c;
        c.epoch_cap = 100;
        c.seed = seed;
        return c;
    }

    /// M2: detection-stage model, up to 50 epochs.
    static network_config detection(std::uint64_t seed) {
        network_config c;
        c.epoch_cap = 50;
        c.seed = seed;
        return c;
    }
};

namespace detail {

// splitmix64; fixed arithmetic so weights do not depend on the standard library's
// distribution implementations.
class splitmix64 {
public:
    explicit splitmix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace detail

/// Gate order inside every 4H block.
enum class gate : std::size_t { input = 0, forget = 1, candidate = 2, output = 3 };

/// Flat parameter vector with named views. Layout:
///   input weights  [4H]      (gate-major: gate k, unit j at k*H + j)
///   recurrent      [4H x H]  (row k*H + j, column m = previous hidden unit)
///   gate bias      [4H]
///   output weights [H]
///   output bias    [1]
class lstm_parameters {
public:
    lstm_parameters() = default;
    explicit lstm_parameters(std::size_t hidden)
        : hidden_(hidden), values_(count_for(hidden), 0.0) {}

    static constexpr std::size_t count_for(std::size_t hidden) noexcept {
        return 4 * hidden + 4 * hidden * hidden + 4 * hidden + hidden + 1;
    }

    std::size_t hidden() const noexcept { return hidden_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<double> all() noexcept { return values_; }
    std::span<const double> all() const noexcept { return values_; }

    std::span<double> input_weights() noexcept { return all().subspan(0, 4 * hidden_); }
    std::span<const double> input_weights() const noexcept { return all().subspan(0, 4 * hidden_); }

    std::span<double> recurrent_weights() noexcept {
        return all().subspan(4 * hidden_, 4 * hidden_ * hidden_);
    }
    std::span<const double> recurrent_weights() const noexcept {
        return all().subspan(4 * hidden_, 4 * hidden_ * hidden_);
    }

    std::span<double> gate_bias() noexcept { return all().subspan(bias_offset(), 4 * hidden_); }
    std::span<const double> gate_bias() const noexcept {
        return all().subspan(bias_offset(), 4 * hidden_);
    }

    std::span<double> output_weights() noexcept {
        return all().subspan(bias_offset() + 4 * hidden_, hidden_);
    }
    std::span<const double> output_weights() const noexcept {
        return all().subspan(bias_offset() + 4 * hidden_, hidden_);
    }

    double& output_bias() noexcept { return values_.back(); }
    double output_bias() const noexcept { return values_.back(); }

    bool all_finite() const noexcept {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const lstm_parameters&) const = default;

private:
    std::size_t bias_offset() const noexcept { return 4 * hidden_ + 4 * hidden_ * hidden_; }

    std::size_t hidden_ = 0;
    std::vector<double> values_;
};

/// A trained (or freshly initialised) network together with the scaler of the
/// window it was fitted on. Immutable once returned by train().
class sequence_model {
public:
    sequence_model() = default;
    sequence_model(lstm_parameters params, min_max_scaler scaler, std::size_t trained_epochs = 0)
        : params_(std::move(params)), scaler_(scaler), trained_epochs_(trained_epochs) {}

    std::size_t hidden_units() const noexcept { return params_.hidden(); }
    const lstm_parameters& parameters() const noexcept { return params_; }
    lstm_parameters& parameters() noexcept { return params_; }
    const min_max_scaler& scaler() const noexcept { return scaler_; }
    void set_scaler(min_max_scaler s) noexcept { scaler_ = s; }
    std::size_t trained_epochs() const noexcept { return trained_epochs_; }

    bool operator==(const sequence_model&) const = default;

private:
    lstm_parameters params_;
    min_max_scaler scaler_;
    std::size_t trained_epochs_ = 0;
};

struct train_outcome {
    sequence_model model;
    double final_loss = 0.0;  // MSE in scaled units, after the last update
    std::size_t epochs_run = 0;

    bool operator==(const train_outcome&) const = default;
};

inline sequence_model init_model(const network_config& config) {
    config.validate();
    const std::size_t hidden = config.hidden_units;
    lstm_parameters p(hidden);
    detail::splitmix64 rng(config.seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(hidden));
    auto draw = [&] { return (rng.uniform() - 0.5) * scale; };
    for (double& w : p.input_weights()) w = draw();
    for (double& w : p.recurrent_weights()) w = draw();
    for (double& w : p.output_weights()) w = draw();
    auto bias = p.gate_bias();
    const std::size_t f0 = static_cast<std::size_t>(gate::forget) * hidden;
    for (std::size_t j = 0; j < hidden; ++j) bias[f0 + j] = 1.0;
    return sequence_model(std::move(p), min_max_scaler{});
}

namespace detail {

// Per-step activations kept for backpropagation.
struct forward_trace {
    std::size_t hidden = 0;
    std::size_t steps = 0;
    std::vector<double> gates;  // steps x 4H, post-activation
    std::vector<double> cell;   // (steps + 1) x H, row 0 is the initial state
    std::vector<double> state;  // (steps + 1) x H, row 0 is the initial state
    std::vector<double> output; // steps

    std::span<const double> gates_at(std::size_t s) const {
        return std::span<const double>(gates).subspan(s * 4 * hidden, 4 * hidden);
    }
    std::span<const double> cell_at(std::size_t s) const {
        return std::span<const double>(cell).subspan(s * hidden, hidden);
    }
    std::span<const double> state_at(std::size_t s) const {
        return std::span<const double>(state).subspan(s * hidden, hidden);
    }
};

/// Runs the cell over `inputs`. With `trace == nullptr` only the last output is kept.
inline double run_forward(const lstm_parameters& p, std::span<const double> inputs,
                          forward_trace* trace) {
    const std::size_t H = p.hidden();
    const auto wx = p.input_weights();
    const auto wh = p.recurrent_weights();
    const auto bias = p.gate_bias();
    const auto wout = p.output_weights();

    std::vector<double> h(H, 0.0), c(H, 0.0), z(4 * H);
    if (trace) {
        trace->hidden = H;
        trace->steps = inputs.size();
        trace->gates.assign(inputs.size() * 4 * H, 0.0);
        trace->cell.assign((inputs.size() + 1) * H, 0.0);
        trace->state.assign((inputs.size() + 1) * H, 0.0);
        trace->output.assign(inputs.size(), 0.0);
    }

    double y = p.output_bias();
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        const double x = inputs[s];
        for (std::size_t r = 0; r < 4 * H; ++r) {
            double acc = bias[r] + wx[r] * x;
            const double* row = wh.data() + r * H;
            for (std::size_t m = 0; m < H; ++m) acc += row[m] * h[m];
            z[r] = acc;
        }
        for (std::size_t j = 0; j < H; ++j) {
            const double ig = sigmoid(z[j]);
            const double fg = sigmoid(z[H + j]);
            const double gg = std::tanh(z[2 * H + j]);
            const double og = sigmoid(z[3 * H + j]);
            c[j] = fg * c[j] + ig * gg;
            h[j] = og * std::tanh(c[j]);
            if (trace) {
                double* g = trace->gates.data() + s * 4 * H;
                g[j] = ig;
                g[H + j] = fg;
                g[2 * H + j] = gg;
                g[3 * H + j] = og;
            }
        }
        y = p.output_bias();
        for (std::size_t j = 0; j < H; ++j) y += wout[j] * h[j];
        if (trace) {
            std::copy(c.begin(), c.end(), trace->cell.begin() + (s + 1) * H);
            std::copy(h.begin(), h.end(), trace->state.begin() + (s + 1) * H);
            trace->output[s] = y;
        }
    }
    return y;
}

inline void require_sequence(std::span<const double> scaled) {
    if (scaled.size() < 2)
        throw window_too_short("training window needs at least 2 values, got " +
                               std::to_string(scaled.size()));
}

} // namespace detail

/// Mean squared one-step error over a window already in scaled units.
inline double sequence_loss(const lstm_parameters& p, std::span<const double> scaled) {
    detail::require_sequence(scaled);
    detail::forward_trace tr;
    detail::run_forward(p, scaled.first(scaled.size() - 1), &tr);
    double loss = 0.0;
    for (std::size_t s = 0; s + 1 < scaled.size(); ++s) {
        const double e = tr.output[s] - scaled[s + 1];
        loss += e * e;
    }
    return loss / static_cast<double>(scaled.size() - 1);
}

/// Loss and its exact gradient (BPTT) over a window in scaled units.
/// `grad` is resized to the parameter count and overwritten.
inline double loss_and_gradient(const lstm_parameters& p, std::span<const double> scaled,
                                std::vector<double>& grad) {
    detail::require_sequence(scaled);
    const std::size_t H = p.hidden();
    const std::size_t steps = scaled.size() - 1;
    const double inv_n = 1.0 / static_cast<double>(steps);

    detail::forward_trace tr;
    detail::run_forward(p, scaled.first(steps), &tr);

    grad.assign(p.size(), 0.0);
    lstm_parameters g(H);
    auto gwx = g.input_weights();
    auto gwh = g.recurrent_weights();
    auto gb = g.gate_bias();
    auto gwout = g.output_weights();
    double gbout = 0.0;

    const auto wh = p.recurrent_weights();
    const auto wout = p.output_weights();

    double loss = 0.0;
    std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dh(H), dz(4 * H);

    for (std::size_t k = steps; k-- > 0;) {
        const double err = tr.output[k] - scaled[k + 1];
        loss += err * err;
        const double dy = 2.0 * err * inv_n;

        const auto gates = tr.gates_at(k);
        const auto c_prev = tr.cell_at(k);
        const auto c_now = tr.cell_at(k + 1);
        const auto h_prev = tr.state_at(k);
        const auto h_now = tr.state_at(k + 1);

        gbout += dy;
        for (std::size_t j = 0; j < H; ++j) {
            gwout[j] += dy * h_now[j];
            dh[j] = dy * wout[j] + dh_next[j];
        }

        for (std::size_t j = 0; j < H; ++j) {
            const double ig = gates[j];
            const double fg = gates[H + j];
            const double gg = gates[2 * H + j];
            const double og = gates[3 * H + j];
            const double tc = std::tanh(c_now[j]);
            const double dc = dh[j] * og * (1.0 - tc * tc) + dc_next[j];
            dz[j] = dc * gg * ig * (1.0 - ig);
            dz[H + j] = dc * c_prev[j] * fg * (1.0 - fg);
            dz[2 * H + j] = dc * ig * (1.0 - gg * gg);
            dz[3 * H + j] = dh[j] * tc * og * (1.0 - og);
            dc_next[j] = dc * fg;
        }

        const double x = scaled[k];
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        for (std::size_t r = 0; r < 4 * H; ++r) {
            gwx[r] += dz[r] * x;
            gb[r] += dz[r];
            const double* row = wh.data() + r * H;
            double* grow = gwh.data() + r * H;
            for (std::size_t m = 0; m < H; ++m) {
                grow[m] += dz[r] * h_prev[m];
                dh_next[m] += row[m] * dz[r];
            }
        }
    }
    g.output_bias() = gbout;
    std::copy(g.all().begin(), g.all().end(), grad.begin());
    return loss * inv_n;
}

/// Central finite differences of the MSE loss over every parameter. The window is
/// given in original units and scaled with the model's own scaler.
inline std::vector<double> numeric_gradient(const sequence_model& model,
                                            std::span<const double> window, double step = 1e-5) {
    if (!(step > 0.0)) throw config_error("numeric_gradient: step must be > 0");
    if (window.size() < 2)
        throw window_too_short("numeric_gradient: window needs at least 2 values");
    std::vector<double> scaled(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) scaled[i] = model.scaler().transform(window[i]);

    lstm_parameters p = model.parameters();
    std::vector<double> grad(p.size());
    auto values = p.all();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + step;
        const double up = sequence_loss(p, scaled);
        values[i] = saved - step;
        const double down = sequence_loss(p, scaled);
        values[i] = saved;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

/// Analytic counterpart of numeric_gradient, same scaling convention.
inline std::vector<double> analytic_gradient(const sequence_model& model,
                                             std::span<const double> window) {
    std::vector<double> scaled(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) scaled[i] = model.scaler().transform(window[i]);
    std::vector<double> grad;
    loss_and_gradient(model.parameters(), scaled, grad);
    return grad;
}

/// Fits the scaler to `window`, initialises from config.seed and runs Adam with
/// early stopping. Deterministic for fixed (window, config).
inline train_outcome train(std::span<const double> window, const network_config& config) {
    config.validate();
    if (window.size() < 2)
        throw window_too_short("train: window needs at least 2 values, got " +
                               std::to_string(window.size()));
    for (double v : window)
        if (!std::isfinite(v)) throw config_error("train: window contains a non-finite value");

    sequence_model model = init_model(config);
    const auto scaler = min_max_scaler::fit(window);
    model.set_scaler(scaler);

    std::vector<double> scaled(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) scaled[i] = scaler.transform(window[i]);

    auto params = model.parameters().all();
    std::vector<double> grad, m1(params.size(), 0.0), m2(params.size(), 0.0);
    double beta1_pow = 1.0, beta2_pow = 1.0;
    double best = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    std::size_t epochs = 0;

    for (std::size_t epoch = 1; epoch <= config.epoch_cap; ++epoch) {
        const double loss = loss_and_gradient(model.parameters(), scaled, grad);
        if (!std::isfinite(loss))
            throw non_finite_loss("train: loss became non-finite at epoch " + std::to_string(epoch));

        beta1_pow *= config.adam_beta1;
        beta2_pow *= config.adam_beta2;
        for (std::size_t i = 0; i < params.size(); ++i) {
            m1[i] = config.adam_beta1 * m1[i] + (1.0 - config.adam_beta1) * grad[i];
            m2[i] = config.adam_beta2 * m2[i] + (1.0 - config.adam_beta2) * grad[i] * grad[i];
            const double mhat = m1[i] / (1.0 - beta1_pow);
            const double vhat = m2[i] / (1.0 - beta2_pow);
            params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_epsilon);
        }
        epochs = epoch;

        if (loss < best - config.early_stop_min_delta) {
            best = loss;
            stale = 0;
        } else if (++stale >= config.early_stop_patience) {
            break;
        }
    }

    if (!model.parameters().all_finite())
        throw non_finite_loss("train: parameters became non-finite");
    const double final_loss = sequence_loss(model.parameters(), scaled);
    if (!std::isfinite(final_loss)) throw non_finite_loss("train: final loss is non-finite");

    return {sequence_model(std::move(model.parameters()), scaler, epochs), final_loss, epochs};
}

/// One-step-ahead prediction in original units from the given history.
inline double predict_next(const sequence_model& model, std::span<const double> recent) {
    if (recent.empty()) throw empty_input("predict_next: empty input sequence");
    const auto& scaler = model.scaler();
    std::vector<double> scaled(recent.size());
    for (std::size_t i = 0; i < recent.size(); ++i) scaled[i] = scaler.transform(recent[i]);
    return scaler.inverse(detail::run_forward(model.parameters(), scaled, nullptr));
}

} // namespace salad
