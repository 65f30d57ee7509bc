#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "salad/lstm.hpp"

namespace salad {

struct gradcheck_report {
    double max_relative_error = 0.0;
    std::size_t checked = 0;  // parameters with |grad| above the floor
    std::size_t total = 0;
    bool passed = false;
};

/// Largest |a - n| / max(|a|, |n|) over entries where max(|a|, |n|) > floor.
inline double max_relative_discrepancy(std::span<const double> analytic,
                                       std::span<const double> numeric, double floor,
                                       std::size_t* checked = nullptr) {
    double worst = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < analytic.size() && i < numeric.size(); ++i) {
        const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
        if (scale <= floor) continue;
        ++n;
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    if (checked) *checked = n;
    return worst;
}

/// Ten samples of a sine, the fixed input of the self-check.
inline std::vector<double> gradcheck_window() {
    std::vector<double> w(10);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 5.0 + 3.0 * std::sin(0.7 * static_cast<double>(i));
    return w;
}

/// Compares BPTT gradients with central finite differences (step 1e-5) for a freshly
/// initialised model. `tamper` may modify the analytic gradient (negative control).
inline gradcheck_report run_gradcheck(
    std::uint64_t seed, std::size_t hidden, double tolerance = 1e-4,
    const std::function<void(std::vector<double>&)>& tamper = {}) {
    network_config cfg;
    cfg.hidden_units = hidden;
    cfg.seed = seed;
    sequence_model model = init_model(cfg);
    const auto window = gradcheck_window();
    model.set_scaler(min_max_scaler::fit(window));

    auto analytic = analytic_gradient(model, window);
    if (tamper) tamper(analytic);
    const auto numeric = numeric_gradient(model, window, 1e-5);

    gradcheck_report r;
    r.total = analytic.size();
    r.max_relative_error = max_relative_discrepancy(analytic, numeric, 1e-8, &r.checked);
    r.passed = r.checked > 0 && r.max_relative_error < tolerance;
    return r;
}

} // namespace salad
