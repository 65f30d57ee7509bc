#pragma once

// Synthetic recurrent series with injected anomalies, used as acceptance data.
//
// Anomaly spec grammar (comma separated):
//   spike@<index>=<factor>            multiply one point (e.g. spike@1500=3)
//   dip@<index>=<factor>              multiply one point (e.g. dip@2000=0.3)
//   shift@<index>:<length>=<delta>    add delta * amplitude to `length` points

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ctime>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "salad/conversion.hpp"
#include "salad/errors.hpp"
#include "salad/evaluation.hpp"
#include "salad/point_csv.hpp"

namespace salad {

enum class synth_pattern { sine, double_sine, constant };

inline synth_pattern parse_synth_pattern(std::string_view s) {
    if (s == "sine") return synth_pattern::sine;
    if (s == "double-sine") return synth_pattern::double_sine;
    if (s == "constant") return synth_pattern::constant;
    throw config_error("unknown pattern '" + std::string(s) + "' (sine|double-sine|constant)");
}

enum class anomaly_kind { spike, dip, shift };

struct anomaly_spec {
    anomaly_kind kind = anomaly_kind::spike;
    std::size_t index = 0;
    std::size_t length = 1;
    double magnitude = 1.0;

    label_window window() const {
        static constexpr const char* names[] = {"spike", "dip", "level shift"};
        return {index, index + length - 1, names[static_cast<int>(kind)]};
    }
};

inline std::vector<anomaly_spec> parse_anomaly_specs(std::string_view text) {
    std::vector<anomaly_spec> out;
    auto fail = [](std::string_view item, const char* why) {
        throw config_error("bad anomaly spec '" + std::string(item) + "': " + why);
    };
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = detail::trim(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) continue;

        const auto at = item.find('@');
        const auto eq = item.find('=');
        if (at == std::string_view::npos || eq == std::string_view::npos || eq < at)
            fail(item, "expected kind@index[:length]=magnitude");
        anomaly_spec a;
        const auto kind = item.substr(0, at);
        if (kind == "spike") a.kind = anomaly_kind::spike;
        else if (kind == "dip") a.kind = anomaly_kind::dip;
        else if (kind == "shift") a.kind = anomaly_kind::shift;
        else fail(item, "kind must be spike, dip or shift");

        auto where = item.substr(at + 1, eq - at - 1);
        const auto colon = where.find(':');
        auto parse_count = [&](std::string_view s) {
            const auto v = detail::parse_double(s);
            if (!v || *v < 0 || *v != std::floor(*v)) fail(item, "index/length must be integers");
            return static_cast<std::size_t>(*v);
        };
        a.index = parse_count(where.substr(0, colon));
        if (colon != std::string_view::npos) {
            if (a.kind != anomaly_kind::shift) fail(item, "only shift takes a length");
            a.length = parse_count(where.substr(colon + 1));
            if (a.length == 0) fail(item, "length must be >= 1");
        } else if (a.kind == anomaly_kind::shift) {
            fail(item, "shift needs a length (shift@index:length=delta)");
        }
        const auto mag = detail::parse_double(item.substr(eq + 1));
        if (!mag || !std::isfinite(*mag)) fail(item, "magnitude must be a number");
        a.magnitude = *mag;
        out.push_back(a);
    }
    return out;
}

struct synth_config {
    synth_pattern pattern = synth_pattern::sine;
    std::size_t period = 50;
    std::size_t length = 3000;
    double amplitude = 10.0;
    double offset = 30.0;
    double noise = 0.0;  // standard deviation as a fraction of amplitude
    std::uint64_t seed = 0;
    std::size_t interval_minutes = 30;
    std::vector<anomaly_spec> anomalies;

    void validate() const {
        if (period < 4) throw config_error("period must be >= 4");
        if (length < 4 * period) throw config_error("length must be >= 4 * period");
        if (!(noise >= 0.0)) throw config_error("noise must be >= 0");
        if (interval_minutes == 0) throw config_error("interval must be >= 1 minute");
        for (const auto& a : anomalies)
            if (a.index + a.length > length)
                throw config_error("anomaly at " + std::to_string(a.index) +
                                   " extends past the end of the series");
    }
};

struct synth_series {
    std::vector<raw_point> points;
    std::vector<label_window> labels;
};

inline std::string synth_timestamp(std::size_t t, std::size_t interval_minutes) {
    constexpr std::time_t start = 1577836800;  // 2020-01-01 00:00:00 UTC
    const std::time_t when = start + static_cast<std::time_t>(t * interval_minutes * 60);
    std::tm tm{};
    gmtime_r(&when, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S", &tm);
    return buf;
}

inline double synth_base(const synth_config& c, std::size_t t) {
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(t);
    switch (c.pattern) {
    case synth_pattern::sine:
        return c.offset + c.amplitude * std::sin(phase / static_cast<double>(c.period));
    case synth_pattern::double_sine:
        // daily-like cycle plus a slower cycle seven times longer
        return c.offset + c.amplitude * std::sin(phase / static_cast<double>(c.period)) +
               0.5 * c.amplitude * std::sin(phase / static_cast<double>(7 * c.period));
    case synth_pattern::constant:
        return c.offset;
    }
    return c.offset;
}

inline synth_series generate_series(const synth_config& c) {
    c.validate();
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    synth_series out;
    out.points.reserve(c.length);
    for (std::size_t t = 0; t < c.length; ++t) {
        double v = synth_base(c, t);
        if (c.noise > 0.0) v += c.noise * c.amplitude * gauss(rng);
        out.points.push_back({t, v, synth_timestamp(t, c.interval_minutes)});
    }
    for (const auto& a : c.anomalies) {
        for (std::size_t k = 0; k < a.length; ++k) {
            double& v = out.points[a.index + k].value;
            if (a.kind == anomaly_kind::shift) v += a.magnitude * c.amplitude;
            else v *= a.magnitude;
        }
        out.labels.push_back(a.window());
    }
    return out;
}

} // namespace salad
