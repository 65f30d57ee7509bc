#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "salad/evaluation.hpp"
#include "salad/formats.hpp"
#include "salad/pipeline.hpp"
#include "salad/synth.hpp"

using namespace salad;

namespace {

pipeline_config fast_config(std::size_t b = 12, std::uint64_t seed = 3) {
    pipeline_config c;
    c.b = b;
    c.seed = seed;
    c.hidden_units = 4;
    return c;
}

std::vector<raw_point> constant_series(std::size_t n, double v) {
    std::vector<raw_point> out;
    for (std::size_t t = 0; t < n; ++t) out.push_back({t, v, "t" + std::to_string(t)});
    return out;
}

std::vector<raw_point> sine_series(std::size_t n, std::size_t period, std::size_t spike_at = 0) {
    synth_config c;
    c.period = period;
    c.length = n;
    c.noise = 0.01;
    c.seed = 4;
    if (spike_at) c.anomalies.push_back({anomaly_kind::spike, spike_at, 1, 3.0});
    return generate_series(c).points;
}

std::size_t anomaly_count(const run_result& r) {
    std::size_t n = 0;
    for (const auto& a : r.alerts) n += a.is_anomaly();
    return n;
}

} // namespace

TEST(PipelineConfig, Schedule) {
    auto c = fast_config(288);
    EXPECT_EQ(c.first_decision_index(), 2u * 288 + 9);
    EXPECT_GE(c.first_decision_index(), 584u);
    c.mode = detector_mode::repad_baseline;
    EXPECT_EQ(c.first_decision_index(), 8u);
    EXPECT_NE(c.conversion_seed(), c.detection_seed());
}

TEST(PipelineConfig, Validation) {
    auto c = fast_config(3);
    EXPECT_THROW(c.validate(), config_error);
    EXPECT_THROW(run_salad(constant_series(100, 1.0), c), config_error);
    EXPECT_THROW(run_salad(constant_series(20, 1.0), fast_config(12)), series_too_short);
}

TEST(RunSalad, OneAlertPerPointFromFirstDecision) {
    const auto c = fast_config();
    const auto pts = sine_series(120, 10);
    std::vector<trace_row> trace;
    const auto r = run_salad(pts, c, &trace);
    ASSERT_EQ(trace.size(), pts.size());
    ASSERT_EQ(r.alerts.size(), pts.size() - c.first_decision_index());
    for (std::size_t i = 0; i < r.alerts.size(); ++i) {
        const auto& a = r.alerts[i];
        EXPECT_EQ(a.t, c.first_decision_index() + i);
        EXPECT_EQ(a.raw_value, pts[a.t].value);
        EXPECT_EQ(a.timestamp, pts[a.t].timestamp);
        EXPECT_TRUE(a.verdict.consistent());
        EXPECT_GE(a.decision_time, 0.0);
        ASSERT_TRUE(trace[a.t].verdict);
        EXPECT_EQ(*trace[a.t].verdict, a.verdict.kind);
        EXPECT_EQ(*trace[a.t].threshold, a.verdict.threshold);
    }
    for (std::size_t t = 0; t < c.first_decision_index(); ++t) EXPECT_FALSE(trace[t].verdict);
    for (std::size_t t = 2 * c.b + 1; t < pts.size(); ++t) EXPECT_TRUE(trace[t].calibrated_aare);
    EXPECT_EQ(r.timing.count, r.alerts.size());
}

TEST(RunSalad, ConstantSeriesHasNoAnomalies) {
    const auto c = fast_config(10);
    const auto r = run_salad(constant_series(3 * 10 + 11, 7.0), c);
    EXPECT_FALSE(r.alerts.empty());
    EXPECT_EQ(anomaly_count(r), 0u);
    const auto base = run_repad_baseline(constant_series(41, 7.0), c);
    EXPECT_EQ(anomaly_count(base), 0u);
}

TEST(RunSalad, Deterministic) {
    const auto c = fast_config();
    const auto pts = sine_series(150, 10, 110);
    const auto a = run_salad(pts, c);
    const auto b = run_salad(pts, c);
    ASSERT_EQ(a.alerts.size(), b.alerts.size());
    for (std::size_t i = 0; i < a.alerts.size(); ++i) EXPECT_EQ(a.alerts[i].verdict, b.alerts[i].verdict);
}

TEST(RunRepad, FlagsSpike) {
    // 10x spike; training is seed dependent, so ask for a majority of seeds
    synth_config sc;
    sc.period = 20;
    sc.length = 200;
    sc.noise = 0.01;
    sc.seed = 4;
    sc.anomalies.push_back({anomaly_kind::spike, 150, 1, 10.0});
    const auto series = generate_series(sc);
    std::size_t detected = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        pipeline_config c;
        c.seed = seed;
        const auto r = run_repad_baseline(series.points, c);
        EXPECT_EQ(r.alerts.front().t, 8u);
        detected += score(r.alerts, series.labels, {3}).tp;
    }
    EXPECT_GE(detected, 3u);
}

TEST(Stream, MatchesBatch) {
    const auto c = fast_config();
    const auto pts = sine_series(140, 10, 100);
    std::stringstream csv;
    write_points_csv(csv, pts);
    std::vector<anomaly_alert> streamed;
    std::size_t rows = 0;
    const auto summary = stream(csv, c, [&](const anomaly_alert& a, const trace_row& row) {
        EXPECT_EQ(row.t, a.t);
        ++rows;
        streamed.push_back(a);
    });
    csv.clear();
    csv.seekg(0);
    const auto reread = read_points_csv(csv);
    ASSERT_EQ(reread.size(), pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(reread[i].value, pts[i].value);
    const auto batch = run_salad(reread, c);
    EXPECT_EQ(summary.points, pts.size());
    ASSERT_EQ(streamed.size(), batch.alerts.size());
    EXPECT_EQ(summary.decided, rows);
    for (std::size_t i = 0; i < streamed.size(); ++i) {
        EXPECT_EQ(streamed[i].t, batch.alerts[i].t);
        EXPECT_EQ(streamed[i].verdict, batch.alerts[i].verdict);
    }
}

TEST(Stream, EmptyFeedAndParseErrors) {
    std::istringstream empty;
    const auto s = stream(empty, fast_config(), {});
    EXPECT_EQ(s.points, 0u);
    EXPECT_EQ(s.decided, 0u);

    std::istringstream bad("timestamp,value\na,1\nb,oops\n");
    try {
        stream(bad, fast_config(), {});
        FAIL() << "expected parse_error";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}
