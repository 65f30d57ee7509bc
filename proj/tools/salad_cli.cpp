// salad: command-line front end.
//
//   salad run INPUT.csv --b 42 [--seed S] [--mode salad|repad] [--alerts OUT] [--trace OUT]
//   salad eval ALERTS.jsonl LABELS.json [--slack X]
//   salad synth OUT.csv [--pattern sine|double-sine|constant] [--period P] [--length N] ...
//   salad gradcheck [--seed S] [--hidden H]
//
// Exit status: 0 success, 1 runtime/I-O failure, 2 malformed input, 3 bad configuration.

#include <cstdint>
#include <cstdio>
#include <functional>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "salad/salad.hpp"

namespace {

enum exit_code : int { ok = 0, runtime_failure = 1, input_error = 2, usage_error = 3 };

struct run_options {
    std::string input;
    long long b = 0;
    std::uint64_t seed = 0;
    std::string mode = "salad";
    std::string alerts = "-";
    std::string trace;
    bool no_timing = false;
    bool streaming = false;
    std::size_t hidden = 10;
    double learning_rate = 0.01;
    std::size_t patience = 5;
    double min_delta = 1e-5;
};

struct eval_options {
    std::string alerts;
    std::string labels;
    long long slack = 3;
};

struct synth_options {
    std::string out;
    std::string labels;
    std::string pattern = "sine";
    std::size_t period = 50;
    std::size_t length = 3000;
    std::string anomalies;
    double noise = 0.0;
    double amplitude = 10.0;
    double offset = 30.0;
    std::size_t interval = 30;
    std::uint64_t seed = 0;
};

struct gradcheck_options {
    std::uint64_t seed = 0;
    std::size_t hidden = 10;
    bool inject_fault = false;
};

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
    return out;
}

salad::detector_mode parse_mode(const std::string& s) {
    if (s == "salad") return salad::detector_mode::salad;
    if (s == "repad") return salad::detector_mode::repad_baseline;
    throw salad::config_error("--mode must be 'salad' or 'repad'");
}

int cmd_run(const run_options& o) {
    if (o.b < 4) throw salad::config_error("--b must be >= 4, got " + std::to_string(o.b));
    salad::pipeline_config cfg;
    cfg.b = static_cast<std::size_t>(o.b);
    cfg.seed = o.seed;
    cfg.mode = parse_mode(o.mode);
    cfg.hidden_units = o.hidden;
    cfg.learning_rate = o.learning_rate;
    cfg.early_stop_patience = o.patience;
    cfg.early_stop_min_delta = o.min_delta;
    cfg.validate();

    auto in = open_input(o.input);

    std::unique_ptr<std::ofstream> alert_file;
    std::ostream* alert_out = &std::cout;
    if (o.alerts != "-") {
        alert_file = std::make_unique<std::ofstream>(open_output(o.alerts));
        alert_out = alert_file.get();
    }
    std::unique_ptr<std::ofstream> trace_out;
    if (!o.trace.empty()) trace_out = std::make_unique<std::ofstream>(open_output(o.trace));

    const salad::alert_write_options wopt{!o.no_timing};
    std::size_t decided = 0, anomalies = 0;
    salad::timing_stats timing;

    if (o.streaming) {
        if (trace_out) salad::write_trace_header(*trace_out);
        auto summary = salad::stream(in, cfg, [&](const salad::anomaly_alert& a,
                                                   const salad::trace_row& row) {
            *alert_out << salad::alert_to_json(a, wopt) << '\n';
            alert_out->flush();
            if (trace_out) salad::write_trace_row(*trace_out, row);
        });
        decided = summary.decided;
        anomalies = summary.anomalies;
        timing = summary.timing;
    } else {
        const auto points = salad::read_points_csv(in);
        std::vector<salad::trace_row> rows;
        auto result = salad::run_detector(points, cfg, trace_out ? &rows : nullptr);
        salad::write_alerts(*alert_out, result.alerts, wopt);
        if (trace_out) salad::write_trace(*trace_out, rows);
        decided = result.alerts.size();
        for (const auto& a : result.alerts) anomalies += a.is_anomaly();
        timing = result.timing;
    }

    std::cerr << "mode=" << salad::to_string(cfg.mode) << " decided=" << decided
              << " anomalies=" << anomalies << " mean_decision_time=" << timing.mean
              << "s std=" << timing.std << "s\n";
    return ok;
}

int cmd_eval(const eval_options& o) {
    if (o.slack < 0) throw salad::config_error("--slack must be >= 0");
    auto alerts_in = open_input(o.alerts);
    auto labels_in = open_input(o.labels);
    const auto alerts = salad::read_alerts(alerts_in);
    const auto labels = salad::read_labels(labels_in);
    const auto r = salad::score(alerts, labels, {static_cast<std::size_t>(o.slack)});

    std::cout << std::setprecision(6) << "tp " << r.tp << '\n'
              << "fp " << r.fp << '\n'
              << "fn " << r.fn << '\n'
              << "precision " << r.precision << '\n'
              << "recall " << r.recall << '\n'
              << "fscore " << r.fscore << '\n'
              << "timing_mean_seconds " << r.timing.mean << '\n'
              << "timing_std_seconds " << r.timing.std << '\n'
              << "timing_count " << r.timing.count << '\n'
              << "fp_points " << r.fp_points << '\n';
    return ok;
}

int cmd_synth(const synth_options& o) {
    salad::synth_config c;
    c.pattern = salad::parse_synth_pattern(o.pattern);
    c.period = o.period;
    c.length = o.length;
    c.noise = o.noise;
    c.amplitude = o.amplitude;
    c.offset = o.offset;
    c.interval_minutes = o.interval;
    c.seed = o.seed;
    c.anomalies = salad::parse_anomaly_specs(o.anomalies);
    const auto series = salad::generate_series(c);

    const std::string labels_path = o.labels.empty() ? o.out + ".labels.json" : o.labels;
    auto out = open_output(o.out);
    salad::write_points_csv(out, series.points);
    auto labels = open_output(labels_path);
    salad::write_labels(labels, series.labels);
    std::cerr << "wrote " << series.points.size() << " points to " << o.out << " and "
              << series.labels.size() << " label windows to " << labels_path << '\n';
    return ok;
}

int cmd_gradcheck(const gradcheck_options& o) {
    if (o.hidden < 1) throw salad::config_error("--hidden must be >= 1");
    std::function<void(std::vector<double>&)> tamper;
    if (o.inject_fault) tamper = [](std::vector<double>& g) { g[g.size() / 2] += 1e-2; };
    const auto r = salad::run_gradcheck(o.seed, o.hidden, 1e-4, tamper);
    std::cout << "hidden " << o.hidden << " seed " << o.seed << " parameters " << r.total
              << " checked " << r.checked << " max_relative_error " << std::scientific
              << std::setprecision(3) << r.max_relative_error << ' '
              << (r.passed ? "PASS" : "FAIL") << '\n';
    return r.passed ? ok : runtime_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming anomaly detection with two small LSTM models"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    run_options ro;
    auto* run = app.add_subcommand("run", "Run the detector over a timestamp,value CSV");
    run->add_option("input", ro.input, "Input CSV with header 'timestamp,value'")->required();
    run->add_option("--b", ro.b, "Conversion window length (e.g. 288 for 30-min data, 42 for hourly)")
        ->required();
    run->add_option("--seed", ro.seed, "Seed for model initialisation")->capture_default_str();
    run->add_option("--mode", ro.mode, "salad | repad (look-back 3 baseline)")->capture_default_str();
    run->add_option("--alerts", ro.alerts, "Alert JSONL output ('-' for stdout)")->capture_default_str();
    run->add_option("--trace", ro.trace, "Optional per-point trace CSV");
    run->add_flag("--no-timing", ro.no_timing, "Write decision_time_seconds as null (byte-stable output)");
    run->add_flag("--stream", ro.streaming, "Process line by line, emitting each alert immediately");
    run->add_option("--hidden", ro.hidden, "Hidden units per model")->capture_default_str();
    run->add_option("--learning-rate", ro.learning_rate, "Adam learning rate")->capture_default_str();
    run->add_option("--patience", ro.patience, "Early-stopping patience (epochs)")->capture_default_str();
    run->add_option("--min-delta", ro.min_delta, "Early-stopping minimum improvement")->capture_default_str();

    eval_options eo;
    auto* eval = app.add_subcommand("eval", "Score an alert file against labelled windows");
    eval->add_option("alerts", eo.alerts, "Alert JSONL produced by 'run'")->required();
    eval->add_option("labels", eo.labels, "Label JSON {\"windows\": [{\"s\":..,\"e\":..}]}")->required();
    eval->add_option("--slack", eo.slack, "Valid detection slack X in points (6 for 30-min, 3 for hourly)")
        ->capture_default_str();

    synth_options so;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic series and its label file");
    synth->add_option("out", so.out, "Output CSV path")->required();
    synth->add_option("--labels", so.labels, "Label JSON path (default: OUT.labels.json)");
    synth->add_option("--pattern", so.pattern, "sine | double-sine | constant")->capture_default_str();
    synth->add_option("--period", so.period, "Period in points (>= 4)")->capture_default_str();
    synth->add_option("--length", so.length, "Number of points (>= 4 * period)")->capture_default_str();
    synth->add_option("--anomalies", so.anomalies,
                      "Comma list: spike@I=F, dip@I=F (multiply point I by F), "
                      "shift@I:L=D (add D*amplitude to L points)");
    synth->add_option("--noise", so.noise, "Noise sd as a fraction of amplitude")->capture_default_str();
    synth->add_option("--amplitude", so.amplitude, "Wave amplitude")->capture_default_str();
    synth->add_option("--offset", so.offset, "Constant level")->capture_default_str();
    synth->add_option("--interval", so.interval, "Minutes between timestamps")->capture_default_str();
    synth->add_option("--seed", so.seed, "Noise seed")->capture_default_str();

    gradcheck_options go;
    auto* grad = app.add_subcommand("gradcheck", "Compare BPTT gradients with finite differences");
    grad->add_option("--seed", go.seed, "Initialisation seed")->capture_default_str();
    grad->add_option("--hidden", go.hidden, "Hidden units")->capture_default_str();
    grad->add_flag("--inject-fault", go.inject_fault, "Perturb the analytic gradient (negative control)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage_error;
    }

    try {
        if (*run) return cmd_run(ro);
        if (*eval) return cmd_eval(eo);
        if (*synth) return cmd_synth(so);
        if (*grad) return cmd_gradcheck(go);
    } catch (const salad::parse_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return input_error;
    } catch (const salad::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const salad::invalid_window& e) {
        std::cerr << "error: " << e.what() << '\n';
        return input_error;
    } catch (const salad::series_too_short& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime_failure;
    }
    return runtime_failure;
}
