#pragma once

// On-disk formats besides the point CSV:
//   labels  JSON   {"windows": [{"s": 105, "e": 293, "note": "..."}]}
//   alerts  JSONL  one object per decided point, fields in fixed order
//   trace   CSV    one row per ingested point with the internal series

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "salad/alert.hpp"
#include "salad/errors.hpp"
#include "salad/evaluation.hpp"
#include "salad/pipeline.hpp"
#include "salad/point_csv.hpp"

namespace salad {

// --- labels -------------------------------------------------------------------

inline std::vector<label_window> read_labels(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(0, std::string("label file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("windows") || !doc["windows"].is_array())
        throw parse_error(0, "label file: expected an object with a 'windows' array");
    std::vector<label_window> out;
    for (const auto& w : doc["windows"]) {
        if (!w.is_object() || !w.contains("s") || !w.contains("e") ||
            !w["s"].is_number_unsigned() || !w["e"].is_number_unsigned())
            throw parse_error(0, "label file: window " + std::to_string(out.size()) +
                                     " needs non-negative integer 's' and 'e'");
        label_window lw{w["s"].get<std::size_t>(), w["e"].get<std::size_t>(),
                        w.value("note", std::string{})};
        lw.validate();
        out.push_back(std::move(lw));
    }
    return out;
}

inline void write_labels(std::ostream& out, std::span<const label_window> windows) {
    nlohmann::ordered_json doc;
    doc["windows"] = nlohmann::ordered_json::array();
    for (const auto& w : windows) {
        nlohmann::ordered_json j;
        j["s"] = w.s;
        j["e"] = w.e;
        if (!w.note.empty()) j["note"] = w.note;
        doc["windows"].push_back(std::move(j));
    }
    out << doc.dump(2) << '\n';
}

// --- alerts -------------------------------------------------------------------

struct alert_write_options {
    bool include_timing = true;  // false writes decision_time_seconds as null
};

inline std::string alert_to_json(const anomaly_alert& a, const alert_write_options& opt = {}) {
    nlohmann::ordered_json j;
    j["t"] = a.t;
    j["timestamp"] = a.timestamp;
    j["value"] = a.raw_value;
    j["verdict"] = std::string(to_string(a.verdict.kind));
    j["aare_first"] = a.verdict.aare_first;
    j["aare_recheck"] = a.verdict.aare_recheck ? nlohmann::ordered_json(*a.verdict.aare_recheck)
                                               : nlohmann::ordered_json(nullptr);
    j["threshold"] = a.verdict.threshold;
    j["decision_time_seconds"] =
        opt.include_timing && std::isfinite(a.decision_time) ? nlohmann::ordered_json(a.decision_time)
                                                             : nlohmann::ordered_json(nullptr);
    return j.dump();
}

inline void write_alerts(std::ostream& out, std::span<const anomaly_alert> alerts,
                         const alert_write_options& opt = {}) {
    for (const auto& a : alerts) out << alert_to_json(a, opt) << '\n';
}

inline anomaly_alert alert_from_json(std::string_view line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(line_no, e.what());
    }
    try {
        anomaly_alert a;
        a.t = j.at("t").get<std::size_t>();
        a.timestamp = j.at("timestamp").get<std::string>();
        a.raw_value = j.at("value").get<double>();
        a.verdict.t = a.t;
        a.verdict.kind = parse_verdict_kind(j.at("verdict").get<std::string>());
        a.verdict.aare_first = j.at("aare_first").get<double>();
        const auto& recheck = j.at("aare_recheck");
        if (!recheck.is_null()) a.verdict.aare_recheck = recheck.get<double>();
        a.verdict.threshold = j.at("threshold").get<double>();
        const auto& dt = j.at("decision_time_seconds");
        a.decision_time = dt.is_null() ? std::nan("") : dt.get<double>();
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(line_no, e.what());
    } catch (const config_error& e) {
        throw parse_error(line_no, e.what());
    }
}

inline std::vector<anomaly_alert> read_alerts(std::istream& in) {
    std::vector<anomaly_alert> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        out.push_back(alert_from_json(line, line_no));
    }
    return out;
}

// --- trace --------------------------------------------------------------------

inline constexpr std::string_view trace_header =
    "t,timestamp,value,predicted_value,calibrated_aare,predicted_aare,detection_aare,threshold,"
    "verdict";

namespace detail {

inline void put_number(std::ostream& out, double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out << std::string_view(buf, static_cast<std::size_t>(end - buf));
}

inline void put_optional(std::ostream& out, const std::optional<double>& v) {
    out << ',';
    if (v) put_number(out, *v);
}

} // namespace detail

inline void write_trace_header(std::ostream& out) { out << trace_header << '\n'; }

inline void write_trace_row(std::ostream& out, const trace_row& r) {
    out << r.t << ',' << r.timestamp << ',';
    detail::put_number(out, r.value);
    detail::put_optional(out, r.predicted_value);
    detail::put_optional(out, r.calibrated_aare);
    detail::put_optional(out, r.predicted_aare);
    detail::put_optional(out, r.detection_aare);
    detail::put_optional(out, r.threshold);
    out << ',';
    if (r.verdict) out << to_string(*r.verdict);
    out << '\n';
}

inline void write_trace(std::ostream& out, std::span<const trace_row> rows) {
    write_trace_header(out);
    for (const auto& r : rows) write_trace_row(out, r);
}

} // namespace salad
