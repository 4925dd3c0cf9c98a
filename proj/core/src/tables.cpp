#include "eadkit/tables.hpp"

#include "eadkit/errors.hpp"
#include "eadkit/format.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <sstream>

namespace eadkit {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double require_number(const std::string& text, const std::string& source, std::size_t line,
                      const char* field) {
    double value = 0.0;
    if (!parse_number(text, value)) {
        throw SchemaError(source, line, field, "not a finite number: '" + text + "'");
    }
    return value;
}

std::string yes_no(bool b) { return b ? "1" : "0"; }

}  // namespace

std::vector<MeasuredCurve> parse_measurements(const std::string& text, const std::string& source,
                                              const std::string& geometry_tag) {
    std::vector<MeasuredCurve> curves;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty()) {
            continue;
        }
        if (!header_seen) {
            if (line != kMeasurementHeader) {
                throw SchemaError(source, line_no, "header",
                                  std::string("expected header '") + kMeasurementHeader + "'");
            }
            header_seen = true;
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 5) {
            throw SchemaError(source, line_no, "row", "expected 5 fields, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) {
            throw SchemaError(source, line_no, "device_id", "empty device id");
        }
        if (fields[1].empty()) {
            throw SchemaError(source, line_no, "trial_id", "empty trial id");
        }
        Sample s;
        s.voltage = require_number(fields[2], source, line_no, "voltage_V");
        s.current = require_number(fields[3], source, line_no, "current_A");
        if (!fields[4].empty()) {
            s.force = require_number(fields[4], source, line_no, "force_N");
        }
        if (s.voltage < 0.0) {
            throw SchemaError(source, line_no, "voltage_V", "negative voltage");
        }
        const auto key = std::make_pair(fields[0], fields[1]);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, curves.size()).first;
            MeasuredCurve c;
            c.device_id = fields[0];
            c.trial_id = fields[1];
            c.geometry_tag = geometry_tag;
            curves.push_back(std::move(c));
        }
        curves[it->second].samples.push_back(s);
    }
    for (MeasuredCurve& c : curves) {
        std::stable_sort(c.samples.begin(), c.samples.end(),
                         [](const Sample& a, const Sample& b) { return a.voltage < b.voltage; });
        for (std::size_t i = 1; i < c.samples.size(); ++i) {
            if (c.samples[i].voltage == c.samples[i - 1].voltage) {
                throw SchemaError(source, 0, "voltage_V",
                                  "duplicate voltage " + format_number(c.samples[i].voltage) + " in device " +
                                      c.device_id + " trial " + c.trial_id);
            }
        }
    }
    return curves;
}

std::string serialize_measurements(const std::vector<MeasuredCurve>& curves) {
    std::string out = std::string(kMeasurementHeader) + "\n";
    for (const MeasuredCurve& c : curves) {
        for (const Sample& s : c.samples) {
            out += c.device_id + "," + c.trial_id + "," + format_number(s.voltage) + "," + format_number(s.current) +
                   "," + (s.force ? format_number(*s.force) : "") + "\n";
        }
    }
    return out;
}

std::string sweep_table_header() {
    return "aspect_ratio,stage_count,tip_count,gap_m,interstage_factor,voltage_V,current_A,thrust_N,power_W,"
           "efficiency_N_per_W,thrust_density_N_per_m2,feasible";
}

SweepRow make_sweep_row(const ThrusterDesign& design, double voltage, const StackPerformance* perf) {
    SweepRow row;
    row.aspect_ratio = static_cast<int>(design.stage.emitter.aspect_ratio);
    row.stage_count = design.stage_count;
    row.tip_count = design.stage.emitter.tip_count;
    row.gap = design.stage.gap;
    row.interstage_factor = design.interstage_factor;
    row.voltage = voltage;
    if (perf != nullptr) {
        row.current = perf->total_current;
        row.thrust = perf->total_thrust;
        row.power = perf->total_power;
        row.efficiency = perf->efficiency;
        row.thrust_density = perf->thrust_density;
        row.feasible = true;
    }
    return row;
}

std::string serialize_sweep_table(const std::vector<SweepRow>& rows) {
    std::string out = sweep_table_header() + "\n";
    for (const SweepRow& r : rows) {
        out += std::to_string(r.aspect_ratio) + "," + std::to_string(r.stage_count) + "," +
               std::to_string(r.tip_count) + "," + format_number(r.gap) + "," + format_number(r.interstage_factor) +
               "," + format_number(r.voltage) + "," + format_number(r.current) + "," + format_number(r.thrust) + "," +
               format_number(r.power) + "," + format_number(r.efficiency) + "," + format_number(r.thrust_density) +
               "," + yes_no(r.feasible) + "\n";
    }
    return out;
}

std::string serialize_pareto(const std::vector<ParetoPoint>& front) {
    std::string out =
        "design_index,aspect_ratio,stage_count,tip_count,gap_m,interstage_factor,voltage_V,thrust_density_N_per_m2,"
        "efficiency_N_per_W\n";
    for (const ParetoPoint& p : front) {
        const ThrusterDesign& d = p.design;
        out += std::to_string(p.design_index) + "," + format_number(d.stage.emitter.aspect_ratio) + "," +
               std::to_string(d.stage_count) + "," + std::to_string(d.stage.emitter.tip_count) + "," +
               format_number(d.stage.gap) + "," + format_number(d.interstage_factor) + "," +
               format_number(p.voltage) + "," + format_number(p.thrust_density) + "," + format_number(p.efficiency) +
               "\n";
    }
    return out;
}

std::string performance_report_json(const ReportContext& ctx, const StackPerformance& perf) {
    using json = nlohmann::ordered_json;
    json j;
    j["voltage_V"] = ctx.voltage;
    if (ctx.design != nullptr) {
        const ThrusterDesign& d = *ctx.design;
        json design;
        design["aspect_ratio"] = d.stage.emitter.aspect_ratio;
        design["stage_count"] = d.stage_count;
        design["tip_count"] = d.stage.emitter.tip_count;
        design["gap_m"] = d.stage.gap;
        design["interstage_factor"] = d.interstage_factor;
        design["inner_area_m2"] = inner_area(d.stage);
        design["duct_length_m"] = duct_length(d);
        j["design"] = design;
    }
    j["total_thrust_N"] = perf.total_thrust;
    j["total_power_W"] = perf.total_power;
    j["total_current_A"] = perf.total_current;
    j["efficiency_N_per_W"] = perf.efficiency;
    j["thrust_density_N_per_m2"] = perf.thrust_density;
    j["outlet_velocity_m_per_s"] = perf.outlet_velocity;
    j["reynolds"] = perf.reynolds;
    json stages = json::array();
    for (std::size_t i = 0; i < perf.per_stage.size(); ++i) {
        const OperatingPoint& op = perf.per_stage[i];
        json s;
        s["stage"] = i + 1;
        s["thrust_N"] = op.thrust;
        s["current_A"] = op.current;
        s["power_W"] = op.power;
        s["efficiency_N_per_W"] = op.efficiency;
        s["drift_field_V_per_m"] = op.drift_field;
        stages.push_back(s);
    }
    j["per_stage"] = stages;
    json violations = json::array();
    if (ctx.report != nullptr) {
        for (const Violation& v : ctx.report->violations) {
            json e;
            e["rule_id"] = v.rule_id;
            e["severity"] = v.severity == Severity::hard ? "hard" : "soft";
            e["measured"] = v.measured;
            e["threshold"] = v.threshold;
            e["message"] = v.message;
            violations.push_back(e);
        }
    }
    j["violations"] = violations;
    return j.dump(2) + "\n";
}

}  // namespace eadkit
