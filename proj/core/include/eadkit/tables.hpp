#pragma once

// CSV formats: measurement sweeps in, sweep tables / Pareto fronts / reports
// out. Comma separated, "." decimal point, shortest round-trip numbers.

#include "eadkit/calibrate.hpp"
#include "eadkit/geometry.hpp"
#include "eadkit/optimize.hpp"
#include "eadkit/stack.hpp"

#include <string>
#include <vector>

namespace eadkit {

inline constexpr const char* kMeasurementHeader = "device_id,trial_id,voltage_V,current_A,force_N";

// One MeasuredCurve per (device_id, trial_id), in order of first appearance,
// samples sorted by voltage. An empty or header-only file yields no curves.
std::vector<MeasuredCurve> parse_measurements(const std::string& text, const std::string& source,
                                              const std::string& geometry_tag);
std::string serialize_measurements(const std::vector<MeasuredCurve>& curves);

struct SweepRow {
    int aspect_ratio = 1;
    int stage_count = 1;
    int tip_count = 1;
    double gap = 0.0;
    double interstage_factor = 0.0;
    double voltage = 0.0;
    double current = 0.0;  // summed over stages
    double thrust = 0.0;
    double power = 0.0;
    double efficiency = 0.0;
    double thrust_density = 0.0;
    bool feasible = false;
};

std::string sweep_table_header();
SweepRow make_sweep_row(const ThrusterDesign& design, double voltage, const StackPerformance* perf);
std::string serialize_sweep_table(const std::vector<SweepRow>& rows);

std::string serialize_pareto(const std::vector<ParetoPoint>& front);

struct ReportContext {
    const ThrusterDesign* design = nullptr;
    const ConstraintReport* report = nullptr;
    double voltage = 0.0;
};

// JSON report of one stack evaluation.
std::string performance_report_json(const ReportContext& ctx, const StackPerformance& perf);

}  // namespace eadkit
