#pragma once

// Exhaustive constrained search over discrete design spaces with a
// golden-section search on the drive voltage.

#include "eadkit/calibrate.hpp"
#include "eadkit/geometry.hpp"
#include "eadkit/physics.hpp"
#include "eadkit/stack.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace eadkit {

struct DesignSpace {
    std::vector<int> aspect_ratios{1};
    std::vector<int> stage_counts{1};
    std::vector<int> tip_counts{4};  // used for aspect ratio 1 only; otherwise 4 * AR
    std::vector<double> gaps{2.0e-3};
    std::vector<double> interstage_factors{kPreferredInterstageFactor};
    double voltage_min = 2400.0;
    double voltage_max = 3300.0;
    double duct_height = 6.0e-3;
    double lateral_clearance = 1.0e-3;
    double bend_depth = 1.0e-3;
    double tip_angle_deg = 5.0;
    CollectorGrid collector{};
};

void validate(const DesignSpace& space);

enum class Target { max_thrust_density, max_efficiency, max_total_thrust };

enum class Metric { min_efficiency, min_thrust_density, min_total_thrust, max_voltage, no_soft_violations };

struct Constraint {
    Metric metric = Metric::max_voltage;
    double bound = 0.0;  // ignored for no_soft_violations
};

struct Objective {
    Target target = Target::max_thrust_density;
    std::vector<Constraint> constraints;
};

// Throws DomainError when no voltage ceiling is present.
void validate(const Objective& objective);

const char* to_string(Target target);
const char* to_string(Metric metric);

struct CandidateDesign {
    std::size_t index = 0;
    int aspect_ratio = 1;
    ThrusterDesign design;
    ConstraintReport report;
    bool rejected = false;  // hard clearance violation
};

// Stage geometry for one point of the space.
StageGeometry make_space_stage(const DesignSpace& space, int aspect_ratio, int tip_count, double gap);

// Corona model for `stage` under `calib`, area-scaled when the calibration
// records a reference area.
CoronaModel corona_for(const StageGeometry& stage, const CalibrationParams& calib);

// Cartesian product in order (AR, N, n, gap, gamma). Hard-rejected designs are
// kept and marked.
std::vector<CandidateDesign> enumerate_designs(const DesignSpace& space, const CalibrationParams& calib = {});

// Inclusive grid min, min + step, ... <= max.
std::vector<double> voltage_grid(double v_min, double v_max, double step);

struct VoltageSearch {
    double v_min = 0.0;
    double v_max = 0.0;
    double step = 1.0;
};

struct Evaluation {
    bool feasible = false;
    double voltage = 0.0;
    double objective_value = 0.0;
    std::optional<StackPerformance> metrics;
    std::string binding_constraint;  // set when infeasible
};

double objective_value(Target target, const StackPerformance& metrics);

// A design is feasible at a grid voltage when it is above onset, inside the
// breakdown guard, and meets every constraint.
Evaluation evaluate(const ThrusterDesign& design, const ConstraintReport& report, const Objective& objective,
                    const CalibrationParams& calib, const FluidMedium& medium, const VoltageSearch& search);
Evaluation evaluate(const ThrusterDesign& design, const Objective& objective, const CalibrationParams& calib,
                    const FluidMedium& medium, const VoltageSearch& search);

struct OptimizeOptions {
    double voltage_step = 1.0;
    unsigned threads = 1;
};

struct OptResult {
    ThrusterDesign best_design;
    std::size_t best_index = 0;
    double best_voltage = 0.0;
    double objective_value = 0.0;
    StackPerformance metrics;
    std::size_t evaluated_count = 0;
    std::size_t feasible_count = 0;
};

// Ties go to the design that comes first in enumeration order.
// Throws EmptyFeasibleSetError listing rejections per reason.
OptResult optimize(const DesignSpace& space, const Objective& objective, const CalibrationParams& calib,
                   const FluidMedium& medium, const OptimizeOptions& options = {});

struct ParetoPoint {
    std::size_t design_index = 0;
    ThrusterDesign design;
    double voltage = 0.0;
    double thrust_density = 0.0;
    double efficiency = 0.0;
};

// Non-dominated (design, voltage) pairs over (thrust density, efficiency),
// ascending in thrust density. Sub-onset, breakdown and hard-rejected points
// are excluded.
std::vector<ParetoPoint> pareto_front(const DesignSpace& space, const CalibrationParams& calib,
                                      const FluidMedium& medium, const std::vector<double>& voltage_grid);

// Front of an arbitrary point set; exposed for reuse and testing.
std::vector<ParetoPoint> nondominated(std::vector<ParetoPoint> points);

}  // namespace eadkit
