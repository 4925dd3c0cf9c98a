#pragma once

#include "eadkit/geometry.hpp"
#include "eadkit/physics.hpp"

#include <vector>

namespace eadkit {

struct ThrusterDesign {
    StageGeometry stage;
    int stage_count = 1;
    double interstage_factor = kPreferredInterstageFactor;  // gamma, multiple of the gap
    CoronaModel corona;

    friend bool operator==(const ThrusterDesign&, const ThrusterDesign&) = default;
};

// Structural checks only. Inter-stage factors below 1 are left to
// clearance_check, which reports them as hard violations.
void validate(const ThrusterDesign& design);

// Stage i (0-based) produces k^i of the first stage's thrust.
struct StageDegradation {
    double factor = 1.0;

    friend bool operator==(const StageDegradation&, const StageDegradation&) = default;
};

void validate(const StageDegradation& degradation);

struct StackPerformance {
    std::vector<OperatingPoint> per_stage;
    double total_thrust = 0.0;
    double total_power = 0.0;
    double total_current = 0.0;
    double efficiency = 0.0;
    double thrust_density = 0.0;
    double outlet_velocity = 0.0;
    double reynolds = 0.0;

    friend bool operator==(const StackPerformance&, const StackPerformance&) = default;
};

// sum_{i<count} k^i, summed term by term so that k = 1 gives count exactly.
double geometric_stage_sum(double factor, int count);

// Throws InfeasibleDesignError on hard clearance violations; propagates
// BreakdownError and LayoutError from the stage model.
StackPerformance stack_performance(const ThrusterDesign& design, double voltage,
                                   const StageDegradation& degradation, const FluidMedium& medium,
                                   const OnsetPenaltyCoeffs& penalty);
StackPerformance stack_performance(const ThrusterDesign& design, double voltage,
                                   const StageDegradation& degradation, const FluidMedium& medium);

// Clearance report and onset shift of a design, computed once for repeated
// evaluation over voltage. Throws InfeasibleDesignError on hard violations.
struct PreparedDesign {
    ThrusterDesign design;
    ConstraintReport report;
    double onset_shift = 0.0;  // V
};

PreparedDesign prepare_design(const ThrusterDesign& design, const OnsetPenaltyCoeffs& penalty);
StackPerformance stack_performance(const PreparedDesign& prepared, double voltage,
                                   const StageDegradation& degradation, const FluidMedium& medium);

double thrust_density(double total_thrust, double area);

double system_budget(const ThrusterDesign& design, int thruster_count, double voltage,
                     const StageDegradation& degradation, const FluidMedium& medium,
                     const OnsetPenaltyCoeffs& penalty);
double system_budget(const ThrusterDesign& design, int thruster_count, double voltage,
                     const StageDegradation& degradation, const FluidMedium& medium);

double thrust_to_weight(double total_thrust, double mass);

// N gaps plus (N - 1) inter-stage sections.
double duct_length(const ThrusterDesign& design);

}  // namespace eadkit
