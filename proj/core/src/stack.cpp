#include "eadkit/stack.hpp"

#include "eadkit/errors.hpp"

#include <cmath>

namespace eadkit {

void validate(const ThrusterDesign& design) {
    validate(design.stage);
    validate(design.corona);
    if (design.stage_count < 1) {
        throw DomainError("stage count must be at least 1");
    }
    if (!(design.interstage_factor > 0.0)) {
        throw DomainError("inter-stage factor must be positive");
    }
}

void validate(const StageDegradation& degradation) {
    if (!(degradation.factor > 0.0 && degradation.factor <= 1.0)) {
        throw DomainError("stage degradation factor must lie in (0, 1]");
    }
}

double geometric_stage_sum(double factor, int count) {
    double sum = 0.0;
    double term = 1.0;
    for (int i = 0; i < count; ++i) {
        sum += term;
        term *= factor;
    }
    return sum;
}

PreparedDesign prepare_design(const ThrusterDesign& design, const OnsetPenaltyCoeffs& penalty) {
    validate(design);
    PreparedDesign out;
    out.design = design;
    out.report = clearance_check(design.stage, design.interstage_factor);
    if (const Violation* hard = out.report.first_hard()) {
        throw InfeasibleDesignError(hard->rule_id, hard->message);
    }
    out.onset_shift = onset_penalty(design.stage, penalty);
    return out;
}

StackPerformance stack_performance(const PreparedDesign& prepared, double voltage,
                                   const StageDegradation& degradation, const FluidMedium& medium) {
    validate(degradation);
    const ThrusterDesign& design = prepared.design;
    const OperatingPoint first =
        stage_performance_shifted(design.stage, voltage, design.corona, medium, prepared.onset_shift);
    const double area = inner_area(design.stage);
    const double stages = geometric_stage_sum(degradation.factor, design.stage_count);

    StackPerformance out;
    out.per_stage.reserve(static_cast<std::size_t>(design.stage_count));
    double multiplier = 1.0;
    for (int i = 0; i < design.stage_count; ++i) {
        OperatingPoint op = first;
        op.thrust = first.thrust * multiplier;
        op.efficiency = op.power > 0.0 ? op.thrust / op.power : 0.0;
        out.per_stage.push_back(op);
        multiplier *= degradation.factor;
    }
    out.total_thrust = first.thrust * stages;
    out.total_power = first.power * design.stage_count;
    out.total_current = first.current * design.stage_count;
    out.efficiency = out.total_power > 0.0 ? out.total_thrust / out.total_power : 0.0;
    // Scaled from the single-stage density so that k = 1 is exactly linear in N.
    out.thrust_density = thrust_density(first.thrust, area) * stages;
    out.outlet_velocity = outlet_velocity(out.total_thrust, area, medium);
    out.reynolds = reynolds(out.outlet_velocity, design.stage.duct_inner_height, medium);
    return out;
}

StackPerformance stack_performance(const ThrusterDesign& design, double voltage,
                                   const StageDegradation& degradation, const FluidMedium& medium,
                                   const OnsetPenaltyCoeffs& penalty) {
    validate(degradation);
    return stack_performance(prepare_design(design, penalty), voltage, degradation, medium);
}

StackPerformance stack_performance(const ThrusterDesign& design, double voltage,
                                   const StageDegradation& degradation, const FluidMedium& medium) {
    return stack_performance(design, voltage, degradation, medium, default_onset_coeffs());
}

double thrust_density(double total_thrust, double area) {
    if (!(area > 0.0)) {
        throw DomainError("thrust_density: area must be positive");
    }
    return total_thrust / area;
}

double system_budget(const ThrusterDesign& design, int thruster_count, double voltage,
                     const StageDegradation& degradation, const FluidMedium& medium,
                     const OnsetPenaltyCoeffs& penalty) {
    if (thruster_count < 1) {
        throw DomainError("system_budget: need at least one thruster");
    }
    return thruster_count * stack_performance(design, voltage, degradation, medium, penalty).total_thrust;
}

double system_budget(const ThrusterDesign& design, int thruster_count, double voltage,
                     const StageDegradation& degradation, const FluidMedium& medium) {
    return system_budget(design, thruster_count, voltage, degradation, medium, default_onset_coeffs());
}

double thrust_to_weight(double total_thrust, double mass) {
    if (!(mass > 0.0)) {
        throw DomainError("thrust_to_weight: mass must be positive");
    }
    return total_thrust / (mass * kStandardGravity);
}

double duct_length(const ThrusterDesign& design) {
    const double gap = design.stage.gap;
    const int n = design.stage_count;
    return n * gap + (n - 1) * design.interstage_factor * gap;
}

}  // namespace eadkit
