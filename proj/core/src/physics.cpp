#include "eadkit/physics.hpp"

#include "eadkit/errors.hpp"
#include "eadkit/format.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace eadkit {

BreakdownError::BreakdownError(double field, double limit)
    : std::runtime_error("drift field " + format_number(field) + " V/m exceeds the breakdown guard of " +
                         format_number(limit) + " V/m"),
      field_(field),
      limit_(limit) {}

InfeasibleDesignError::InfeasibleDesignError(std::string rule_id, const std::string& message)
    : std::runtime_error(rule_id + ": " + message), rule_id_(std::move(rule_id)) {}

namespace {

std::string describe(const std::map<std::string, std::size_t>& rejections) {
    std::string out = "no feasible design;";
    for (const auto& [reason, count] : rejections) {
        out += " " + reason + "=" + std::to_string(count);
    }
    return out;
}

}  // namespace

EmptyFeasibleSetError::EmptyFeasibleSetError(std::map<std::string, std::size_t> rejections)
    : std::runtime_error(describe(rejections)), rejections_(std::move(rejections)) {}

SchemaError::SchemaError(std::string source, std::size_t line, std::string field, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : ": " + field) + ": " + message),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

void validate(const FluidMedium& medium) {
    if (!(medium.ion_mobility > 0.0 && medium.permittivity > 0.0 && medium.air_density > 0.0 &&
          medium.kinematic_viscosity > 0.0 && medium.breakdown_field > 0.0)) {
        throw DomainError("fluid medium properties must all be positive");
    }
}

void validate(const CoronaModel& model) {
    if (!(model.conductance_coeff > 0.0)) {
        throw DomainError("corona conductance coefficient must be positive");
    }
    if (!(model.onset_voltage > 0.0)) {
        throw DomainError("corona onset voltage must be positive");
    }
    if (!(model.thrust_effectiveness > 0.0 && model.thrust_effectiveness <= 1.0)) {
        throw DomainError("thrust effectiveness must lie in (0, 1]");
    }
}

double drift_field(double voltage, double gap) {
    if (!(gap > 0.0)) {
        throw DomainError("drift_field: gap must be positive");
    }
    if (voltage < 0.0) {
        throw DomainError("drift_field: voltage must be non-negative");
    }
    return voltage / gap;
}

double thrust_from_current(double current, double gap, const FluidMedium& medium) {
    if (current < 0.0) {
        throw DomainError("thrust_from_current: current must be non-negative");
    }
    if (!(gap > 0.0)) {
        throw DomainError("thrust_from_current: gap must be positive");
    }
    return current * gap / medium.ion_mobility;
}

double space_charge_thrust_limit(double area, double field, const FluidMedium& medium) {
    if (!(area > 0.0)) {
        throw DomainError("space_charge_thrust_limit: area must be positive");
    }
    if (field < 0.0) {
        throw DomainError("space_charge_thrust_limit: field must be non-negative");
    }
    return 9.0 / 8.0 * medium.permittivity * area * field * field;
}

double efficiency_bound(double field, const FluidMedium& medium) {
    if (!(field > 0.0)) {
        throw DomainError("efficiency_bound: diverges for non-positive field");
    }
    return 1.0 / (medium.ion_mobility * field);
}

double corona_current(double voltage, const CoronaModel& model) {
    if (voltage < 0.0) {
        throw DomainError("corona_current: voltage must be non-negative");
    }
    if (voltage <= model.onset_voltage) {
        return 0.0;
    }
    return model.conductance_coeff * voltage * (voltage - model.onset_voltage);
}

double max_drive_voltage(double gap, const FluidMedium& medium) {
    const double limit = kBreakdownGuardFraction * medium.breakdown_field;
    double v = limit * gap;
    // Rounding can put v / gap just over the guard.
    while (v / gap > limit) {
        v = std::nextafter(v, 0.0);
    }
    return v;
}

OperatingPoint stage_performance(const StageGeometry& stage, double voltage, const CoronaModel& model,
                                 const FluidMedium& medium, const OnsetPenaltyCoeffs& penalty) {
    return stage_performance_shifted(stage, voltage, model, medium, onset_penalty(stage, penalty));
}

OperatingPoint stage_performance_shifted(const StageGeometry& stage, double voltage, const CoronaModel& model,
                                         const FluidMedium& medium, double onset_shift) {
    validate(model);
    validate(medium);
    const double field = drift_field(voltage, stage.gap);
    const double guard = kBreakdownGuardFraction * medium.breakdown_field;
    if (field > guard) {
        throw BreakdownError(field, guard);
    }

    CoronaModel adjusted = model;
    adjusted.onset_voltage += onset_shift;

    OperatingPoint op;
    op.voltage = voltage;
    op.drift_field = field;
    op.current = corona_current(voltage, adjusted);
    const double ideal = thrust_from_current(op.current, stage.gap, medium);
    op.thrust = std::min(model.thrust_effectiveness * ideal,
                         space_charge_thrust_limit(inner_area(stage), field, medium));
    op.power = voltage * op.current;
    op.efficiency = op.power > 0.0 ? op.thrust / op.power : 0.0;
    return op;
}

OperatingPoint stage_performance(const StageGeometry& stage, double voltage, const CoronaModel& model,
                                 const FluidMedium& medium) {
    return stage_performance(stage, voltage, model, medium, default_onset_coeffs());
}

double outlet_velocity(double thrust, double area, const FluidMedium& medium) {
    if (!(area > 0.0)) {
        throw DomainError("outlet_velocity: area must be positive");
    }
    if (thrust < 0.0) {
        throw DomainError("outlet_velocity: thrust must be non-negative");
    }
    return std::sqrt(thrust / (medium.air_density * area));
}

double reynolds(double velocity, double chord, const FluidMedium& medium) {
    if (!(chord > 0.0)) {
        throw DomainError("reynolds: chord must be positive");
    }
    if (velocity < 0.0) {
        throw DomainError("reynolds: velocity must be non-negative");
    }
    return velocity * chord / medium.kinematic_viscosity;
}

}  // namespace eadkit
