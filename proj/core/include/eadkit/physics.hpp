#pragma once

// One-dimensional EHD relations, the corona I-V law and single-stage
// performance prediction. Everything here is a pure function.

#include "eadkit/geometry.hpp"

namespace eadkit {

inline constexpr double kVacuumPermittivity = 8.854e-12;  // F/m
inline constexpr double kStandardGravity = 9.80665;       // m/s^2

// Stages reject drive fields above this fraction of the breakdown field.
inline constexpr double kBreakdownGuardFraction = 0.9;

struct FluidMedium {
    double ion_mobility = 2.0e-4;  // m^2/(V s), positive air ions at STP
    double permittivity = kVacuumPermittivity;
    double air_density = 1.225;            // kg/m^3
    double kinematic_viscosity = 1.48e-5;  // m^2/s, air at 20 C
    double breakdown_field = 3.0e6;        // V/m

    friend bool operator==(const FluidMedium&, const FluidMedium&) = default;
};

void validate(const FluidMedium& medium);

struct OperatingPoint {
    double voltage = 0.0;      // V
    double current = 0.0;      // A
    double thrust = 0.0;       // N
    double power = 0.0;        // W
    double efficiency = 0.0;   // N/W
    double drift_field = 0.0;  // V/m

    friend bool operator==(const OperatingPoint&, const OperatingPoint&) = default;
};

// I = C V (V - V0) above onset, zero below.
struct CoronaModel {
    double conductance_coeff = 1.0e-11;  // C, A/V^2
    double onset_voltage = 2400.0;       // V0, V
    double thrust_effectiveness = 1.0;   // beta in (0, 1]

    friend bool operator==(const CoronaModel&, const CoronaModel&) = default;
};

void validate(const CoronaModel& model);

double drift_field(double voltage, double gap);
double thrust_from_current(double current, double gap, const FluidMedium& medium);

// (9/8) eps0 A E^2
double space_charge_thrust_limit(double area, double field, const FluidMedium& medium);

// Upper bound on thrust per unit power, 1 / (mu E).
double efficiency_bound(double field, const FluidMedium& medium);

double corona_current(double voltage, const CoronaModel& model);

// Onset is shifted by onset_penalty(stage, penalty); thrust is beta * Id/mu,
// clamped to the space-charge limit over the stage's inner area.
// Throws BreakdownError above the breakdown guard and LayoutError when the
// tips cannot be placed.
OperatingPoint stage_performance(const StageGeometry& stage, double voltage, const CoronaModel& model,
                                 const FluidMedium& medium, const OnsetPenaltyCoeffs& penalty);
OperatingPoint stage_performance(const StageGeometry& stage, double voltage, const CoronaModel& model,
                                 const FluidMedium& medium);

// Same model with the onset shift (V) already evaluated for the stage.
OperatingPoint stage_performance_shifted(const StageGeometry& stage, double voltage, const CoronaModel& model,
                                         const FluidMedium& medium, double onset_shift);

// Largest voltage the breakdown guard admits for a given gap.
double max_drive_voltage(double gap, const FluidMedium& medium);

// Actuator-disk estimate sqrt(F / (rho A)).
double outlet_velocity(double thrust, double area, const FluidMedium& medium);

double reynolds(double velocity, double chord, const FluidMedium& medium);

}  // namespace eadkit
