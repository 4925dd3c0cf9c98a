#pragma once

// Deterministic least-squares calibration of the corona law, thrust
// effectiveness, stage degradation and onset-penalty slopes.

#include "eadkit/geometry.hpp"
#include "eadkit/physics.hpp"
#include "eadkit/stack.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eadkit {

struct Sample {
    double voltage = 0.0;
    double current = 0.0;
    std::optional<double> force;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct MeasuredCurve {
    std::string device_id;
    std::string trial_id;
    std::string geometry_tag;
    std::vector<Sample> samples;  // strictly increasing in voltage

    friend bool operator==(const MeasuredCurve&, const MeasuredCurve&) = default;
};

void validate(const MeasuredCurve& curve);

struct CalibrationParams {
    CoronaModel corona;
    StageDegradation degradation;
    double onset_wall_coeff = default_onset_coeffs().wall;  // V
    double onset_tip_coeff = default_onset_coeffs().tip;    // V
    std::optional<double> ion_mobility_override;
    // Inner area of the geometry `corona` was fitted on. When set, design-space
    // search scales the conductance with each candidate's inner area.
    std::optional<double> conductance_reference_area;

    OnsetPenaltyCoeffs onset_coeffs() const noexcept { return {onset_wall_coeff, onset_tip_coeff}; }
    FluidMedium apply_to(FluidMedium medium) const;

    friend bool operator==(const CalibrationParams&, const CalibrationParams&) = default;
};

void validate(const CalibrationParams& params);

// Only the parameters a given fit estimates are meaningful in `params`; the
// rest keep their defaults.
struct FitResult {
    CalibrationParams params;
    double residual_rms = 0.0;
    std::size_t sample_count = 0;
    bool converged = false;
    std::vector<std::string> warnings;

    friend bool operator==(const FitResult&, const FitResult&) = default;
};

struct IvFitOptions {
    // Absolute current threshold separating sub-onset samples. When unset it is
    // 3x the RMS current of the leading samples reading below
    // `subonset_fraction` of the peak current.
    std::optional<double> noise_floor;
    double subonset_fraction = 1.0e-3;
    int onset_grid_points = 512;
};

// Fits (C, V0) of I = C V (V - V0). The reported V0 is the onset seen in the
// data, including any geometry penalty.
FitResult fit_iv(const MeasuredCurve& curve, const IvFitOptions& options = {});
// Pooled fit over every raw sample of every curve.
FitResult fit_iv(const std::vector<MeasuredCurve>& curves, const IvFitOptions& options = {});

// Current threshold fit_iv uses to pick supra-onset samples.
double iv_noise_floor(const MeasuredCurve& curve, const IvFitOptions& options = {});

// beta = sum(F x) / sum(x^2) with x = I d / mu, clamped to (0, 1].
FitResult fit_thrust_effectiveness(const MeasuredCurve& curve, double gap, const FluidMedium& medium);
FitResult fit_thrust_effectiveness(const std::vector<MeasuredCurve>& curves, double gap, const FluidMedium& medium);

struct StageCountObservation {
    int stage_count = 0;
    double total_thrust = 0.0;
};

struct StageFactorOptions {
    double superlinear_tolerance = 1.0e-6;  // relative excess over N * T1
    double grid_step = 1.0e-3;
};

FitResult fit_stage_factor(double single_stage_thrust, const std::vector<StageCountObservation>& multi,
                           const StageFactorOptions& options = {});

struct OnsetObservation {
    StageGeometry stage;
    double measured_onset = 0.0;  // V
};

// Fits V0_meas = V0_base + k_wall * wall_deficit + k_tip * tip_deficit with
// non-negative slopes. V0_base is returned in params.corona.onset_voltage.
FitResult fit_onset_penalty(const std::vector<OnsetObservation>& observations);

struct TrialDispersion {
    std::size_t device_count = 0;
    bool sem_defined = false;  // false for a single device
    std::vector<double> current_sem;
    std::vector<std::optional<double>> force_sem;
};

struct AggregatedCurve {
    MeasuredCurve mean;
    TrialDispersion dispersion;
};

// Overall mean is the mean of each device's trial mean; SEM is taken across
// device means. Voltages must agree to within `snap_tolerance`.
AggregatedCurve aggregate_trials(const std::vector<MeasuredCurve>& curves, double snap_tolerance = 1.0);

// Synthetic sweep from the model, optionally with multiplicative Gaussian noise.
struct SynthOptions {
    std::vector<double> voltages;
    double gap = 2.0e-3;
    double relative_noise = 0.0;
    unsigned long long seed = 0;
    bool with_force = true;
};

MeasuredCurve synthesize_curve(const CoronaModel& model, const FluidMedium& medium, const SynthOptions& options);

}  // namespace eadkit
