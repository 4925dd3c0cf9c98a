#include "eadkit/calibrate.hpp"

#include "eadkit/errors.hpp"
#include "eadkit/scalar_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

namespace eadkit {

namespace {

constexpr double kMinEffectiveness = 1.0e-12;

struct LinearFit {
    double intercept = 0.0;
    std::vector<double> slopes;
    double sse = 0.0;
};

}  // namespace

FluidMedium CalibrationParams::apply_to(FluidMedium medium) const {
    if (ion_mobility_override) {
        medium.ion_mobility = *ion_mobility_override;
    }
    return medium;
}

void validate(const CalibrationParams& params) {
    validate(params.corona);
    validate(params.degradation);
    if (params.onset_wall_coeff < 0.0 || params.onset_tip_coeff < 0.0) {
        throw DomainError("onset penalty slopes must be non-negative");
    }
    if (params.ion_mobility_override && !(*params.ion_mobility_override > 0.0)) {
        throw DomainError("ion mobility override must be positive");
    }
    if (params.conductance_reference_area && !(*params.conductance_reference_area > 0.0)) {
        throw DomainError("conductance reference area must be positive");
    }
}

void validate(const MeasuredCurve& curve) {
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
        const Sample& s = curve.samples[i];
        if (!std::isfinite(s.voltage) || !std::isfinite(s.current)) {
            throw DomainError("measured curve has a non-finite sample");
        }
        if (s.current < 0.0 || (s.force && *s.force < 0.0)) {
            throw DomainError("measured current and force must be non-negative");
        }
        if (i > 0 && !(s.voltage > curve.samples[i - 1].voltage)) {
            throw DomainError("measured samples must be strictly increasing in voltage");
        }
    }
}

namespace {

std::vector<Sample> pooled_samples(const std::vector<MeasuredCurve>& curves) {
    if (curves.empty()) {
        throw InsufficientDataError("no curves to pool");
    }
    std::vector<Sample> out;
    for (const MeasuredCurve& c : curves) {
        validate(c);
        out.insert(out.end(), c.samples.begin(), c.samples.end());
    }
    std::stable_sort(out.begin(), out.end(), [](const Sample& a, const Sample& b) { return a.voltage < b.voltage; });
    return out;
}

double noise_floor_of(const std::vector<Sample>& samples, const IvFitOptions& options) {
    if (options.noise_floor) {
        return *options.noise_floor;
    }
    double peak = 0.0;
    for (const Sample& s : samples) {
        peak = std::max(peak, s.current);
    }
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (const Sample& s : samples) {
        if (s.current > options.subonset_fraction * peak) {
            break;
        }
        sum_sq += s.current * s.current;
        ++count;
    }
    return count == 0 ? 0.0 : 3.0 * std::sqrt(sum_sq / static_cast<double>(count));
}

FitResult fit_iv_samples(const std::vector<Sample>& samples, const IvFitOptions& options) {
    const bool any_current =
        std::any_of(samples.begin(), samples.end(), [](const Sample& s) { return s.current > 0.0; });
    if (!any_current) {
        throw NoDischargeError("fit_iv: every sample reads zero current");
    }

    const double floor = noise_floor_of(samples, options);
    std::vector<double> volts;
    std::vector<double> amps;
    for (const Sample& s : samples) {
        if (s.current > floor) {
            volts.push_back(s.voltage);
            amps.push_back(s.current);
        }
    }
    if (volts.size() < 3) {
        throw InsufficientDataError("fit_iv: need at least 3 supra-onset samples, have " +
                                    std::to_string(volts.size()));
    }
    const double first_on = volts.front();

    auto profile = [&](double onset, double* conductance) {
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t i = 0; i < volts.size(); ++i) {
            const double x = volts[i] * (volts[i] - onset);
            sxy += amps[i] * x;
            sxx += x * x;
        }
        const double c = sxx > 0.0 ? sxy / sxx : 0.0;
        double sse = 0.0;
        for (std::size_t i = 0; i < volts.size(); ++i) {
            const double r = amps[i] - c * volts[i] * (volts[i] - onset);
            sse += r * r;
        }
        if (conductance != nullptr) {
            *conductance = c;
        }
        return sse;
    };

    const int grid = std::max(options.onset_grid_points, 8);
    int best = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid; ++j) {
        const double sse = profile(first_on * j / grid, nullptr);
        if (sse < best_sse) {
            best_sse = sse;
            best = j;
        }
    }
    const double lo = first_on * std::max(best - 1, 0) / grid;
    const double hi = first_on * (best + 1) / grid;
    const ScalarMinimum refined =
        golden_section_minimize([&](double v0) { return profile(v0, nullptr); }, lo, hi, 1.0e-13 * first_on, 400);

    double onset = refined.x;
    double sse = refined.value;
    if (best_sse < sse) {
        onset = first_on * best / grid;
        sse = best_sse;
    }
    double conductance = 0.0;
    profile(onset, &conductance);

    FitResult out;
    out.params.corona.conductance_coeff = conductance;
    out.params.corona.onset_voltage = onset;
    out.sample_count = volts.size();
    out.residual_rms = std::sqrt(sse / static_cast<double>(volts.size()));
    out.converged = std::isfinite(out.residual_rms) && conductance > 0.0 && onset > 0.0;
    if (!(onset > 0.0)) {
        out.warnings.push_back("fitted onset voltage is at the lower bound of the search");
    }
    return out;
}

FitResult fit_beta_samples(const std::vector<Sample>& samples, double gap, const FluidMedium& medium) {
    validate(medium);
    double sxy = 0.0;
    double sxx = 0.0;
    std::vector<std::pair<double, double>> pairs;
    for (const Sample& s : samples) {
        if (s.current > 0.0 && s.force) {
            const double ideal = thrust_from_current(s.current, gap, medium);
            pairs.emplace_back(ideal, *s.force);
            sxy += ideal * *s.force;
            sxx += ideal * ideal;
        }
    }
    if (pairs.empty()) {
        throw InsufficientDataError("fit_thrust_effectiveness: no samples with both current and force");
    }

    FitResult out;
    double beta = sxy / sxx;
    out.converged = true;
    if (beta > 1.0) {
        out.warnings.push_back("measured thrust exceeds Id/mu; effectiveness clamped to 1");
        beta = 1.0;
    } else if (!(beta > 0.0)) {
        out.warnings.push_back("no positive thrust response; effectiveness clamped to its floor");
        beta = kMinEffectiveness;
        out.converged = false;
    }
    double sse = 0.0;
    for (const auto& [ideal, force] : pairs) {
        const double r = force - beta * ideal;
        sse += r * r;
    }
    out.params.corona.thrust_effectiveness = beta;
    out.sample_count = pairs.size();
    out.residual_rms = std::sqrt(sse / static_cast<double>(pairs.size()));
    return out;
}

}  // namespace

double iv_noise_floor(const MeasuredCurve& curve, const IvFitOptions& options) {
    return noise_floor_of(curve.samples, options);
}

FitResult fit_iv(const MeasuredCurve& curve, const IvFitOptions& options) {
    validate(curve);
    return fit_iv_samples(curve.samples, options);
}

FitResult fit_iv(const std::vector<MeasuredCurve>& curves, const IvFitOptions& options) {
    return fit_iv_samples(pooled_samples(curves), options);
}

FitResult fit_thrust_effectiveness(const MeasuredCurve& curve, double gap, const FluidMedium& medium) {
    validate(curve);
    return fit_beta_samples(curve.samples, gap, medium);
}

FitResult fit_thrust_effectiveness(const std::vector<MeasuredCurve>& curves, double gap, const FluidMedium& medium) {
    return fit_beta_samples(pooled_samples(curves), gap, medium);
}

FitResult fit_stage_factor(double single_stage_thrust, const std::vector<StageCountObservation>& multi,
                           const StageFactorOptions& options) {
    if (!(single_stage_thrust > 0.0)) {
        throw DomainError("fit_stage_factor: single-stage thrust must be positive");
    }
    const bool has_multi = std::any_of(multi.begin(), multi.end(),
                                       [](const StageCountObservation& o) { return o.stage_count >= 2; });
    if (!has_multi) {
        throw InsufficientDataError("fit_stage_factor: need an observation with at least two stages");
    }
    for (const StageCountObservation& o : multi) {
        if (o.stage_count < 1 || o.total_thrust < 0.0 || !std::isfinite(o.total_thrust)) {
            throw DomainError("fit_stage_factor: invalid stage-count observation");
        }
    }

    auto sse = [&](double k) {
        double total = 0.0;
        for (const StageCountObservation& o : multi) {
            const double r = o.total_thrust - single_stage_thrust * geometric_stage_sum(k, o.stage_count);
            total += r * r;
        }
        return total;
    };

    FitResult out;
    out.sample_count = multi.size();
    out.converged = true;
    for (const StageCountObservation& o : multi) {
        if (o.total_thrust > o.stage_count * single_stage_thrust * (1.0 + options.superlinear_tolerance)) {
            out.warnings.push_back("superlinear data: " + std::to_string(o.stage_count) +
                                   "-stage thrust exceeds N x single-stage thrust; using k = 1");
            out.params.degradation.factor = 1.0;
            out.residual_rms = std::sqrt(sse(1.0) / static_cast<double>(multi.size()));
            return out;
        }
    }

    const int steps = static_cast<int>(std::lround(1.0 / options.grid_step));
    int best = steps;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= steps; ++i) {
        const double value = sse(static_cast<double>(i) / steps);
        if (value < best_sse) {
            best_sse = value;
            best = i;
        }
    }
    const double lo = std::max(static_cast<double>(best - 1) / steps, 0.5 / steps);
    const double hi = std::min(static_cast<double>(best + 1) / steps, 1.0);
    const ScalarMinimum refined = brent_minimize(sse, lo, hi, 1.0e-12);

    double k = static_cast<double>(best) / steps;
    double k_sse = best_sse;
    if (refined.value < k_sse) {
        k = refined.x;
        k_sse = refined.value;
    }
    if (sse(1.0) <= k_sse) {
        k = 1.0;
        k_sse = sse(1.0);
    }
    out.params.degradation.factor = k;
    out.residual_rms = std::sqrt(k_sse / static_cast<double>(multi.size()));
    return out;
}

namespace {

// Least squares with an intercept over the selected deficit columns.
// Returns false when the centred normal matrix is singular.
bool solve_with_intercept(const std::vector<std::vector<double>>& columns, const std::vector<double>& y,
                          const std::vector<int>& active, LinearFit& fit) {
    const std::size_t n = y.size();
    double y_mean = 0.0;
    for (double v : y) {
        y_mean += v;
    }
    y_mean /= static_cast<double>(n);

    std::vector<double> means;
    for (int c : active) {
        double m = 0.0;
        for (double v : columns[static_cast<std::size_t>(c)]) {
            m += v;
        }
        means.push_back(m / static_cast<double>(n));
    }
    const std::size_t k = active.size();
    std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
    std::vector<double> b(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double xp = columns[static_cast<std::size_t>(active[p])][i] - means[p];
            b[p] += xp * (y[i] - y_mean);
            for (std::size_t q = 0; q < k; ++q) {
                a[p][q] += xp * (columns[static_cast<std::size_t>(active[q])][i] - means[q]);
            }
        }
    }

    fit.slopes.assign(k, 0.0);
    if (k == 1) {
        if (!(a[0][0] > 0.0)) {
            return false;
        }
        fit.slopes[0] = b[0] / a[0][0];
    } else if (k == 2) {
        const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if (!(std::abs(det) > 1.0e-12 * a[0][0] * a[1][1])) {
            return false;
        }
        fit.slopes[0] = (b[0] * a[1][1] - b[1] * a[0][1]) / det;
        fit.slopes[1] = (a[0][0] * b[1] - a[1][0] * b[0]) / det;
    }
    fit.intercept = y_mean;
    for (std::size_t p = 0; p < k; ++p) {
        fit.intercept -= fit.slopes[p] * means[p];
    }
    fit.sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = fit.intercept;
        for (std::size_t p = 0; p < k; ++p) {
            pred += fit.slopes[p] * columns[static_cast<std::size_t>(active[p])][i];
        }
        fit.sse += (y[i] - pred) * (y[i] - pred);
    }
    return true;
}

}  // namespace

FitResult fit_onset_penalty(const std::vector<OnsetObservation>& observations) {
    if (observations.size() < 2) {
        throw InsufficientDataError("fit_onset_penalty: need at least two observations");
    }
    const bool same_geometry = std::all_of(observations.begin(), observations.end(), [&](const OnsetObservation& o) {
        return o.stage == observations.front().stage;
    });
    if (same_geometry) {
        throw UnidentifiableError(
            "fit_onset_penalty: every observation uses the same geometry; add a geometry with different clearances");
    }

    std::vector<std::vector<double>> columns(2);
    std::vector<double> y;
    for (const OnsetObservation& o : observations) {
        const ClearanceDeficits d = clearance_deficits(o.stage);
        columns[0].push_back(d.wall);
        columns[1].push_back(d.tip);
        y.push_back(o.measured_onset);
    }

    const char* names[2] = {"wall clearance", "tip spacing"};
    std::vector<int> active;
    for (int c = 0; c < 2; ++c) {
        const auto& col = columns[static_cast<std::size_t>(c)];
        const bool violated = std::any_of(col.begin(), col.end(), [](double v) { return v > 0.0; });
        if (!violated) {
            continue;
        }
        const bool varies = std::any_of(col.begin(), col.end(), [&](double v) { return v != col.front(); });
        if (!varies) {
            throw UnidentifiableError(std::string("fit_onset_penalty: every observation violates the ") + names[c] +
                                      " rule by the same amount; add an observation that satisfies it");
        }
        active.push_back(c);
    }

    LinearFit full;
    if (!solve_with_intercept(columns, y, active, full)) {
        throw UnidentifiableError(
            "fit_onset_penalty: wall and tip deficits vary together; add an observation that violates only one rule");
    }

    // Non-negative slopes: best feasible fit over subsets of the active columns.
    LinearFit chosen;
    std::vector<int> chosen_cols;
    bool found = false;
    const std::size_t subsets = std::size_t{1} << active.size();
    for (std::size_t mask = subsets; mask-- > 0;) {
        std::vector<int> cols;
        for (std::size_t p = 0; p < active.size(); ++p) {
            if (mask & (std::size_t{1} << p)) {
                cols.push_back(active[p]);
            }
        }
        LinearFit fit;
        if (!solve_with_intercept(columns, y, cols, fit)) {
            continue;
        }
        if (std::any_of(fit.slopes.begin(), fit.slopes.end(), [](double s) { return s < 0.0; })) {
            continue;
        }
        if (!found || fit.sse < chosen.sse) {
            chosen = fit;
            chosen_cols = cols;
            found = true;
        }
    }

    FitResult out;
    out.params.onset_wall_coeff = 0.0;
    out.params.onset_tip_coeff = 0.0;
    for (std::size_t p = 0; p < chosen_cols.size(); ++p) {
        if (chosen_cols[p] == 0) {
            out.params.onset_wall_coeff = chosen.slopes[p];
        } else {
            out.params.onset_tip_coeff = chosen.slopes[p];
        }
    }
    out.params.corona.onset_voltage = chosen.intercept;
    out.sample_count = observations.size();
    out.residual_rms = std::sqrt(chosen.sse / static_cast<double>(observations.size()));
    out.converged = chosen.intercept > 0.0;
    if (!(chosen.intercept > 0.0)) {
        out.warnings.push_back("fitted base onset voltage is not positive");
    }
    if (chosen_cols.size() < active.size()) {
        out.warnings.push_back("a slope was held at zero to keep the penalty non-negative");
    }
    return out;
}

AggregatedCurve aggregate_trials(const std::vector<MeasuredCurve>& curves, double snap_tolerance) {
    if (curves.empty()) {
        throw InsufficientDataError("aggregate_trials: no curves");
    }
    const MeasuredCurve& ref = curves.front();
    for (const MeasuredCurve& c : curves) {
        validate(c);
        if (c.geometry_tag != ref.geometry_tag) {
            throw MismatchError("aggregate_trials: mixed geometry tags '" + ref.geometry_tag + "' and '" +
                                c.geometry_tag + "'");
        }
        if (c.samples.size() != ref.samples.size()) {
            throw MismatchError("aggregate_trials: curves have different sample counts");
        }
        for (std::size_t i = 0; i < c.samples.size(); ++i) {
            if (std::abs(c.samples[i].voltage - ref.samples[i].voltage) > snap_tolerance) {
                throw MismatchError("aggregate_trials: voltage grids differ beyond the snap tolerance");
            }
        }
    }

    std::vector<std::pair<std::string, std::vector<const MeasuredCurve*>>> devices;
    for (const MeasuredCurve& c : curves) {
        auto it = std::find_if(devices.begin(), devices.end(), [&](const auto& d) { return d.first == c.device_id; });
        if (it == devices.end()) {
            devices.push_back({c.device_id, {&c}});
        } else {
            it->second.push_back(&c);
        }
    }

    const std::size_t samples = ref.samples.size();
    const std::size_t n_dev = devices.size();
    std::vector<std::vector<double>> device_current(n_dev, std::vector<double>(samples, 0.0));
    std::vector<std::vector<std::optional<double>>> device_force(n_dev, std::vector<std::optional<double>>(samples));
    for (std::size_t d = 0; d < n_dev; ++d) {
        const auto& trials = devices[d].second;
        for (std::size_t i = 0; i < samples; ++i) {
            double current = 0.0;
            double force = 0.0;
            bool all_force = true;
            for (const MeasuredCurve* t : trials) {
                current += t->samples[i].current;
                if (t->samples[i].force) {
                    force += *t->samples[i].force;
                } else {
                    all_force = false;
                }
            }
            const double count = static_cast<double>(trials.size());
            device_current[d][i] = current / count;
            if (all_force) {
                device_force[d][i] = force / count;
            }
        }
    }

    auto mean_and_sem = [&](const std::vector<double>& values) {
        double mean = 0.0;
        for (double v : values) {
            mean += v;
        }
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) {
            ss += (v - mean) * (v - mean);
        }
        const double n = static_cast<double>(values.size());
        const double sem = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
        return std::pair{mean, sem};
    };

    AggregatedCurve out;
    out.mean.device_id = "mean";
    out.mean.trial_id = "mean";
    out.mean.geometry_tag = ref.geometry_tag;
    out.dispersion.device_count = n_dev;
    out.dispersion.sem_defined = n_dev > 1;
    for (std::size_t i = 0; i < samples; ++i) {
        std::vector<double> currents;
        std::vector<double> forces;
        for (std::size_t d = 0; d < n_dev; ++d) {
            currents.push_back(device_current[d][i]);
            if (device_force[d][i]) {
                forces.push_back(*device_force[d][i]);
            }
        }
        Sample s;
        s.voltage = ref.samples[i].voltage;
        const auto [current_mean, current_sem] = mean_and_sem(currents);
        s.current = current_mean;
        std::optional<double> force_sem;
        if (forces.size() == n_dev) {
            const auto [force_mean, sem] = mean_and_sem(forces);
            s.force = force_mean;
            force_sem = sem;
        }
        out.mean.samples.push_back(s);
        if (out.dispersion.sem_defined) {
            out.dispersion.current_sem.push_back(current_sem);
            out.dispersion.force_sem.push_back(force_sem);
        }
    }
    return out;
}

MeasuredCurve synthesize_curve(const CoronaModel& model, const FluidMedium& medium, const SynthOptions& options) {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    MeasuredCurve curve;
    curve.device_id = "synthetic";
    curve.trial_id = "0";
    for (double v : options.voltages) {
        Sample s;
        s.voltage = v;
        const double current = corona_current(v, model);
        s.current = current;
        if (options.relative_noise > 0.0) {
            s.current = std::max(0.0, current * (1.0 + options.relative_noise * noise(rng)));
        }
        if (options.with_force) {
            double force = model.thrust_effectiveness * thrust_from_current(current, options.gap, medium);
            if (options.relative_noise > 0.0) {
                force = std::max(0.0, force * (1.0 + options.relative_noise * noise(rng)));
            }
            s.force = force;
        }
        curve.samples.push_back(s);
    }
    return curve;
}

}  // namespace eadkit
