// Acceptance gate: one PASS/FAIL line per criterion. Tolerances are pinned
// here and nowhere else.

#include "eadkit/calibrate.hpp"
#include "eadkit/design_file.hpp"
#include "eadkit/errors.hpp"
#include "eadkit/geometry.hpp"
#include "eadkit/optimize.hpp"
#include "eadkit/physics.hpp"
#include "eadkit/stack.hpp"
#include "eadkit/svg.hpp"
#include "eadkit/tables.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace eadkit;

namespace {

constexpr double kMm = 1.0e-3;
constexpr double kMm2 = 1.0e-6;

// Pinned tolerances.
constexpr double kAreaTolMm2 = 0.01;
constexpr double kWarburgLoMm = 1.59, kWarburgHiMm = 1.63;
constexpr double kClearanceTolMm = 0.01;
constexpr double kHeadlineRelTol = 0.005;
constexpr double kBudgetLoMn = 21.5, kBudgetHiMn = 22.5;
constexpr double kBoundRelTol = 0.01;
constexpr double kReLo = 1000.0, kReHi = 4000.0;
constexpr double kNoiselessTol = 1.0e-3;
constexpr double kNoisyTol = 0.05;
constexpr double kNoise = 0.02;
constexpr double kFitSeconds = 1.0;
constexpr double kOracleSeconds = 10.0;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("%s %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    if (!ok) {
        ++failures;
    }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StageGeometry stage_ar(int ar) {
    StageParams p;
    p.aspect_ratio = ar;
    return make_stage(p);
}

DesignFile load(const std::string& name) { return load_design_file(std::string(EADKIT_DATA_DIR) + "/" + name); }

void stadium_areas() {
    const double a5 = inner_area(stage_ar(5)) / kMm2;
    const double a9 = inner_area(stage_ar(9)) / kMm2;
    const bool ok = std::abs(a5 - 172.27) <= kAreaTolMm2 && std::abs(a9 - 316.27) <= kAreaTolMm2;
    report(1, "stadium areas", ok, fmt("AR5 %.4f mm2, AR9 %.4f mm2", a5, a9));
}

void warburg() {
    const double r = warburg_radius(2.0 * kMm) / kMm;
    report(2, "warburg radius", r >= kWarburgLoMm && r <= kWarburgHiMm, fmt("r(2 mm) = %.4f mm", r));
}

void chords() {
    const double c3 = chord_spacing(4.0 * kMm, 3) / kMm;
    const double c5 = chord_spacing(4.0 * kMm, 5) / kMm;
    const bool ok = c3 >= 3.4 && c3 <= 3.5 && c5 >= 2.3 && c5 <= 2.4;
    report(3, "chord spacing", ok, fmt("n=3 %.4f mm, n=5 %.4f mm", c3, c5));
}

void clearances() {
    const double lateral[] = {2.0, 1.0, 0.75};
    const double expected[] = {2.23, 1.41, 1.25};
    bool ok = true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        const double c = tip_to_lip_clearance(lateral[i] * kMm, 1.0 * kMm) / kMm;
        ok = ok && std::abs(c - expected[i]) <= kClearanceTolMm;
        detail += fmt("%.4f ", c);
    }
    report(4, "tip-to-lip clearance", ok, detail + "mm");
}

void headline() {
    const double density = thrust_density(3.09e-3, 172.27 * kMm2);
    const bool identity = std::abs(density / 17.93 - 1.0) <= kHeadlineRelTol;

    // Four AR-9 thrusters at the voltage where the model gives 17.58 N/m^2.
    const DesignFile f = load("ar9_five_stage.json");
    const FluidMedium air = f.effective_medium();
    const PreparedDesign prepared = prepare_design(f.design, f.onset_coeffs());
    auto density_at = [&](double v) { return stack_performance(prepared, v, f.degradation(), air).thrust_density; };
    double lo = 2500.0, hi = max_drive_voltage(f.design.stage.gap, air);
    for (int i = 0; i < 200 && density_at(lo) < 17.58 && density_at(hi) >= 17.58; ++i) {
        const double mid = 0.5 * (lo + hi);
        (density_at(mid) < 17.58 ? lo : hi) = mid;
    }
    const double v = 0.5 * (lo + hi);
    const double model_budget = system_budget(f.design, 4, v, f.degradation(), air, f.onset_coeffs()) * 1e3;
    const double identity_budget = 4.0 * 17.58 * inner_area(f.design.stage) * 1e3;
    const bool budget = identity_budget >= kBudgetLoMn && identity_budget <= kBudgetHiMn &&
                        model_budget >= kBudgetLoMn && model_budget <= kBudgetHiMn;
    report(5, "headline density, budget", identity && budget,
           fmt("%.3f N/m2; 4x budget %.2f mN (model %.2f mN at %.0f V)", density, identity_budget, model_budget, v));
}

void bounds() {
    FluidMedium air;
    air.ion_mobility = 2.0e-4;
    const double e = 3280.0 / (2.0 * kMm);
    const double eta = efficiency_bound(e, air) * 1e3;
    const double limit = space_charge_thrust_limit(172.27 * kMm2, e, air) * 1e3;
    const bool ok = std::abs(eta / 3.05 - 1.0) <= kBoundRelTol && eta > 1.86 &&
                    std::abs(limit / 4.6 - 1.0) <= kBoundRelTol && limit > 3.09 / 5.0;
    report(6, "physical bounds", ok, fmt("eta_max %.4f mN/W, T_sc %.4f mN", eta, limit));
}

void reynolds_order() {
    const DesignFile f = load("ar5_five_stage.json");
    const StackPerformance p =
        stack_performance(f.design, 3280.0, f.degradation(), f.effective_medium(), f.onset_coeffs());
    const double re = reynolds(p.outlet_velocity, 6.0 * kMm, f.effective_medium());
    report(7, "reynolds order", re >= kReLo && re <= kReHi, fmt("u %.3f m/s, Re %.0f", p.outlet_velocity, re));
}

struct RoundTrip {
    double max_dev = 0.0;
    double slowest_fit = 0.0;
};

// Synthesize stack sweeps for N = 1..5 from known (C, V0, beta, k), fit every
// coefficient back, regenerate and compare with the noise-free curves.
RoundTrip calibration_round_trip(double noise, unsigned long long seed) {
    const CoronaModel truth{3.4554e-11, 2386.23, 0.8225};
    const double k_truth = 0.85;
    const double gap = 2.0 * kMm;
    const FluidMedium air;
    SynthOptions o;
    for (double v = 2450.0; v <= 3300.0; v += 50.0) {
        o.voltages.push_back(v);
    }
    o.gap = gap;
    o.relative_noise = noise;
    o.seed = seed;
    RoundTrip out;

    const MeasuredCurve single = synthesize_curve(truth, air, o);
    auto t0 = std::chrono::steady_clock::now();
    const FitResult iv = fit_iv(single);
    out.slowest_fit = std::max(out.slowest_fit, seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    const FitResult beta = fit_thrust_effectiveness(single, gap, air);
    out.slowest_fit = std::max(out.slowest_fit, seconds_since(t0));

    const double v_ref = o.voltages.back();
    const double t1 = *single.samples.back().force;
    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    std::normal_distribution<double> gauss(0.0, noise);
    const double t1_true = thrust_from_current(corona_current(v_ref, truth), gap, air) * truth.thrust_effectiveness;
    std::vector<StageCountObservation> multi;
    for (int n = 2; n <= 5; ++n) {
        multi.push_back({n, t1_true * geometric_stage_sum(k_truth, n) * (1.0 + gauss(rng))});
    }
    t0 = std::chrono::steady_clock::now();
    const FitResult kfit = fit_stage_factor(t1, multi);
    out.slowest_fit = std::max(out.slowest_fit, seconds_since(t0));

    CoronaModel fitted = iv.params.corona;
    fitted.thrust_effectiveness = beta.params.corona.thrust_effectiveness;
    const double k_fit = kfit.params.degradation.factor;
    for (int n = 1; n <= 5; ++n) {
        auto current = [&](const CoronaModel& m, double v) { return n * corona_current(v, m); };
        auto force = [&](const CoronaModel& m, double k, double v) {
            return geometric_stage_sum(k, n) * m.thrust_effectiveness *
                   thrust_from_current(corona_current(v, m), gap, air);
        };
        const double i_peak = current(truth, v_ref);
        const double f_peak = force(truth, k_truth, v_ref);
        for (double v : o.voltages) {
            out.max_dev = std::max(out.max_dev, std::abs(current(fitted, v) - current(truth, v)) / i_peak);
            out.max_dev = std::max(out.max_dev, std::abs(force(fitted, k_fit, v) - force(truth, k_truth, v)) / f_peak);
        }
    }
    return out;
}

void calibration() {
    const RoundTrip clean = calibration_round_trip(0.0, 1);
    const RoundTrip noisy = calibration_round_trip(kNoise, 20240611);
    const bool ok = clean.max_dev <= kNoiselessTol && noisy.max_dev <= kNoisyTol &&
                    std::max(clean.slowest_fit, noisy.slowest_fit) < kFitSeconds;
    report(8, "calibration round trips", ok,
           fmt("noiseless %.2e, 2%% noise %.4f of peak; slowest fit %.4f s", clean.max_dev, noisy.max_dev,
               std::max(clean.slowest_fit, noisy.slowest_fit)));
}

void oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(424242);
    const CalibrationParams calib = oracle::reference_calibration();
    const FluidMedium air;
    int spaces = 0, mismatches = 0, fronts = 0;
    for (int trial = 0; trial < 12; ++trial) {
        DesignSpace s = oracle::random_space(rng, 100);
        for (Target t : {Target::max_thrust_density, Target::max_efficiency, Target::max_total_thrust}) {
            Objective o;
            o.target = t;
            o.constraints.push_back({Metric::max_voltage, s.voltage_max});
            if (trial % 2 == 1) {
                o.constraints.push_back({Metric::min_efficiency, 1.2e-3});
            }
            const oracle::BruteBest b = oracle::brute_optimize(s, o, calib, air, 1.0);
            try {
                const OptResult r = optimize(s, o, calib, air, {1.0, 4});
                mismatches += !(b.found && r.best_index == b.index && r.best_voltage == b.voltage &&
                                r.objective_value == b.value);
            } catch (const EmptyFeasibleSetError&) {
                mismatches += b.found;
            }
            ++spaces;
        }
        // The dominance oracle is quadratic in points; keep the span modest.
        s.voltage_max = std::min(s.voltage_max, s.voltage_min + 120.0);
        const auto grid = voltage_grid(s.voltage_min, s.voltage_max, 1.0);
        const auto front = pareto_front(s, calib, air, grid);
        const auto expected = oracle::brute_front(s, calib, air, grid);
        bool same = front.size() == expected.size();
        for (std::size_t i = 0; same && i < front.size(); ++i) {
            same = front[i].design_index == expected[i].index && front[i].voltage == expected[i].voltage &&
                   front[i].thrust_density == expected[i].density && front[i].efficiency == expected[i].efficiency;
        }
        mismatches += !same;
        ++fronts;
    }
    const double elapsed = seconds_since(t0);
    report(9, "optimizer oracle equivalence", mismatches == 0 && elapsed < kOracleSeconds,
           fmt("%.0f searches + %.0f fronts, %.0f mismatches, %.2f s", spaces, fronts, mismatches, elapsed));
}

void properties() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const FluidMedium air;
    int bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
        StageParams sp;
        sp.aspect_ratio = 1 + static_cast<int>(u(rng) * 5);
        sp.gap = (1.0 + 2.0 * u(rng)) * kMm;
        const StageGeometry stage = make_stage(sp);
        const double ceiling = max_drive_voltage(sp.gap, air);
        const CoronaModel m{1e-12 * std::pow(1e3, u(rng)), (0.3 + 0.5 * u(rng)) * ceiling, 0.1 + 0.9 * u(rng)};
        OperatingPoint prev{};
        for (int i = 1; i <= 30; ++i) {
            const double v = std::min(ceiling, m.onset_voltage + (ceiling - m.onset_voltage) * i / 30.0);
            const OperatingPoint op = stage_performance_shifted(stage, v, m, air, 0.0);
            if (i > 1) {
                bad += op.current < prev.current || op.thrust < prev.thrust || !(op.efficiency < prev.efficiency);
            }
            prev = op;
        }
        ThrusterDesign d;
        d.stage = stage;
        d.corona = m;
        const double v = 0.5 * (m.onset_voltage + ceiling);
        double prev_ratio = 0.0, unit = 0.0;
        for (int n = 1; n <= 6; ++n) {
            d.stage_count = n;
            const PreparedDesign prepared{d, {}, 0.0};
            const double lossy = stack_performance(prepared, v, {0.85}, air).total_thrust / n;
            // Compared as T(N) == N T(1) so the check itself does not round.
            const double lossless = stack_performance(prepared, v, {1.0}, air).total_thrust;
            if (n == 1) {
                unit = lossless;
            } else {
                bad += !(lossy < prev_ratio) || lossless != n * unit;
            }
            prev_ratio = lossy;
        }
    }

    // Determinism of fits, optimization and file outputs.
    SynthOptions so;
    so.voltages = {2500, 2700, 2900, 3100, 3300};
    so.relative_noise = 0.02;
    so.seed = 5;
    const MeasuredCurve curve = synthesize_curve({3.4554e-11, 2386.23, 0.8225}, air, so);
    bad += !(fit_iv(curve) == fit_iv(curve));
    bad += !(fit_thrust_effectiveness(curve, 2 * kMm, air) == fit_thrust_effectiveness(curve, 2 * kMm, air));
    const SpaceFile space = load_space_file(std::string(EADKIT_DATA_DIR) + "/reference_space.json");
    Objective o;
    o.constraints.push_back({Metric::max_voltage, space.space.voltage_max});
    const OptResult a = optimize(space.space, o, space.calibration, space.medium, {1.0, 1});
    const OptResult b = optimize(space.space, o, space.calibration, space.medium, {1.0, 4});
    bad += !(a.best_index == b.best_index && a.best_voltage == b.best_voltage && a.metrics == b.metrics);
    const DesignFile f = load("ar5_five_stage.json");
    bad += serialize_design_file(f) != serialize_design_file(load("ar5_five_stage.json"));
    bad += outline_to_svg(electrode_outline(f.design.stage)) != outline_to_svg(electrode_outline(f.design.stage));
    const auto front = pareto_front(space.space, space.calibration, space.medium,
                                    voltage_grid(space.space.voltage_min, space.space.voltage_max, 10.0));
    bad += serialize_pareto(front) != serialize_pareto(pareto_front(space.space, space.calibration, space.medium,
                                                                    voltage_grid(space.space.voltage_min,
                                                                                 space.space.voltage_max, 10.0)));
    report(10, "property suites", bad == 0, fmt("%.0f violations", bad));
}

void interstage_rules() {
    const StageGeometry stage = stage_ar(5);
    auto severity_of = [&](double gamma) -> int {
        for (const Violation& v : clearance_check(stage, gamma).violations) {
            if (v.rule_id == rules::interstage_arcing || v.rule_id == rules::interstage_reverse_corona) {
                return v.severity == Severity::hard ? 2 : 1;
            }
        }
        return 0;
    };
    bool ok = true;
    for (double g : {0.5, 0.9, 0.999}) ok = ok && severity_of(g) == 2;
    for (double g : {1.0, 1.2, 1.499}) ok = ok && severity_of(g) == 1;
    for (double g : {1.5, 1.75, 2.0}) ok = ok && severity_of(g) == 0;
    report(11, "inter-stage rules", ok, "hard < 1, soft [1, 1.5), clear [1.5, 2]");
}

}  // namespace

int main() {
    const std::function<void()> checks[] = {stadium_areas, warburg,     chords,      clearances,
                                            headline,      bounds,      reynolds_order, calibration,
                                            oracle_equivalence, properties, interstage_rules};
    int id = 1;
    for (const auto& check : checks) {
        try {
            check();
        } catch (const std::exception& e) {
            report(id, "exception", false, e.what());
        }
        ++id;
    }
    std::printf("%s: %d of 11 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
    return failures == 0 ? 0 : 1;
}
