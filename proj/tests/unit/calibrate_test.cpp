#include "eadkit/calibrate.hpp"
#include "eadkit/errors.hpp"
#include "eadkit/optimize.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace eadkit;

namespace {

CoronaModel model(double c, double v0, double beta = 1.0) {
    CoronaModel m;
    m.conductance_coeff = c;
    m.onset_voltage = v0;
    m.thrust_effectiveness = beta;
    return m;
}

MeasuredCurve synth(const CoronaModel& m, double noise = 0.0, unsigned long long seed = 1, double v0 = 2000.0,
                    double v1 = 3300.0, double step = 25.0) {
    SynthOptions o;
    o.voltages = voltage_grid(v0, v1, step);
    o.relative_noise = noise;
    o.seed = seed;
    return synthesize_curve(m, FluidMedium{}, o);
}

StageGeometry ring(double lateral, int tips, double duct = 10e-3) {
    StageParams p;
    p.duct_height = duct;
    p.lateral_clearance = lateral;
    p.tip_count = tips;
    return make_stage(p);
}

}  // namespace

TEST_SUITE("calibrate") {

TEST_CASE("I-V round trip, noiseless") {
    const FitResult r = fit_iv(synth(model(1e-11, 2400.0)));
    CHECK(r.converged);
    CHECK(r.params.corona.conductance_coeff == doctest::Approx(1e-11).epsilon(1e-3));
    CHECK(r.params.corona.onset_voltage == doctest::Approx(2400.0).epsilon(1e-3));
    CHECK(r.residual_rms < 1e-12 * 1e-11 * 3300.0 * 900.0);
}

TEST_CASE("I-V round trip, 2% noise") {
    for (unsigned long long seed : {1ULL, 2ULL, 3ULL, 42ULL}) {
        CAPTURE(seed);
        const FitResult r = fit_iv(synth(model(1e-11, 2400.0), 0.02, seed));
        CHECK(r.params.corona.conductance_coeff == doctest::Approx(1e-11).epsilon(0.05));
        CHECK(r.params.corona.onset_voltage == doctest::Approx(2400.0).epsilon(0.05));
    }
}

TEST_CASE("I-V error cases") {
    MeasuredCurve flat = synth(model(1e-11, 5000.0));
    CHECK_THROWS_AS(fit_iv(flat), NoDischargeError);
    MeasuredCurve few = synth(model(1e-11, 3260.0));
    CHECK_THROWS_AS(fit_iv(few), InsufficientDataError);
    MeasuredCurve unsorted = synth(model(1e-11, 2400.0));
    std::swap(unsorted.samples[3], unsorted.samples[4]);
    CHECK_THROWS_AS(fit_iv(unsorted), DomainError);
}

TEST_CASE("noise floor separates sub-onset samples") {
    MeasuredCurve c = synth(model(1e-11, 2400.0));
    for (std::size_t i = 0; i < 10; ++i) {
        c.samples[i].current = 1e-12 * static_cast<double>(i % 3);
    }
    const double floor = iv_noise_floor(c);
    CHECK(floor > 0.0);
    CHECK(floor < 1e-11);
    IvFitOptions fixed;
    fixed.noise_floor = 1e-9;
    CHECK(iv_noise_floor(c, fixed) == 1e-9);
}

TEST_CASE("I-V fit is shift covariant") {
    // Data regenerated at V0 + delta on a shifted grid refits with V0 shifted by delta.
    const CoronaModel base = model(2e-11, 2300.0);
    const FitResult r0 = fit_iv(synth(base));
    for (double delta : {-150.0, 75.0, 300.0}) {
        const FitResult r = fit_iv(synth(model(2e-11, 2300.0 + delta), 0.0, 1, 2000.0 + delta, 3300.0 + delta));
        CHECK(r.params.corona.onset_voltage == doctest::Approx(r0.params.corona.onset_voltage + delta).epsilon(1e-9));
        CHECK(r.residual_rms < 1e-18);
    }
}

TEST_CASE("pooled fit over raw trials") {
    std::vector<MeasuredCurve> trials;
    for (unsigned long long s = 1; s <= 4; ++s) {
        trials.push_back(synth(model(1e-11, 2400.0, 0.7), 0.01, s));
    }
    const FitResult pooled = fit_iv(trials);
    CHECK(pooled.sample_count > trials[0].samples.size());
    CHECK(pooled.params.corona.conductance_coeff == doctest::Approx(1e-11).epsilon(0.05));
    const FitResult beta = fit_thrust_effectiveness(trials, 2e-3, FluidMedium{});
    CHECK(beta.params.corona.thrust_effectiveness == doctest::Approx(0.7).epsilon(0.02));
}

TEST_CASE("thrust effectiveness") {
    const FluidMedium air;
    CHECK(fit_thrust_effectiveness(synth(model(1e-11, 2400.0, 1.0)), 2e-3, air).params.corona.thrust_effectiveness ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fit_thrust_effectiveness(synth(model(1e-11, 2400.0, 0.6)), 2e-3, air).params.corona.thrust_effectiveness ==
          doctest::Approx(0.6).epsilon(1e-14));

    MeasuredCurve one;
    one.samples.push_back({3000.0, 5e-5, 3e-4});
    const double expected = 3e-4 * 2e-4 / (5e-5 * 2e-3);
    CHECK(fit_thrust_effectiveness(one, 2e-3, air).params.corona.thrust_effectiveness ==
          doctest::Approx(expected).epsilon(1e-14));

    MeasuredCurve strong = one;
    strong.samples[0].force = 1.0;
    const FitResult clamped = fit_thrust_effectiveness(strong, 2e-3, air);
    CHECK(clamped.params.corona.thrust_effectiveness == 1.0);
    CHECK(!clamped.warnings.empty());

    MeasuredCurve none = one;
    none.samples[0].force.reset();
    CHECK_THROWS_AS(fit_thrust_effectiveness(none, 2e-3, air), InsufficientDataError);
}

TEST_CASE("stage factor") {
    const double t1 = 0.8e-3;
    SUBCASE("linear data gives k = 1") {
        const FitResult r = fit_stage_factor(t1, {{5, 5.0 * t1}});
        CHECK(r.params.degradation.factor == 1.0);
        CHECK(r.warnings.empty());
    }
    SUBCASE("3.70 T1 at five stages gives about 0.85") {
        const std::vector<StageCountObservation> obs{{5, 3.70 * t1}};
        const double k = fit_stage_factor(t1, obs).params.degradation.factor;
        CHECK(k == doctest::Approx(0.85).epsilon(0.005));
        CHECK(k == doctest::Approx(oracle::scan_stage_factor(t1, obs, 100000)).epsilon(2e-5));
    }
    SUBCASE("several stage counts") {
        std::vector<StageCountObservation> obs;
        for (int n = 2; n <= 5; ++n) {
            obs.push_back({n, t1 * geometric_stage_sum(0.9, n) * (1.0 + 0.003 * (n % 2 ? 1 : -1))});
        }
        const double k = fit_stage_factor(t1, obs).params.degradation.factor;
        CHECK(k == doctest::Approx(oracle::scan_stage_factor(t1, obs, 100000)).epsilon(2e-5));
    }
    SUBCASE("superlinear data warns and returns 1") {
        const FitResult r = fit_stage_factor(t1, {{2, 2.2 * t1}});
        CHECK(r.params.degradation.factor == 1.0);
        CHECK(!r.warnings.empty());
    }
    SUBCASE("needs a multi-stage observation") {
        CHECK_THROWS_AS(fit_stage_factor(t1, {{1, t1}}), InsufficientDataError);
        CHECK_THROWS_AS(fit_stage_factor(0.0, {{2, t1}}), DomainError);
    }
}

TEST_CASE("onset penalty slopes") {
    SUBCASE("one wall anchor") {
        const StageGeometry tight = ring(0.75e-3, 3);
        const StageGeometry clear = ring(2e-3, 3);
        const FitResult r = fit_onset_penalty({{tight, 2600.0}, {clear, 2400.0}});
        const double r_w = warburg_radius(2e-3);
        CHECK(r.params.onset_wall_coeff == doctest::Approx(200.0 / ((r_w - 1.25e-3) / r_w)).epsilon(1e-9));
        CHECK(r.params.onset_wall_coeff == doctest::Approx(875.0).epsilon(0.01));
        CHECK(r.params.onset_tip_coeff == 0.0);
        CHECK(r.params.corona.onset_voltage == doctest::Approx(2400.0));
    }
    SUBCASE("nothing violated, equal onsets") {
        const FitResult r = fit_onset_penalty({{ring(2e-3, 3), 2400.0}, {ring(2.5e-3, 3), 2400.0}});
        CHECK(r.params.onset_wall_coeff == 0.0);
        CHECK(r.params.onset_tip_coeff == 0.0);
    }
    SUBCASE("both slopes from separate conditions") {
        const OnsetPenaltyCoeffs truth{700.0, 300.0};
        std::vector<OnsetObservation> obs;
        for (const StageGeometry& s : {ring(2e-3, 3), ring(0.8e-3, 3), ring(2e-3, 8), ring(1e-3, 6, 6e-3)}) {
            obs.push_back({s, 2300.0 + onset_penalty(s, truth)});
        }
        const FitResult r = fit_onset_penalty(obs);
        CHECK(r.params.onset_wall_coeff == doctest::Approx(700.0).epsilon(1e-9));
        CHECK(r.params.onset_tip_coeff == doctest::Approx(300.0).epsilon(1e-9));
    }
    SUBCASE("identical geometries are unidentifiable") {
        CHECK_THROWS_AS(fit_onset_penalty({{ring(1e-3, 3), 2500.0}, {ring(1e-3, 3), 2510.0}}), UnidentifiableError);
    }
    SUBCASE("a constant deficit is unidentifiable") {
        CHECK_THROWS_AS(fit_onset_penalty({{ring(1e-3, 3), 2500.0}, {ring(1e-3, 4), 2510.0}}), UnidentifiableError);
    }
    SUBCASE("one observation is not enough") {
        CHECK_THROWS_AS(fit_onset_penalty({{ring(1e-3, 3), 2500.0}}), InsufficientDataError);
    }
}

TEST_CASE("trial aggregation") {
    auto curve = [](const std::string& dev, const std::string& trial, double i) {
        MeasuredCurve c;
        c.device_id = dev;
        c.trial_id = trial;
        c.samples.push_back({3000.0, i, std::nullopt});
        return c;
    };
    SUBCASE("identical trials") {
        std::vector<MeasuredCurve> cs;
        for (const char* d : {"a", "b", "c"}) {
            for (const char* t : {"1", "2", "3"}) {
                cs.push_back(curve(d, t, 4e-6));
            }
        }
        const AggregatedCurve a = aggregate_trials(cs);
        CHECK(a.mean.samples[0].current == doctest::Approx(4e-6));
        CHECK(a.dispersion.sem_defined);
        CHECK(a.dispersion.current_sem[0] == doctest::Approx(0.0));
    }
    SUBCASE("mean of device means, SEM across devices") {
        // Device b has two trials; its mean still counts once.
        const AggregatedCurve a =
            aggregate_trials({curve("a", "1", 1e-6), curve("b", "1", 1.5e-6), curve("b", "2", 2.5e-6), curve("c", "1", 3e-6)});
        CHECK(a.dispersion.device_count == 3);
        CHECK(a.mean.samples[0].current == doctest::Approx(2e-6));
        CHECK(a.dispersion.current_sem[0] == doctest::Approx(0.57735e-6).epsilon(1e-5));
    }
    SUBCASE("single device has no SEM") {
        const AggregatedCurve a = aggregate_trials({curve("a", "1", 1e-6), curve("a", "2", 3e-6)});
        CHECK(!a.dispersion.sem_defined);
        CHECK(a.mean.samples[0].current == doctest::Approx(2e-6));
    }
    SUBCASE("mismatches") {
        MeasuredCurve other = curve("b", "1", 1e-6);
        other.geometry_tag = "ar5";
        CHECK_THROWS_AS(aggregate_trials({curve("a", "1", 1e-6), other}), MismatchError);
        MeasuredCurve shifted = curve("b", "1", 1e-6);
        shifted.samples[0].voltage = 3010.0;
        CHECK_THROWS_AS(aggregate_trials({curve("a", "1", 1e-6), shifted}), MismatchError);
        CHECK_THROWS_AS(aggregate_trials({}), InsufficientDataError);
    }
}

TEST_CASE("fits are deterministic") {
    const MeasuredCurve c = synth(model(1e-11, 2400.0, 0.8), 0.02, 9);
    CHECK(fit_iv(c) == fit_iv(c));
    CHECK(fit_thrust_effectiveness(c, 2e-3, FluidMedium{}) == fit_thrust_effectiveness(c, 2e-3, FluidMedium{}));
    CHECK(synth(model(1e-11, 2400.0), 0.02, 9) == synth(model(1e-11, 2400.0), 0.02, 9));
}

}
