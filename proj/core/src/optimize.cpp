#include "eadkit/optimize.hpp"

#include "eadkit/errors.hpp"
#include "eadkit/scalar_search.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <thread>

namespace eadkit {

namespace {

template <typename T>
std::vector<T> sorted_unique(std::vector<T> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

bool increasing_metric(Metric m) {
    return m == Metric::min_thrust_density || m == Metric::min_total_thrust;
}

double metric_value(Metric m, const StackPerformance& perf) {
    switch (m) {
    case Metric::min_efficiency:
        return perf.efficiency;
    case Metric::min_thrust_density:
        return perf.thrust_density;
    case Metric::min_total_thrust:
        return perf.total_thrust;
    default:
        return 0.0;
    }
}

// First index in [lo, hi] where pred holds, for pred false...true; hi + 1 if none.
std::size_t first_true(std::size_t lo, std::size_t hi, const std::function<bool(std::size_t)>& pred) {
    std::size_t a = lo;
    std::size_t b = hi + 1;
    while (a < b) {
        const std::size_t mid = a + (b - a) / 2;
        if (pred(mid)) {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    return a;
}

}  // namespace

void validate(const DesignSpace& space) {
    auto require = [](bool ok, const char* message) {
        if (!ok) {
            throw DomainError(message);
        }
    };
    require(!space.aspect_ratios.empty() && !space.stage_counts.empty() && !space.tip_counts.empty() &&
                !space.gaps.empty() && !space.interstage_factors.empty(),
            "design space sets must be non-empty");
    require(std::all_of(space.aspect_ratios.begin(), space.aspect_ratios.end(), [](int v) { return v >= 1; }),
            "aspect ratios must be >= 1");
    require(std::all_of(space.stage_counts.begin(), space.stage_counts.end(), [](int v) { return v >= 1; }),
            "stage counts must be >= 1");
    require(std::all_of(space.tip_counts.begin(), space.tip_counts.end(), [](int v) { return v >= 1; }),
            "tip counts must be >= 1");
    require(std::all_of(space.gaps.begin(), space.gaps.end(), [](double v) { return v > 0.0; }),
            "gaps must be positive");
    require(std::all_of(space.interstage_factors.begin(), space.interstage_factors.end(),
                        [](double v) { return v > 0.0; }),
            "inter-stage factors must be positive");
    require(space.voltage_min >= 0.0 && space.voltage_min < space.voltage_max, "voltage range needs min < max");
    require(space.duct_height > 0.0, "duct height must be positive");
}

void validate(const Objective& objective) {
    const bool ceiling = std::any_of(objective.constraints.begin(), objective.constraints.end(),
                                     [](const Constraint& c) { return c.metric == Metric::max_voltage; });
    if (!ceiling) {
        throw DomainError("objective needs a voltage ceiling constraint");
    }
}

const char* to_string(Target target) {
    switch (target) {
    case Target::max_thrust_density:
        return "max_thrust_density";
    case Target::max_efficiency:
        return "max_efficiency";
    default:
        return "max_total_thrust";
    }
}

const char* to_string(Metric metric) {
    switch (metric) {
    case Metric::min_efficiency:
        return "min_efficiency";
    case Metric::min_thrust_density:
        return "min_thrust_density";
    case Metric::min_total_thrust:
        return "min_total_thrust";
    case Metric::max_voltage:
        return "max_voltage";
    default:
        return "no_soft_violations";
    }
}

StageGeometry make_space_stage(const DesignSpace& space, int aspect_ratio, int tip_count, double gap) {
    StageParams params;
    params.duct_height = space.duct_height;
    params.aspect_ratio = aspect_ratio;
    params.tip_count = aspect_ratio == 1 ? tip_count : 4 * aspect_ratio;
    params.lateral_clearance = space.lateral_clearance;
    params.gap = gap;
    params.bend_depth = space.bend_depth;
    params.tip_angle_deg = space.tip_angle_deg;
    params.collector = space.collector;
    return make_stage(params);
}

CoronaModel corona_for(const StageGeometry& stage, const CalibrationParams& calib) {
    CoronaModel model = calib.corona;
    if (calib.conductance_reference_area) {
        model.conductance_coeff *= inner_area(stage) / *calib.conductance_reference_area;
    }
    return model;
}

std::vector<CandidateDesign> enumerate_designs(const DesignSpace& space, const CalibrationParams& calib) {
    validate(space);
    const auto ars = sorted_unique(space.aspect_ratios);
    const auto counts = sorted_unique(space.stage_counts);
    const auto tips = sorted_unique(space.tip_counts);
    const auto gaps = sorted_unique(space.gaps);
    const auto gammas = sorted_unique(space.interstage_factors);

    std::vector<CandidateDesign> out;
    for (int ar : ars) {
        const std::vector<int> tip_set = ar == 1 ? tips : std::vector<int>{4 * ar};
        for (int n_stages : counts) {
            for (int n_tips : tip_set) {
                for (double gap : gaps) {
                    const StageGeometry stage = make_space_stage(space, ar, n_tips, gap);
                    for (double gamma : gammas) {
                        CandidateDesign c;
                        c.index = out.size();
                        c.aspect_ratio = ar;
                        c.design.stage = stage;
                        c.design.stage_count = n_stages;
                        c.design.interstage_factor = gamma;
                        c.design.corona = corona_for(stage, calib);
                        c.report = clearance_check(stage, gamma);
                        c.rejected = c.report.has_hard();
                        out.push_back(std::move(c));
                    }
                }
            }
        }
    }
    return out;
}

std::vector<double> voltage_grid(double v_min, double v_max, double step) {
    if (!(step > 0.0) || v_max < v_min) {
        throw DomainError("voltage_grid: need step > 0 and max >= min");
    }
    const auto count = static_cast<std::size_t>(std::floor((v_max - v_min) / step + 1.0e-9));
    std::vector<double> out;
    out.reserve(count + 1);
    for (std::size_t j = 0; j <= count; ++j) {
        out.push_back(v_min + static_cast<double>(j) * step);
    }
    return out;
}

double objective_value(Target target, const StackPerformance& metrics) {
    switch (target) {
    case Target::max_thrust_density:
        return metrics.thrust_density;
    case Target::max_efficiency:
        return metrics.efficiency;
    default:
        return metrics.total_thrust;
    }
}

Evaluation evaluate(const ThrusterDesign& design, const ConstraintReport& report, const Objective& objective,
                    const CalibrationParams& calib, const FluidMedium& medium, const VoltageSearch& search) {
    validate(objective);
    Evaluation out;
    if (const Violation* hard = report.first_hard()) {
        out.binding_constraint = hard->rule_id;
        return out;
    }
    double ceiling = search.v_max;
    for (const Constraint& c : objective.constraints) {
        if (c.metric == Metric::no_soft_violations && report.has_soft()) {
            out.binding_constraint = to_string(Metric::no_soft_violations);
            return out;
        }
        if (c.metric == Metric::max_voltage) {
            ceiling = std::min(ceiling, c.bound);
        }
    }
    if (ceiling < search.v_min) {
        out.binding_constraint = to_string(Metric::max_voltage);
        return out;
    }

    const std::vector<double> grid = voltage_grid(search.v_min, ceiling, search.step);
    const FluidMedium effective = calib.apply_to(medium);
    validate(design);
    const PreparedDesign prepared{design, report, onset_penalty(design.stage, calib.onset_coeffs())};
    std::map<std::size_t, std::optional<StackPerformance>> cache;
    auto at = [&](std::size_t j) -> const std::optional<StackPerformance>& {
        auto it = cache.find(j);
        if (it == cache.end()) {
            std::optional<StackPerformance> perf;
            try {
                perf = stack_performance(prepared, grid[j], calib.degradation, effective);
            } catch (const BreakdownError&) {
            }
            it = cache.emplace(j, std::move(perf)).first;
        }
        return it->second;
    };

    const std::size_t last = grid.size() - 1;
    // Breakdown sets in above a fixed voltage; onset and each constraint are
    // monotone in voltage above onset, so the feasible set is one interval.
    const std::size_t first_breakdown = first_true(0, last, [&](std::size_t j) { return !at(j).has_value(); });
    if (first_breakdown == 0) {
        out.binding_constraint = "breakdown";
        return out;
    }
    std::size_t hi = first_breakdown - 1;
    std::size_t lo = first_true(0, hi, [&](std::size_t j) { return at(j)->total_thrust > 0.0; });
    if (lo > hi) {
        out.binding_constraint = "onset";
        return out;
    }
    for (const Constraint& c : objective.constraints) {
        if (c.metric == Metric::max_voltage || c.metric == Metric::no_soft_violations) {
            continue;
        }
        if (increasing_metric(c.metric)) {
            lo = first_true(lo, hi, [&](std::size_t j) { return metric_value(c.metric, *at(j)) >= c.bound; });
        } else {
            const std::size_t fail =
                first_true(lo, hi, [&](std::size_t j) { return metric_value(c.metric, *at(j)) < c.bound; });
            if (fail == lo) {
                lo = hi + 1;
            } else {
                hi = fail - 1;
            }
        }
        if (lo > hi) {
            out.binding_constraint = to_string(c.metric);
            return out;
        }
    }

    const std::size_t best =
        discrete_golden_maximize([&](std::size_t j) { return objective_value(objective.target, *at(j)); }, lo, hi);
    out.feasible = true;
    out.voltage = grid[best];
    out.metrics = *at(best);
    out.objective_value = objective_value(objective.target, *out.metrics);
    return out;
}

Evaluation evaluate(const ThrusterDesign& design, const Objective& objective, const CalibrationParams& calib,
                    const FluidMedium& medium, const VoltageSearch& search) {
    return evaluate(design, clearance_check(design.stage, design.interstage_factor), objective, calib, medium, search);
}

OptResult optimize(const DesignSpace& space, const Objective& objective, const CalibrationParams& calib,
                   const FluidMedium& medium, const OptimizeOptions& options) {
    validate(objective);
    validate(calib);
    const std::vector<CandidateDesign> candidates = enumerate_designs(space, calib);
    const VoltageSearch search{space.voltage_min, space.voltage_max, options.voltage_step};

    std::vector<Evaluation> results(candidates.size());
    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(candidates.size())));
    if (threads == 1) {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            results[i] = evaluate(candidates[i].design, candidates[i].report, objective, calib, medium, search);
        }
    } else {
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < candidates.size(); i += threads) {
                        results[i] =
                            evaluate(candidates[i].design, candidates[i].report, objective, calib, medium, search);
                    }
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) {
            th.join();
        }
        for (const std::exception_ptr& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    OptResult out;
    out.evaluated_count = candidates.size();
    std::map<std::string, std::size_t> rejections;
    const Evaluation* best = nullptr;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const Evaluation& e = results[i];
        if (!e.feasible) {
            ++rejections[e.binding_constraint];
            continue;
        }
        ++out.feasible_count;
        if (best == nullptr || e.objective_value > best->objective_value) {
            best = &e;
            out.best_index = i;
        }
    }
    if (best == nullptr) {
        throw EmptyFeasibleSetError(std::move(rejections));
    }
    out.best_design = candidates[out.best_index].design;
    out.best_voltage = best->voltage;
    out.objective_value = best->objective_value;
    out.metrics = *best->metrics;
    return out;
}

std::vector<ParetoPoint> nondominated(std::vector<ParetoPoint> points) {
    std::stable_sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.thrust_density != b.thrust_density) {
            return a.thrust_density > b.thrust_density;
        }
        return a.efficiency > b.efficiency;
    });
    std::vector<ParetoPoint> front;
    double best_eff_above = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < points.size()) {
        std::size_t j = i;
        while (j < points.size() && points[j].thrust_density == points[i].thrust_density) {
            ++j;
        }
        const double group_max = points[i].efficiency;
        for (std::size_t p = i; p < j; ++p) {
            const bool dominated = best_eff_above >= points[p].efficiency || group_max > points[p].efficiency;
            if (!dominated) {
                front.push_back(points[p]);
            }
        }
        best_eff_above = std::max(best_eff_above, group_max);
        i = j;
    }
    std::stable_sort(front.begin(), front.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.thrust_density != b.thrust_density) {
            return a.thrust_density < b.thrust_density;
        }
        if (a.design_index != b.design_index) {
            return a.design_index < b.design_index;
        }
        return a.voltage < b.voltage;
    });
    return front;
}

std::vector<ParetoPoint> pareto_front(const DesignSpace& space, const CalibrationParams& calib,
                                      const FluidMedium& medium, const std::vector<double>& voltage_grid) {
    if (voltage_grid.empty()) {
        throw DomainError("pareto_front: voltage grid is empty");
    }
    validate(calib);
    const FluidMedium effective = calib.apply_to(medium);
    const OnsetPenaltyCoeffs penalty = calib.onset_coeffs();
    std::vector<ParetoPoint> points;
    for (const CandidateDesign& c : enumerate_designs(space, calib)) {
        if (c.rejected) {
            continue;
        }
        const PreparedDesign prepared{c.design, c.report, onset_penalty(c.design.stage, penalty)};
        for (double v : voltage_grid) {
            StackPerformance perf;
            try {
                perf = stack_performance(prepared, v, calib.degradation, effective);
            } catch (const BreakdownError&) {
                continue;
            }
            if (!(perf.total_thrust > 0.0)) {
                continue;
            }
            points.push_back({c.index, c.design, v, perf.thrust_density, perf.efficiency});
        }
    }
    return nondominated(std::move(points));
}

}  // namespace eadkit
