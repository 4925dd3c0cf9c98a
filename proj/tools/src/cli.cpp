#include "cli.hpp"

#include "eadkit/calibrate.hpp"
#include "eadkit/design_file.hpp"
#include "eadkit/errors.hpp"
#include "eadkit/format.hpp"
#include "eadkit/optimize.hpp"
#include "eadkit/svg.hpp"
#include "eadkit/tables.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <ostream>

namespace eadkit::cli {

namespace {

using json = nlohmann::ordered_json;

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
    } else {
        write_text_file(path, text);
    }
}

std::string lower(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return s;
}

json design_summary(const ThrusterDesign& d) {
    json j;
    j["aspect_ratio"] = d.stage.emitter.aspect_ratio;
    j["stage_count"] = d.stage_count;
    j["tip_count"] = d.stage.emitter.tip_count;
    j["gap_m"] = d.stage.gap;
    j["interstage_factor"] = d.interstage_factor;
    j["inner_area_m2"] = inner_area(d.stage);
    return j;
}

struct AnalyzeArgs {
    std::string design_path;
    std::string voltage;
    std::string sweep;
    std::string out;
    std::string format;
};

int cmd_analyze(const AnalyzeArgs& a, bool require_sweep, std::ostream& out) {
    if (a.voltage.empty() == a.sweep.empty()) {
        throw DomainError("give exactly one of --voltage or --sweep");
    }
    if (require_sweep && a.sweep.empty()) {
        throw DomainError("sweep needs --sweep start:stop:step");
    }
    const DesignFile file = load_design_file(a.design_path);
    const FluidMedium medium = file.effective_medium();
    const ConstraintReport report = clearance_check(file.design.stage, file.design.interstage_factor);
    if (const Violation* hard = report.first_hard()) {
        throw InfeasibleDesignError(hard->rule_id, hard->message);
    }

    if (!a.voltage.empty()) {
        const double v = parse_voltage(a.voltage);
        const StackPerformance perf =
            stack_performance(file.design, v, file.degradation(), medium, file.onset_coeffs());
        if (a.format == "csv") {
            emit(serialize_sweep_table({make_sweep_row(file.design, v, &perf)}), a.out, out);
        } else {
            emit(performance_report_json({&file.design, &report, v}, perf), a.out, out);
        }
        return kOk;
    }

    std::vector<SweepRow> rows;
    for (double v : parse_sweep(a.sweep)) {
        try {
            const StackPerformance perf =
                stack_performance(file.design, v, file.degradation(), medium, file.onset_coeffs());
            rows.push_back(make_sweep_row(file.design, v, &perf));
        } catch (const BreakdownError&) {
            rows.push_back(make_sweep_row(file.design, v, nullptr));
        }
    }
    if (a.format == "json") {
        json arr = json::array();
        for (const SweepRow& r : rows) {
            json j;
            j["voltage_V"] = r.voltage;
            j["current_A"] = r.current;
            j["thrust_N"] = r.thrust;
            j["power_W"] = r.power;
            j["efficiency_N_per_W"] = r.efficiency;
            j["thrust_density_N_per_m2"] = r.thrust_density;
            j["feasible"] = r.feasible;
            arr.push_back(j);
        }
        json doc;
        doc["design"] = design_summary(file.design);
        doc["rows"] = arr;
        emit(doc.dump(2) + "\n", a.out, out);
    } else {
        emit(serialize_sweep_table(rows), a.out, out);
    }
    return kOk;
}

struct FitArgs {
    std::string csv_path;
    std::string design_path;
    std::string out;
    bool pooled = false;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
    DesignFile file = load_design_file(a.design_path);
    const std::vector<MeasuredCurve> curves =
        parse_measurements(read_text_file(a.csv_path), a.csv_path, a.design_path);
    if (curves.empty()) {
        throw InsufficientDataError(a.csv_path + ": no measurement rows");
    }

    // Measurements are of the whole stack; fits are per stage.
    CalibrationParams calib = file.calibration.value_or(CalibrationParams{});
    const int n = file.design.stage_count;
    const double stages = geometric_stage_sum(calib.degradation.factor, n);
    bool has_force = false;
    auto per_stage = [&](MeasuredCurve c) {
        for (Sample& s : c.samples) {
            s.current /= n;
            if (s.force) {
                *s.force /= stages;
                has_force = true;
            }
        }
        return c;
    };

    std::vector<MeasuredCurve> fit_curves;
    std::size_t device_count = 0;
    if (a.pooled) {
        for (const MeasuredCurve& c : curves) {
            fit_curves.push_back(per_stage(c));
        }
        std::vector<std::string> ids;
        for (const MeasuredCurve& c : curves) {
            if (std::find(ids.begin(), ids.end(), c.device_id) == ids.end()) {
                ids.push_back(c.device_id);
            }
        }
        device_count = ids.size();
    } else {
        const AggregatedCurve agg = aggregate_trials(curves);
        fit_curves.push_back(per_stage(agg.mean));
        device_count = agg.dispersion.device_count;
    }

    const FitResult iv = fit_iv(fit_curves);
    const double penalty = onset_penalty(file.design.stage, calib.onset_coeffs());
    calib.corona.conductance_coeff = iv.params.corona.conductance_coeff;
    calib.corona.onset_voltage = iv.params.corona.onset_voltage - penalty;
    std::vector<std::string> warnings = iv.warnings;
    double force_rms = 0.0;
    if (has_force) {
        const FitResult beta =
            fit_thrust_effectiveness(fit_curves, file.design.stage.gap, calib.apply_to(file.medium));
        calib.corona.thrust_effectiveness = beta.params.corona.thrust_effectiveness;
        force_rms = beta.residual_rms;
        warnings.insert(warnings.end(), beta.warnings.begin(), beta.warnings.end());
    }
    calib.conductance_reference_area = inner_area(file.design.stage);
    validate(calib);
    file.calibration = calib;
    file.design.corona = calib.corona;

    std::ostream& summary = a.out.empty() ? err : out;
    summary << "devices " << device_count << (a.pooled ? " pooled" : "") << ", samples " << iv.sample_count << " fitted\n";
    summary << "conductance_coeff_A_per_V2 " << format_number(calib.corona.conductance_coeff) << "\n";
    summary << "onset_voltage_V " << format_number(calib.corona.onset_voltage) << "\n";
    summary << "thrust_effectiveness " << format_number(calib.corona.thrust_effectiveness) << "\n";
    summary << "current_residual_rms_A " << format_number(iv.residual_rms) << "\n";
    if (has_force) {
        summary << "force_residual_rms_N " << format_number(force_rms) << "\n";
    }
    for (const std::string& w : warnings) {
        summary << "warning: " << w << "\n";
    }
    emit(serialize_design_file(file), a.out, out);
    return kOk;
}

struct OptimizeArgs {
    std::string space_path;
    std::string objective = "density";
    std::optional<double> min_efficiency;
    std::optional<double> min_thrust_density;
    std::optional<double> min_total_thrust;
    std::string max_voltage;
    bool no_soft = false;
    std::string voltage_step;
    unsigned threads = 1;
    std::string pareto;
    std::string out;
};

Target parse_target(const std::string& name) {
    const std::string n = lower(name);
    if (n == "density" || n == "max_thrust_density") {
        return Target::max_thrust_density;
    }
    if (n == "efficiency" || n == "max_efficiency") {
        return Target::max_efficiency;
    }
    if (n == "thrust" || n == "max_total_thrust") {
        return Target::max_total_thrust;
    }
    throw DomainError("unknown objective '" + name + "' (density, efficiency, thrust)");
}

int cmd_optimize(const OptimizeArgs& a, std::ostream& out, std::ostream& err) {
    const SpaceFile file = load_space_file(a.space_path);
    Objective objective;
    objective.target = parse_target(a.objective);
    const double ceiling = a.max_voltage.empty() ? file.space.voltage_max : parse_voltage(a.max_voltage);
    objective.constraints.push_back({Metric::max_voltage, ceiling});
    if (a.min_efficiency) {
        objective.constraints.push_back({Metric::min_efficiency, *a.min_efficiency});
    }
    if (a.min_thrust_density) {
        objective.constraints.push_back({Metric::min_thrust_density, *a.min_thrust_density});
    }
    if (a.min_total_thrust) {
        objective.constraints.push_back({Metric::min_total_thrust, *a.min_total_thrust});
    }
    if (a.no_soft) {
        objective.constraints.push_back({Metric::no_soft_violations, 0.0});
    }
    OptimizeOptions options;
    options.voltage_step = a.voltage_step.empty() ? file.voltage_step : parse_voltage(a.voltage_step);
    options.threads = a.threads;
    const FluidMedium medium = file.calibration.apply_to(file.medium);

    OptResult result;
    try {
        result = optimize(file.space, objective, file.calibration, medium, options);
    } catch (const EmptyFeasibleSetError& e) {
        err << "error: no feasible design\n";
        for (const auto& [reason, count] : e.rejections()) {
            err << "  " << reason << " " << count << "\n";
        }
        return kInfeasible;
    }

    if (!a.pareto.empty()) {
        const auto grid = voltage_grid(file.space.voltage_min, std::min(ceiling, file.space.voltage_max),
                                       options.voltage_step);
        write_text_file(a.pareto, serialize_pareto(pareto_front(file.space, file.calibration, medium, grid)));
    }

    const ConstraintReport report =
        clearance_check(result.best_design.stage, result.best_design.interstage_factor);
    json doc;
    doc["objective"] = to_string(objective.target);
    doc["objective_value"] = result.objective_value;
    doc["evaluated_count"] = result.evaluated_count;
    doc["feasible_count"] = result.feasible_count;
    doc["best_index"] = result.best_index;
    doc["voltage_V"] = result.best_voltage;
    doc["design"] = design_summary(result.best_design);
    doc["report"] = json::parse(performance_report_json({&result.best_design, &report, result.best_voltage},
                                                        result.metrics));
    emit(doc.dump(2) + "\n", a.out, out);
    return kOk;
}

struct GeometryArgs {
    std::string design_path;
    std::string svg;
};

int cmd_geometry(const GeometryArgs& a, std::ostream& out) {
    const DesignFile file = load_design_file(a.design_path);
    emit(outline_to_svg(electrode_outline(file.design.stage)), a.svg, out);
    return kOk;
}

}  // namespace

double parse_voltage(const std::string& text) {
    std::string t = text;
    double scale = 1.0;
    const std::string l = lower(t);
    if (l.size() > 2 && l.compare(l.size() - 2, 2, "kv") == 0) {
        scale = 1.0e3;
        t.resize(t.size() - 2);
    } else if (l.size() > 1 && l.back() == 'v') {
        t.resize(t.size() - 1);
    }
    double value = 0.0;
    if (!parse_number(t, value) || value < 0.0) {
        throw DomainError("not a voltage: '" + text + "'");
    }
    return value * scale;
}

std::vector<double> parse_sweep(const std::string& text) {
    const auto first = text.find(':');
    const auto second = first == std::string::npos ? std::string::npos : text.find(':', first + 1);
    if (second == std::string::npos || text.find(':', second + 1) != std::string::npos) {
        throw DomainError("sweep must be start:stop:step, got '" + text + "'");
    }
    const double start = parse_voltage(text.substr(0, first));
    const double stop = parse_voltage(text.substr(first + 1, second - first - 1));
    const double step = parse_voltage(text.substr(second + 1));
    return voltage_grid(start, stop, step);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-stage ducted EAD thruster modeling"};
    app.name("eadkit");
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto add_analyze = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("design", analyze_args.design_path, "Design file")->required();
        sub->add_option("--voltage", analyze_args.voltage, "Drive voltage, e.g. 3.28kV");
        sub->add_option("--sweep", analyze_args.sweep, "Voltage sweep start:stop:step, e.g. 2.4kV:3.3kV:100V");
        sub->add_option("--out", analyze_args.out, "Output path (default stdout)");
        sub->add_option("--format", analyze_args.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        return sub;
    };
    CLI::App* analyze = add_analyze("analyze", "Evaluate a design at one voltage or over a sweep");
    CLI::App* sweep = add_analyze("sweep", "Evaluate a design over a voltage sweep");

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "Calibrate model coefficients from measured sweeps");
    fit->add_option("measurements", fit_args.csv_path, "Measurement CSV")->required();
    fit->add_option("design", fit_args.design_path, "Design file of the measured geometry")->required();
    fit->add_option("--out", fit_args.out, "Write the calibrated design file here (default stdout)");
    fit->add_flag("--pooled", fit_args.pooled, "Fit all raw samples instead of device means");

    OptimizeArgs opt_args;
    CLI::App* opt = app.add_subcommand("optimize", "Search a design space");
    opt->add_option("space", opt_args.space_path, "Design-space file")->required();
    opt->add_option("--objective", opt_args.objective, "density, efficiency or thrust");
    opt->add_option("--min-efficiency", opt_args.min_efficiency, "N/W");
    opt->add_option("--min-thrust-density", opt_args.min_thrust_density, "N/m^2");
    opt->add_option("--min-total-thrust", opt_args.min_total_thrust, "N");
    opt->add_option("--max-voltage", opt_args.max_voltage, "Voltage ceiling (default: space maximum)");
    opt->add_flag("--no-soft-violations", opt_args.no_soft, "Reject designs with soft rule violations");
    opt->add_option("--voltage-step", opt_args.voltage_step, "Voltage grid step (default: space file)");
    opt->add_option("--threads", opt_args.threads, "Worker threads")->check(CLI::PositiveNumber);
    opt->add_option("--pareto", opt_args.pareto, "Write the Pareto front CSV here");
    opt->add_option("--out", opt_args.out, "Output path (default stdout)");

    GeometryArgs geo_args;
    CLI::App* geo = app.add_subcommand("geometry", "Export electrode outlines as SVG");
    geo->add_option("design", geo_args.design_path, "Design file")->required();
    geo->add_option("--svg", geo_args.svg, "SVG output path (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (analyze->parsed()) {
            return cmd_analyze(analyze_args, false, out);
        }
        if (sweep->parsed()) {
            return cmd_analyze(analyze_args, true, out);
        }
        if (fit->parsed()) {
            return cmd_fit(fit_args, out, err);
        }
        if (opt->parsed()) {
            return cmd_optimize(opt_args, out, err);
        }
        if (geo->parsed()) {
            return cmd_geometry(geo_args, out);
        }
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const MismatchError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const InsufficientDataError& e) {
        err << "error: insufficient data: " << e.what() << "\n";
        return kInsufficientData;
    } catch (const InfeasibleDesignError& e) {
        err << "error: infeasible design (" << e.rule_id() << "): " << e.what() << "\n";
        return kInfeasible;
    } catch (const BreakdownError& e) {
        err << "error: " << e.what() << "\n";
        return kInfeasible;
    } catch (const LayoutError& e) {
        err << "error: degenerate geometry: " << e.what() << "\n";
        return kInfeasible;
    } catch (const UnidentifiableError& e) {
        err << "error: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

}  // namespace eadkit::cli
