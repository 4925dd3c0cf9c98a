#include "cli.hpp"

#include "eadkit/calibrate.hpp"
#include "eadkit/design_file.hpp"
#include "eadkit/errors.hpp"
#include "eadkit/tables.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace eadkit::cli {

int run_synth(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic stack measurement sweeps for testing"};
    app.name("eadkit-synth");
    std::string design_path;
    std::string sweep_spec;
    std::string out_path;
    double noise = 0.0;
    unsigned long long seed = 0;
    int devices = 1;
    int trials = 1;
    bool no_force = false;
    app.add_option("design", design_path, "Design file")->required();
    app.add_option("--sweep", sweep_spec, "start:stop:step")->required();
    app.add_option("--noise", noise, "Relative Gaussian noise")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--devices", devices, "Device count")->check(CLI::PositiveNumber);
    app.add_option("--trials", trials, "Trials per device")->check(CLI::PositiveNumber);
    app.add_flag("--no-force", no_force, "Leave force_N empty");
    app.add_option("--out", out_path, "Output path (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        const DesignFile file = load_design_file(design_path);
        CoronaModel model = file.design.corona;
        model.onset_voltage += onset_penalty(file.design.stage, file.onset_coeffs());
        const int n = file.design.stage_count;
        const double stages = geometric_stage_sum(file.degradation().factor, n);

        SynthOptions options;
        options.voltages = parse_sweep(sweep_spec);
        options.gap = file.design.stage.gap;
        options.relative_noise = noise;
        options.with_force = !no_force;

        std::vector<MeasuredCurve> curves;
        for (int d = 0; d < devices; ++d) {
            for (int t = 0; t < trials; ++t) {
                options.seed = seed * 1000003ULL + static_cast<unsigned long long>(d * trials + t);
                MeasuredCurve c = synthesize_curve(model, file.effective_medium(), options);
                c.device_id = "D" + std::to_string(d + 1);
                c.trial_id = std::to_string(t + 1);
                for (Sample& s : c.samples) {
                    s.current *= n;
                    if (s.force) {
                        *s.force *= stages;
                    }
                }
                curves.push_back(std::move(c));
            }
        }
        const std::string text = serialize_measurements(curves);
        if (out_path.empty()) {
            out << text;
        } else {
            write_text_file(out_path, text);
        }
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kOk;
}

}  // namespace eadkit::cli
