#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eadkit::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kInfeasible = 3,
    kInsufficientData = 4,
};

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Test data generator: synthetic measurement CSV for a design file.
int run_synth(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "3.28kV", "3280V" or "3280".
double parse_voltage(const std::string& text);

// "start:stop:step", each a voltage.
std::vector<double> parse_sweep(const std::string& text);

}  // namespace eadkit::cli
