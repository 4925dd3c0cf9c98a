#include "cli.hpp"

#include "eadkit/design_file.hpp"
#include "eadkit/errors.hpp"
#include "eadkit/tables.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <unistd.h>
#include <sstream>

using namespace eadkit;
namespace fs = std::filesystem;

namespace {

const std::string kDataDir = EADKIT_DATA_DIR;
const std::string kAr5 = kDataDir + "/ar5_five_stage.json";

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = eadkit::cli::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

Run synth(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = eadkit::cli::run_synth(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("eadkit_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("voltage and sweep arguments") {
    CHECK(cli::parse_voltage("3.28kV") == doctest::Approx(3280.0));
    CHECK(cli::parse_voltage("3280V") == 3280.0);
    CHECK(cli::parse_voltage("3280") == 3280.0);
    CHECK_THROWS(cli::parse_voltage("fast"));
    CHECK_THROWS(cli::parse_voltage("-1kV"));
    const auto sweep = cli::parse_sweep("2.4kV:3.3kV:100V");
    REQUIRE(sweep.size() == 10);
    CHECK(sweep.front() == doctest::Approx(2400.0));
    CHECK(sweep.back() == doctest::Approx(3300.0));
    CHECK_THROWS(cli::parse_sweep("2.4kV:3.3kV"));
    CHECK_THROWS(cli::parse_sweep("3kV:2kV:1V"));
}

TEST_CASE("analyze at one voltage") {
    const Run r = run({"analyze", kAr5, "--voltage", "3.28kV"});
    REQUIRE(r.code == cli::kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["thrust_density_N_per_m2"].get<double>() == doctest::Approx(17.936).epsilon(1e-3));
    CHECK(j["total_thrust_N"].get<double>() == doctest::Approx(3.0899e-3).epsilon(1e-3));
    CHECK(j["efficiency_N_per_W"].get<double>() == doctest::Approx(1.86e-3).epsilon(1e-3));
    CHECK(j["per_stage"].size() == 5);
    CHECK(j["design"]["stage_count"] == 5);
}

TEST_CASE("sweep table") {
    TempDir tmp;
    const Run r = run({"sweep", kAr5, "--sweep", "2.4kV:3.3kV:100V", "--out", tmp / "s.csv"});
    REQUIRE(r.code == cli::kOk);
    const auto lines = lines_of(read_text_file(tmp / "s.csv"));
    REQUIRE(lines.size() == 11);
    CHECK(lines[0] == sweep_table_header());
    CHECK(lines[1].find(",2400,") != std::string::npos);
    CHECK(lines[10].find(",3300,") != std::string::npos);

    const Run j = run({"sweep", kAr5, "--sweep", "2.4kV:3.3kV:100V", "--format", "json"});
    REQUIRE(j.code == cli::kOk);
    CHECK(nlohmann::json::parse(j.out)["rows"].size() == 10);

    const Run hot = run({"sweep", kAr5, "--sweep", "5kV:6kV:500V"});
    REQUIRE(hot.code == cli::kOk);
    const auto hot_lines = lines_of(hot.out);
    REQUIRE(hot_lines.size() == 4);
    CHECK(hot_lines[3].substr(hot_lines[3].size() - 2) == ",0");
}

TEST_CASE("exit codes for bad input") {
    CHECK(run({}).code == cli::kInputError);
    CHECK(run({"analyze", kAr5}).code == cli::kInputError);
    CHECK(run({"analyze", kAr5, "--voltage", "3kV", "--sweep", "2kV:3kV:1kV"}).code == cli::kInputError);
    CHECK(run({"analyze", kDataDir + "/missing.json", "--voltage", "3kV"}).code == cli::kInputError);
    CHECK(run({"analyze", kAr5, "--voltage", "soon"}).code == cli::kInputError);
    CHECK(run({"frobnicate"}).code == cli::kInputError);

    TempDir tmp;
    std::string text = read_text_file(kAr5);
    const auto pos = text.find("\"tip_count\": 20");
    text.replace(pos, 15, "\"tip_count\": \"x\"");
    write_text_file(tmp / "bad.json", text);
    const Run bad = run({"analyze", tmp / "bad.json", "--voltage", "3kV"});
    CHECK(bad.code == cli::kInputError);
    CHECK(bad.err.find("tip_count") != std::string::npos);
}

TEST_CASE("hard violations exit with the infeasible code") {
    TempDir tmp;
    DesignFile f = load_design_file(kAr5);
    f.design.interstage_factor = 0.5;
    save_design_file(f, tmp / "arc.json");
    const Run r = run({"analyze", tmp / "arc.json", "--voltage", "3kV"});
    CHECK(r.code == cli::kInfeasible);
    CHECK(r.err.find(rules::interstage_arcing) != std::string::npos);

    const Run b = run({"analyze", kAr5, "--voltage", "6kV"});
    CHECK(b.code == cli::kInfeasible);
}

TEST_CASE("geometry export is byte-identical across runs") {
    TempDir tmp;
    REQUIRE(run({"geometry", kAr5, "--svg", tmp / "a.svg"}).code == cli::kOk);
    REQUIRE(run({"geometry", kAr5, "--svg", tmp / "b.svg"}).code == cli::kOk);
    const std::string a = read_text_file(tmp / "a.svg");
    CHECK(a == read_text_file(tmp / "b.svg"));
    CHECK(a.find("<svg") != std::string::npos);
    CHECK(run({"geometry", kAr5}).out == a);
}

TEST_CASE("optimize and pareto") {
    TempDir tmp;
    const Run r = run({"optimize", kDataDir + "/reference_space.json", "--threads", "4", "--voltage-step", "10V",
                       "--pareto", tmp / "front.csv"});
    REQUIRE(r.code == cli::kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["design"]["aspect_ratio"] == 5);
    CHECK(j["design"]["stage_count"] == 5);
    CHECK(j["evaluated_count"] == 50);

    const auto lines = lines_of(read_text_file(tmp / "front.csv"));
    REQUIRE(lines.size() >= 2);
    double last = -1.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const double density = std::stod(lines[i].substr(lines[i].find_last_of(',', lines[i].rfind(',') - 1) + 1));
        CHECK(density >= last);
        last = density;
    }

    const Run none = run({"optimize", kDataDir + "/reference_space.json", "--min-efficiency", "0.01", "--voltage-step",
                          "50V"});
    CHECK(none.code == cli::kInfeasible);
    CHECK(none.err.find("min_efficiency") != std::string::npos);
    CHECK(run({"optimize", kDataDir + "/reference_space.json", "--objective", "speed"}).code == cli::kInputError);
}

TEST_CASE("fit recovers the generating coefficients") {
    TempDir tmp;
    REQUIRE(synth({kAr5, "--sweep", "2.5kV:3.3kV:50V", "--out", tmp / "m.csv"}).code == cli::kOk);
    const Run r = run({"fit", tmp / "m.csv", kAr5, "--out", tmp / "fitted.json"});
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.find("devices 1") != std::string::npos);
    const DesignFile truth = load_design_file(kAr5);
    const DesignFile fitted = load_design_file(tmp / "fitted.json");
    CHECK(fitted.design.corona.conductance_coeff ==
          doctest::Approx(truth.design.corona.conductance_coeff).epsilon(1e-9));
    CHECK(fitted.design.corona.onset_voltage == doctest::Approx(truth.design.corona.onset_voltage).epsilon(1e-9));
    CHECK(fitted.design.corona.thrust_effectiveness ==
          doctest::Approx(truth.design.corona.thrust_effectiveness).epsilon(1e-9));

    // The refit file analyzes like the original.
    const auto a = nlohmann::json::parse(run({"analyze", kAr5, "--voltage", "3.1kV"}).out);
    const auto b = nlohmann::json::parse(run({"analyze", tmp / "fitted.json", "--voltage", "3.1kV"}).out);
    CHECK(b["total_thrust_N"].get<double>() == doctest::Approx(a["total_thrust_N"].get<double>()).epsilon(1e-9));
}

TEST_CASE("fit aggregates devices and trials") {
    TempDir tmp;
    REQUIRE(synth({kAr5, "--sweep", "2.5kV:3.3kV:50V", "--noise", "0.02", "--seed", "3", "--devices", "3", "--trials",
                   "4", "--out", tmp / "m.csv"})
                .code == cli::kOk);
    const Run r = run({"fit", tmp / "m.csv", kAr5, "--out", tmp / "fitted.json"});
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.find("devices 3") != std::string::npos);
    const DesignFile truth = load_design_file(kAr5);
    const DesignFile fitted = load_design_file(tmp / "fitted.json");
    CHECK(fitted.design.corona.conductance_coeff ==
          doctest::Approx(truth.design.corona.conductance_coeff).epsilon(0.05));

    const Run pooled = run({"fit", tmp / "m.csv", kAr5, "--pooled"});
    REQUIRE(pooled.code == cli::kOk);
    CHECK(pooled.err.find("pooled") != std::string::npos);
    CHECK(parse_design_file(pooled.out).calibration.has_value());
}

TEST_CASE("fit without data") {
    TempDir tmp;
    write_text_file(tmp / "empty.csv", std::string(kMeasurementHeader) + "\n");
    CHECK(run({"fit", tmp / "empty.csv", kAr5}).code == cli::kInsufficientData);
    write_text_file(tmp / "two.csv", std::string(kMeasurementHeader) + "\nD1,1,3000,1e-05,\nD1,1,3100,2e-05,\n");
    CHECK(run({"fit", tmp / "two.csv", kAr5}).code == cli::kInsufficientData);
    write_text_file(tmp / "bad.csv", "v,i\n");
    CHECK(run({"fit", tmp / "bad.csv", kAr5}).code == cli::kInputError);
}

TEST_CASE("synth is deterministic per seed") {
    const auto a = synth({kAr5, "--sweep", "2.5kV:3.3kV:100V", "--noise", "0.05", "--seed", "9"});
    const auto b = synth({kAr5, "--sweep", "2.5kV:3.3kV:100V", "--noise", "0.05", "--seed", "9"});
    const auto c = synth({kAr5, "--sweep", "2.5kV:3.3kV:100V", "--noise", "0.05", "--seed", "10"});
    REQUIRE(a.code == cli::kOk);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
    CHECK(lines_of(a.out).size() == 10);
    CHECK(synth({kAr5}).code == cli::kInputError);
}

}
