#pragma once

// JSON design and design-space files.
//
// Field names carry their unit suffix. Lengths are accepted as `<name>_m` or
// `<name>_mm` and voltages as `<name>_V` or `<name>_kV`; files are always
// written in SI.

#include "eadkit/calibrate.hpp"
#include "eadkit/optimize.hpp"
#include "eadkit/physics.hpp"
#include "eadkit/stack.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace eadkit {

inline constexpr int kSchemaVersion = 1;

struct DesignFile {
    int schema_version = kSchemaVersion;
    ThrusterDesign design;
    std::optional<CalibrationParams> calibration;
    FluidMedium medium;
    std::string provenance;

    // Effective medium and model coefficients for analysis.
    FluidMedium effective_medium() const;
    StageDegradation degradation() const;
    OnsetPenaltyCoeffs onset_coeffs() const;

    friend bool operator==(const DesignFile&, const DesignFile&) = default;
};

// `source` names the input in SchemaError diagnostics.
DesignFile parse_design_file(const std::string& text, const std::string& source = "<design>");
std::string serialize_design_file(const DesignFile& file);

DesignFile load_design_file(const std::filesystem::path& path);
void save_design_file(const DesignFile& file, const std::filesystem::path& path);

struct SpaceFile {
    int schema_version = kSchemaVersion;
    DesignSpace space;
    CalibrationParams calibration;
    FluidMedium medium;
    double voltage_step = 1.0;
};

SpaceFile parse_space_file(const std::string& text, const std::string& source = "<space>");
std::string serialize_space_file(const SpaceFile& file);
SpaceFile load_space_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace eadkit
