#include "eadkit/design_file.hpp"

#include "eadkit/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace eadkit {

namespace {

using json = nlohmann::ordered_json;

std::size_t line_at_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of `"key"`; 0 when absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
    const std::size_t pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 0 : line_at_offset(text, pos);
}

class Reader {
public:
    Reader(const json& node, std::string path, const std::string& text, const std::string& source)
        : node_(node), path_(std::move(path)), text_(text), source_(source) {
        if (!node_.is_object()) {
            fail("", "expected an object");
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        const std::string field = key.empty() ? path_ : join(key);
        throw SchemaError(source_, key.empty() ? 0 : line_of_key(text_, key), field, message);
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    Reader child(const std::string& key) const {
        if (!node_.contains(key)) {
            fail(key, "missing required object");
        }
        return Reader(node_.at(key), join(key), text_, source_);
    }

    std::optional<Reader> optional_child(const std::string& key) const {
        if (!node_.contains(key)) {
            return std::nullopt;
        }
        return Reader(node_.at(key), join(key), text_, source_);
    }

    double number(const std::string& key) const {
        if (!node_.contains(key)) {
            fail(key, "missing required number");
        }
        return as_number(key, node_.at(key));
    }

    double number_or(const std::string& key, double fallback) const {
        return node_.contains(key) ? number(key) : fallback;
    }

    int integer(const std::string& key) const {
        if (!node_.contains(key)) {
            fail(key, "missing required integer");
        }
        return as_integer(key, node_.at(key));
    }

    int integer_or(const std::string& key, int fallback) const {
        return node_.contains(key) ? integer(key) : fallback;
    }

    // `<key>_<si>` or `<key>_<alt>` scaled by `alt_scale`.
    std::optional<double> scaled(const std::string& key, const char* si, const char* alt, double alt_scale) const {
        const std::string si_key = key + "_" + si;
        const std::string alt_key = key + "_" + alt;
        if (node_.contains(si_key) && node_.contains(alt_key)) {
            fail(si_key, "given in two units");
        }
        if (node_.contains(si_key)) {
            return number(si_key);
        }
        if (node_.contains(alt_key)) {
            return number(alt_key) * alt_scale;
        }
        return std::nullopt;
    }

    double length(const std::string& key) const { return require_scaled(key, "m", "mm", 1.0e-3); }
    double length_or(const std::string& key, double fallback) const {
        return scaled(key, "m", "mm", 1.0e-3).value_or(fallback);
    }
    double voltage(const std::string& key) const { return require_scaled(key, "V", "kV", 1.0e3); }
    double voltage_or(const std::string& key, double fallback) const {
        return scaled(key, "V", "kV", 1.0e3).value_or(fallback);
    }

    std::string string_or(const std::string& key, const std::string& fallback) const {
        if (!node_.contains(key)) {
            return fallback;
        }
        if (!node_.at(key).is_string()) {
            fail(key, "expected a string");
        }
        return node_.at(key).get<std::string>();
    }

    std::vector<double> number_list(const std::string& key) const {
        const json& arr = array(key);
        std::vector<double> out;
        for (const json& v : arr) {
            out.push_back(as_number(key, v));
        }
        return out;
    }

    std::vector<int> integer_list(const std::string& key) const {
        const json& arr = array(key);
        std::vector<int> out;
        for (const json& v : arr) {
            out.push_back(as_integer(key, v));
        }
        return out;
    }

    std::optional<std::vector<double>> length_list(const std::string& key) const {
        if (has(key + "_m")) {
            return number_list(key + "_m");
        }
        if (has(key + "_mm")) {
            auto values = number_list(key + "_mm");
            for (double& v : values) {
                v *= 1.0e-3;
            }
            return values;
        }
        return std::nullopt;
    }

    const std::string& path() const { return path_; }

private:
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double require_scaled(const std::string& key, const char* si, const char* alt, double alt_scale) const {
        const auto value = scaled(key, si, alt, alt_scale);
        if (!value) {
            fail(key + "_" + si, std::string("missing (give ") + key + "_" + si + " or " + key + "_" + alt + ")");
        }
        return *value;
    }

    const json& array(const std::string& key) const {
        if (!node_.contains(key)) {
            fail(key, "missing required list");
        }
        const json& arr = node_.at(key);
        if (!arr.is_array()) {
            fail(key, "expected a list");
        }
        return arr;
    }

    double as_number(const std::string& key, const json& v) const {
        if (!v.is_number()) {
            fail(key, "expected a number");
        }
        return v.get<double>();
    }

    int as_integer(const std::string& key, const json& v) const {
        if (!v.is_number_integer()) {
            fail(key, "expected an integer");
        }
        return v.get<int>();
    }

    const json& node_;
    std::string path_;
    const std::string& text_;
    const std::string& source_;
};

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(source, line_at_offset(text, e.byte > 0 ? e.byte - 1 : 0), "", e.what());
    }
}

template <typename F>
void check_invariants(const Reader& r, const std::string& key, F&& check) {
    try {
        check();
    } catch (const DomainError& e) {
        r.fail(key, e.what());
    }
}

FluidMedium read_medium(const Reader& r) {
    FluidMedium m;
    m.ion_mobility = r.number_or("ion_mobility_m2_per_Vs", m.ion_mobility);
    m.permittivity = r.number_or("permittivity_F_per_m", m.permittivity);
    m.air_density = r.number_or("air_density_kg_per_m3", m.air_density);
    m.kinematic_viscosity = r.number_or("kinematic_viscosity_m2_per_s", m.kinematic_viscosity);
    m.breakdown_field = r.number_or("breakdown_field_V_per_m", m.breakdown_field);
    return m;
}

json write_medium(const FluidMedium& m) {
    json j;
    j["ion_mobility_m2_per_Vs"] = m.ion_mobility;
    j["permittivity_F_per_m"] = m.permittivity;
    j["air_density_kg_per_m3"] = m.air_density;
    j["kinematic_viscosity_m2_per_s"] = m.kinematic_viscosity;
    j["breakdown_field_V_per_m"] = m.breakdown_field;
    return j;
}

CoronaModel read_corona(const Reader& r) {
    CoronaModel c;
    c.conductance_coeff = r.number("conductance_coeff_A_per_V2");
    c.onset_voltage = r.voltage("onset_voltage");
    c.thrust_effectiveness = r.number_or("thrust_effectiveness", 1.0);
    return c;
}

json write_corona(const CoronaModel& c) {
    json j;
    j["conductance_coeff_A_per_V2"] = c.conductance_coeff;
    j["onset_voltage_V"] = c.onset_voltage;
    j["thrust_effectiveness"] = c.thrust_effectiveness;
    return j;
}

CollectorGrid read_collector(const std::optional<Reader>& r) {
    CollectorGrid g;
    if (r) {
        g.wire_width = r->length_or("wire_width", g.wire_width);
        g.pitch = r->length_or("pitch", g.pitch);
    }
    return g;
}

json write_collector(const CollectorGrid& g) {
    json j;
    j["wire_width_m"] = g.wire_width;
    j["pitch_m"] = g.pitch;
    return j;
}

StageGeometry read_stage(const Reader& r) {
    StageGeometry s;
    const Reader e = r.child("emitter");
    s.emitter.inner_diameter = e.length("inner_diameter");
    s.emitter.outer_diameter = e.length("outer_diameter");
    s.emitter.tip_count = e.integer("tip_count");
    s.emitter.tip_angle_deg = e.number_or("tip_angle_deg", s.emitter.tip_angle_deg);
    s.emitter.bend_depth = e.length_or("bend_depth", s.emitter.bend_depth);
    s.emitter.aspect_ratio = e.number_or("aspect_ratio", 1.0);
    s.collector = read_collector(r.optional_child("collector"));
    s.gap = r.length("gap");
    s.duct_inner_height = r.length("duct_inner_height");
    s.duct_inner_width = r.length_or("duct_inner_width", s.duct_inner_height * s.emitter.aspect_ratio);
    return s;
}

json write_stage(const StageGeometry& s) {
    json e;
    e["inner_diameter_m"] = s.emitter.inner_diameter;
    e["outer_diameter_m"] = s.emitter.outer_diameter;
    e["tip_count"] = s.emitter.tip_count;
    e["tip_angle_deg"] = s.emitter.tip_angle_deg;
    e["bend_depth_m"] = s.emitter.bend_depth;
    e["aspect_ratio"] = s.emitter.aspect_ratio;
    json j;
    j["gap_m"] = s.gap;
    j["duct_inner_height_m"] = s.duct_inner_height;
    j["duct_inner_width_m"] = s.duct_inner_width;
    j["emitter"] = e;
    j["collector"] = write_collector(s.collector);
    return j;
}

CalibrationParams read_calibration(const Reader& r) {
    CalibrationParams c;
    c.corona = read_corona(r.child("corona"));
    c.degradation.factor = r.number_or("degradation_factor", 1.0);
    c.onset_wall_coeff = r.voltage_or("onset_wall_coeff", c.onset_wall_coeff);
    c.onset_tip_coeff = r.voltage_or("onset_tip_coeff", c.onset_tip_coeff);
    if (r.has("ion_mobility_override_m2_per_Vs")) {
        c.ion_mobility_override = r.number("ion_mobility_override_m2_per_Vs");
    }
    if (auto area = r.scaled("conductance_reference_area", "m2", "mm2", 1.0e-6)) {
        c.conductance_reference_area = *area;
    }
    check_invariants(r, "corona", [&] { validate(c); });
    return c;
}

json write_calibration(const CalibrationParams& c) {
    json j;
    j["corona"] = write_corona(c.corona);
    j["degradation_factor"] = c.degradation.factor;
    j["onset_wall_coeff_V"] = c.onset_wall_coeff;
    j["onset_tip_coeff_V"] = c.onset_tip_coeff;
    if (c.ion_mobility_override) {
        j["ion_mobility_override_m2_per_Vs"] = *c.ion_mobility_override;
    }
    if (c.conductance_reference_area) {
        j["conductance_reference_area_m2"] = *c.conductance_reference_area;
    }
    return j;
}

int read_schema_version(const Reader& root) {
    const int version = root.integer("schema_version");
    if (version != kSchemaVersion) {
        root.fail("schema_version", "unsupported schema version " + std::to_string(version));
    }
    return version;
}

}  // namespace

FluidMedium DesignFile::effective_medium() const {
    return calibration ? calibration->apply_to(medium) : medium;
}

StageDegradation DesignFile::degradation() const {
    return calibration ? calibration->degradation : StageDegradation{};
}

OnsetPenaltyCoeffs DesignFile::onset_coeffs() const {
    return calibration ? calibration->onset_coeffs() : default_onset_coeffs();
}

DesignFile parse_design_file(const std::string& text, const std::string& source) {
    const json doc = parse_json(text, source);
    const Reader root(doc, "", text, source);
    DesignFile file;
    file.schema_version = read_schema_version(root);
    file.provenance = root.string_or("provenance", "");
    if (auto m = root.optional_child("medium")) {
        file.medium = read_medium(*m);
        check_invariants(root, "medium", [&] { validate(file.medium); });
    }
    const Reader d = root.child("design");
    file.design.stage = read_stage(d.child("stage"));
    file.design.stage_count = d.integer("stage_count");
    file.design.interstage_factor = d.number_or("interstage_factor", kPreferredInterstageFactor);
    file.design.corona = read_corona(d.child("corona"));
    check_invariants(root, "design", [&] { validate(file.design); });
    if (auto c = root.optional_child("calibration")) {
        file.calibration = read_calibration(*c);
    }
    return file;
}

std::string serialize_design_file(const DesignFile& file) {
    json design;
    design["stage_count"] = file.design.stage_count;
    design["interstage_factor"] = file.design.interstage_factor;
    design["stage"] = write_stage(file.design.stage);
    design["corona"] = write_corona(file.design.corona);

    json doc;
    doc["schema_version"] = file.schema_version;
    doc["provenance"] = file.provenance;
    doc["medium"] = write_medium(file.medium);
    doc["design"] = design;
    if (file.calibration) {
        doc["calibration"] = write_calibration(*file.calibration);
    }
    return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError(path.string(), 0, "", "cannot open file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

DesignFile load_design_file(const std::filesystem::path& path) {
    return parse_design_file(read_text_file(path), path.string());
}

void save_design_file(const DesignFile& file, const std::filesystem::path& path) {
    write_text_file(path, serialize_design_file(file));
}

SpaceFile parse_space_file(const std::string& text, const std::string& source) {
    const json doc = parse_json(text, source);
    const Reader root(doc, "", text, source);
    SpaceFile file;
    file.schema_version = read_schema_version(root);
    if (auto m = root.optional_child("medium")) {
        file.medium = read_medium(*m);
        check_invariants(root, "medium", [&] { validate(file.medium); });
    }
    if (auto c = root.optional_child("calibration")) {
        file.calibration = read_calibration(*c);
    }
    file.voltage_step = root.voltage_or("voltage_step", 1.0);
    if (!(file.voltage_step > 0.0)) {
        root.fail("voltage_step_V", "must be positive");
    }

    const Reader s = root.child("space");
    DesignSpace& space = file.space;
    space.aspect_ratios = s.integer_list("aspect_ratios");
    space.stage_counts = s.integer_list("stage_counts");
    if (s.has("tip_counts")) {
        space.tip_counts = s.integer_list("tip_counts");
    }
    if (auto gaps = s.length_list("gaps")) {
        space.gaps = *gaps;
    }
    if (s.has("interstage_factors")) {
        space.interstage_factors = s.number_list("interstage_factors");
    }
    space.voltage_min = s.voltage("voltage_min");
    space.voltage_max = s.voltage("voltage_max");
    space.duct_height = s.length_or("duct_height", space.duct_height);
    space.lateral_clearance = s.length_or("lateral_clearance", space.lateral_clearance);
    space.bend_depth = s.length_or("bend_depth", space.bend_depth);
    space.tip_angle_deg = s.number_or("tip_angle_deg", space.tip_angle_deg);
    space.collector = read_collector(s.optional_child("collector"));
    check_invariants(root, "space", [&] { validate(space); });
    return file;
}

std::string serialize_space_file(const SpaceFile& file) {
    const DesignSpace& sp = file.space;
    json space;
    space["aspect_ratios"] = sp.aspect_ratios;
    space["stage_counts"] = sp.stage_counts;
    space["tip_counts"] = sp.tip_counts;
    space["gaps_m"] = sp.gaps;
    space["interstage_factors"] = sp.interstage_factors;
    space["voltage_min_V"] = sp.voltage_min;
    space["voltage_max_V"] = sp.voltage_max;
    space["duct_height_m"] = sp.duct_height;
    space["lateral_clearance_m"] = sp.lateral_clearance;
    space["bend_depth_m"] = sp.bend_depth;
    space["tip_angle_deg"] = sp.tip_angle_deg;
    space["collector"] = write_collector(sp.collector);

    json doc;
    doc["schema_version"] = file.schema_version;
    doc["voltage_step_V"] = file.voltage_step;
    doc["medium"] = write_medium(file.medium);
    doc["calibration"] = write_calibration(file.calibration);
    doc["space"] = space;
    return doc.dump(2) + "\n";
}

SpaceFile load_space_file(const std::filesystem::path& path) {
    return parse_space_file(read_text_file(path), path.string());
}

}  // namespace eadkit
