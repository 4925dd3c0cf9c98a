#pragma once

// Parametric emitter/collector/duct geometry and the tip spacing rules.
//
// All lengths are stored in meters. Cross-sections are stadiums: a rectangle of
// length (w - h) capped by two semicircles of diameter h. An aspect ratio of 1
// degenerates to a circle.

#include <cstddef>
#include <string>
#include <vector>

namespace eadkit {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

using Polyline = std::vector<Point2>;  // closed; the last vertex connects to the first

struct EmitterRing {
    double inner_diameter = 4.0e-3;  // d1, where the bent tips reach
    double outer_diameter = 6.0e-3;  // d2, where the triangles begin (annulus lip)
    int tip_count = 4;
    double tip_angle_deg = 5.0;      // carried as metadata, also sets the tip base width
    double bend_depth = 1.0e-3;
    double aspect_ratio = 1.0;       // w / h

    friend bool operator==(const EmitterRing&, const EmitterRing&) = default;
};

struct CollectorGrid {
    double wire_width = 50.0e-6;
    double pitch = 1.0e-3;

    friend bool operator==(const CollectorGrid&, const CollectorGrid&) = default;
};

struct StageGeometry {
    EmitterRing emitter;
    CollectorGrid collector;
    double gap = 2.0e-3;                // d, emitter tip to collector grid
    double duct_inner_height = 6.0e-3;  // h
    double duct_inner_width = 6.0e-3;   // w = h * aspect_ratio

    // Per-side distance from the tip circle to the annulus lip, (d2 - d1) / 2.
    double lateral_clearance() const noexcept {
        return 0.5 * (emitter.outer_diameter - emitter.inner_diameter);
    }
    double tip_height() const noexcept { return lateral_clearance(); }
    double straight_length() const noexcept { return duct_inner_width - duct_inner_height; }

    friend bool operator==(const StageGeometry&, const StageGeometry&) = default;
};

// Convenience builder for the duct family studied here: annulus lip on the duct
// wall (d2 = h), tips inset by `lateral_clearance`.
struct StageParams {
    double duct_height = 6.0e-3;
    double aspect_ratio = 1.0;
    int tip_count = 0;  // 0 selects 4 * aspect_ratio
    double lateral_clearance = 1.0e-3;
    double gap = 2.0e-3;
    double bend_depth = 1.0e-3;
    double tip_angle_deg = 5.0;
    CollectorGrid collector{};
};

StageGeometry make_stage(const StageParams& params);

// Throws DomainError when an invariant of the stage or its parts is broken.
void validate(const StageGeometry& stage);

// Stadium contour centred on the origin, long axis along x. Arc length is
// measured counter-clockwise from the apex of the +x cap.
class Stadium {
public:
    Stadium(double height, double straight_length);

    double radius() const noexcept { return radius_; }
    double straight_length() const noexcept { return straight_; }
    double perimeter() const noexcept;

    Point2 point_at(double arc) const;
    Point2 outward_normal_at(double arc) const;

    // Arc position on `other` (a parallel offset of this contour) at the same
    // normal direction as `arc` on this contour.
    double map_arc_to(const Stadium& other, double arc) const;

private:
    double radius_;
    double straight_;
};

double warburg_radius(double gap);
double chord_spacing(double inner_diameter, int tip_count);
double tip_to_lip_clearance(double lateral, double bend_depth);
double inner_area(const StageGeometry& stage);

// Tip base width on the outer contour for the stage's tip angle and height.
double tip_base_width(const StageGeometry& stage);

// Emitter tip apex positions on the d1 contour. Consecutive tips are separated
// by equal straight-line distance, starting from the +x cap apex.
std::vector<Point2> layout_emitters(const StageGeometry& stage);

// Smallest pairwise distance; +inf for fewer than two points.
double nearest_neighbor_spacing(const std::vector<Point2>& points);

enum class Severity { soft, hard };

struct Violation {
    std::string rule_id;
    Severity severity = Severity::soft;
    double measured = 0.0;
    double threshold = 0.0;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ConstraintReport {
    std::vector<Violation> violations;

    bool empty() const noexcept { return violations.empty(); }
    bool has_hard() const noexcept;
    bool has_soft() const noexcept;
    const Violation* first_hard() const noexcept;

    friend bool operator==(const ConstraintReport&, const ConstraintReport&) = default;
};

namespace rules {
inline constexpr const char* wall_clearance = "wall_clearance";
inline constexpr const char* tip_spacing = "tip_spacing";
inline constexpr const char* interstage_arcing = "interstage_arcing";
inline constexpr const char* interstage_reverse_corona = "interstage_reverse_corona";
inline constexpr const char* emitter_layout = "emitter_layout";
}  // namespace rules

// Inter-stage factors below this arc along the duct; up to the preferred value
// the reverse-corona regime makes discharge unpredictable.
inline constexpr double kMinInterstageFactor = 1.0;
inline constexpr double kPreferredInterstageFactor = 1.5;

ConstraintReport clearance_check(const StageGeometry& stage, double interstage_factor);

// Slopes of the piecewise-linear onset shift, in volts per unit normalized deficit.
struct OnsetPenaltyCoeffs {
    double wall = 0.0;
    double tip = 0.0;

    friend bool operator==(const OnsetPenaltyCoeffs&, const OnsetPenaltyCoeffs&) = default;
};

// Wall slope anchored so that a 1.25 mm tip-to-lip clearance at a 2 mm gap
// raises onset by 200 V; the tip slope defaults to the same value.
OnsetPenaltyCoeffs default_onset_coeffs();

struct ClearanceDeficits {
    double wall = 0.0;  // max(0, r - clearance) / r
    double tip = 0.0;   // max(0, 2r - spacing) / (2r)
};

ClearanceDeficits clearance_deficits(const StageGeometry& stage);

double onset_penalty(const StageGeometry& stage, const OnsetPenaltyCoeffs& coeffs);
double onset_penalty(const StageGeometry& stage);

struct OutlineOptions {
    double rim_width = 1.0e-3;
    int cap_segments = 64;  // vertices per full circle on cap arcs
};

struct ElectrodeOutline {
    std::vector<Polyline> emitter;    // [0] outer rim, [1] lip edge with tips
    std::vector<Polyline> collector;  // [0] frame, then one rectangle per wire
    std::size_t emitter_base_vertex_count = 0;  // lip-edge vertices that are not tip vertices
};

ElectrodeOutline electrode_outline(const StageGeometry& stage, const OutlineOptions& options = {});

}  // namespace eadkit
