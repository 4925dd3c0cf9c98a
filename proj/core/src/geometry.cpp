#include "eadkit/geometry.hpp"

#include "eadkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace eadkit {

namespace {

constexpr double kPi = std::numbers::pi;

double distance(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

bool is_circular(const StageGeometry& stage) {
    return stage.straight_length() <= 1.0e-12 * stage.duct_inner_height;
}

// Arc position of the point one chord `s` ahead of `arc`, searching forward.
double advance_by_chord(const Stadium& contour, double arc, double s, double step) {
    const Point2 origin = contour.point_at(arc);
    const double perimeter = contour.perimeter();
    double lo = 0.0;
    while (lo + step < perimeter && distance(origin, contour.point_at(arc + lo + step)) < s) {
        lo += step;
    }
    double hi = lo + step;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (distance(origin, contour.point_at(arc + mid)) < s) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return arc + hi;
}

// Arc positions of the tips on the d1 contour.
std::vector<double> layout_arcs(const StageGeometry& stage) {
    const int n = stage.emitter.tip_count;
    const Stadium contour(stage.emitter.inner_diameter, stage.straight_length());
    const double perimeter = contour.perimeter();
    std::vector<double> arcs(static_cast<std::size_t>(n));

    double spacing = std::numeric_limits<double>::infinity();
    if (is_circular(stage)) {
        for (int i = 0; i < n; ++i) {
            arcs[static_cast<std::size_t>(i)] = perimeter * static_cast<double>(i) / static_cast<double>(n);
        }
        if (n >= 2) {
            spacing = chord_spacing(stage.emitter.inner_diameter, n);
        }
    } else {
        // Equal-chord closed polygon: bisect on the chord until n chords close the loop.
        const double step = perimeter / (64.0 * n);
        auto walk = [&](double s) {
            double arc = 0.0;
            for (int i = 0; i < n; ++i) {
                arc = advance_by_chord(contour, arc, s, step);
            }
            return arc;
        };
        double lo = 0.0;
        double hi = perimeter / n;
        for (int i = 0; i < 64; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (walk(mid) < perimeter) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        spacing = 0.5 * (lo + hi);
        double arc = 0.0;
        for (int i = 0; i < n; ++i) {
            arcs[static_cast<std::size_t>(i)] = arc;
            arc = advance_by_chord(contour, arc, spacing, step);
        }
    }

    const double base = tip_base_width(stage);
    if (n >= 2 && spacing <= base) {
        throw LayoutError("cannot place " + std::to_string(n) + " tips: spacing " + std::to_string(spacing * 1e3) +
                          " mm is not wider than the tip base " + std::to_string(base * 1e3) + " mm");
    }
    return arcs;
}

std::vector<double> contour_samples(const Stadium& contour, int cap_segments) {
    const int quarter = std::max(1, cap_segments / 4);
    const double r = contour.radius();
    const double l = contour.straight_length();
    std::vector<double> arcs;
    for (int k = 0; k < quarter; ++k) {
        arcs.push_back(r * (kPi / 2.0) * k / quarter);
    }
    if (l > 0.0) {
        arcs.push_back(r * kPi / 2.0);
    }
    const double left = r * kPi / 2.0 + l;
    for (int k = 0; k < 2 * quarter; ++k) {
        arcs.push_back(left + r * kPi * k / (2 * quarter));
    }
    if (l > 0.0) {
        arcs.push_back(left + r * kPi);
    }
    const double lower = left + r * kPi + l;
    for (int k = 0; k < quarter; ++k) {
        arcs.push_back(lower + r * (kPi / 2.0) * k / quarter);
    }
    return arcs;
}

Polyline sample_contour(const Stadium& contour, int cap_segments) {
    Polyline out;
    for (double arc : contour_samples(contour, cap_segments)) {
        out.push_back(contour.point_at(arc));
    }
    return out;
}

double wrap(double arc, double perimeter) {
    double r = std::fmod(arc, perimeter);
    if (r < 0.0) {
        r += perimeter;
    }
    return r;
}

double cyclic_distance(double a, double b, double perimeter) {
    const double d = std::abs(wrap(a - b, perimeter));
    return std::min(d, perimeter - d);
}

Polyline rectangle(double x0, double y0, double x1, double y1) {
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw DomainError(message);
    }
}

}  // namespace

StageGeometry make_stage(const StageParams& params) {
    StageGeometry stage;
    stage.emitter.outer_diameter = params.duct_height;
    stage.emitter.inner_diameter = params.duct_height - 2.0 * params.lateral_clearance;
    stage.emitter.aspect_ratio = params.aspect_ratio;
    stage.emitter.tip_count =
        params.tip_count > 0 ? params.tip_count : static_cast<int>(std::lround(4.0 * params.aspect_ratio));
    stage.emitter.bend_depth = params.bend_depth;
    stage.emitter.tip_angle_deg = params.tip_angle_deg;
    stage.collector = params.collector;
    stage.gap = params.gap;
    stage.duct_inner_height = params.duct_height;
    stage.duct_inner_width = params.duct_height * params.aspect_ratio;
    validate(stage);
    return stage;
}

void validate(const StageGeometry& stage) {
    const EmitterRing& e = stage.emitter;
    require(e.inner_diameter > 0.0, "emitter inner diameter must be positive");
    require(e.inner_diameter < e.outer_diameter, "emitter inner diameter must be below the outer diameter");
    require(e.tip_count >= 1, "emitter needs at least one tip");
    require(e.aspect_ratio >= 1.0, "aspect ratio must be at least 1");
    require(e.tip_angle_deg > 0.0 && e.tip_angle_deg < 180.0, "tip angle must lie in (0, 180) degrees");
    require(e.bend_depth >= 0.0, "bend depth must be non-negative");
    if (e.aspect_ratio > 1.0) {
        require(std::abs(4.0 * e.aspect_ratio - e.tip_count) < 1.0e-9,
                "tip count must equal 4 x aspect ratio for aspect ratios above 1");
    }
    require(stage.collector.wire_width > 0.0 && stage.collector.wire_width < stage.collector.pitch,
            "collector wire width must lie in (0, pitch)");
    require(stage.gap > 0.0, "gap must be positive");
    require(stage.duct_inner_height > 0.0, "duct height must be positive");
    require(stage.duct_inner_width >= stage.duct_inner_height, "duct width must be at least the duct height");
    require(std::abs(stage.duct_inner_width - stage.duct_inner_height * e.aspect_ratio) <=
                1.0e-9 * stage.duct_inner_width,
            "duct width must equal height x aspect ratio");
    require(e.outer_diameter <= stage.duct_inner_height * (1.0 + 1.0e-12),
            "emitter outer diameter exceeds the duct height");
}

Stadium::Stadium(double height, double straight_length) : radius_(0.5 * height), straight_(straight_length) {
    if (!(height > 0.0) || straight_length < 0.0) {
        throw DomainError("stadium needs positive height and non-negative straight length");
    }
}

double Stadium::perimeter() const noexcept {
    return 2.0 * kPi * radius_ + 2.0 * straight_;
}

namespace {

// Segment index (0..4) and local coordinate: angle on caps, distance on straights.
std::pair<int, double> locate(double arc, double r, double l) {
    const double quarter = r * kPi / 2.0;
    if (arc < quarter) {
        return {0, arc / r};
    }
    arc -= quarter;
    if (arc < l) {
        return {1, arc};
    }
    arc -= l;
    if (arc < 2.0 * quarter) {
        return {2, kPi / 2.0 + arc / r};
    }
    arc -= 2.0 * quarter;
    if (arc < l) {
        return {3, arc};
    }
    arc -= l;
    return {4, 3.0 * kPi / 2.0 + arc / r};
}

double unlocate(int segment, double local, double r, double l) {
    const double quarter = r * kPi / 2.0;
    switch (segment) {
    case 0:
        return local * r;
    case 1:
        return quarter + local;
    case 2:
        return quarter + l + (local - kPi / 2.0) * r;
    case 3:
        return 3.0 * quarter + l + local;
    default:
        return 3.0 * quarter + 2.0 * l + (local - 3.0 * kPi / 2.0) * r;
    }
}

}  // namespace

Point2 Stadium::point_at(double arc) const {
    const double h = 0.5 * straight_;
    const auto [segment, local] = locate(wrap(arc, perimeter()), radius_, straight_);
    switch (segment) {
    case 0:
    case 4:
        return {h + radius_ * std::cos(local), radius_ * std::sin(local)};
    case 1:
        return {h - local, radius_};
    case 2:
        return {-h + radius_ * std::cos(local), radius_ * std::sin(local)};
    default:
        return {-h + local, -radius_};
    }
}

Point2 Stadium::outward_normal_at(double arc) const {
    const auto [segment, local] = locate(wrap(arc, perimeter()), radius_, straight_);
    switch (segment) {
    case 1:
        return {0.0, 1.0};
    case 3:
        return {0.0, -1.0};
    default:
        return {std::cos(local), std::sin(local)};
    }
}

double Stadium::map_arc_to(const Stadium& other, double arc) const {
    const auto [segment, local] = locate(wrap(arc, perimeter()), radius_, straight_);
    return unlocate(segment, local, other.radius_, other.straight_);
}

double warburg_radius(double gap) {
    if (!(gap > 0.0)) {
        throw DomainError("warburg_radius: gap must be positive");
    }
    return std::atan(kPi / 3.0) * gap;
}

double chord_spacing(double inner_diameter, int tip_count) {
    if (tip_count < 2) {
        throw DomainError("chord_spacing: needs at least two tips");
    }
    if (!(inner_diameter > 0.0)) {
        throw DomainError("chord_spacing: inner diameter must be positive");
    }
    return inner_diameter * std::sin(kPi / tip_count);
}

double tip_to_lip_clearance(double lateral, double bend_depth) {
    if (lateral < 0.0 || bend_depth < 0.0) {
        throw DomainError("tip_to_lip_clearance: distances must be non-negative");
    }
    return std::hypot(lateral, bend_depth);
}

double inner_area(const StageGeometry& stage) {
    const double h = stage.duct_inner_height;
    const double w = stage.duct_inner_width;
    if (!(h > 0.0) || w < h) {
        throw DomainError("inner_area: need duct width >= height > 0");
    }
    return kPi * (h / 2.0) * (h / 2.0) + (w - h) * h;
}

double tip_base_width(const StageGeometry& stage) {
    const double half_angle = 0.5 * stage.emitter.tip_angle_deg * kPi / 180.0;
    return 2.0 * stage.tip_height() * std::tan(half_angle);
}

std::vector<Point2> layout_emitters(const StageGeometry& stage) {
    validate(stage);
    const Stadium contour(stage.emitter.inner_diameter, stage.straight_length());
    std::vector<Point2> points;
    for (double arc : layout_arcs(stage)) {
        points.push_back(contour.point_at(arc));
    }
    return points;
}

double nearest_neighbor_spacing(const std::vector<Point2>& points) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            best = std::min(best, distance(points[i], points[j]));
        }
    }
    return best;
}

bool ConstraintReport::has_hard() const noexcept {
    return first_hard() != nullptr;
}

bool ConstraintReport::has_soft() const noexcept {
    return std::any_of(violations.begin(), violations.end(),
                       [](const Violation& v) { return v.severity == Severity::soft; });
}

const Violation* ConstraintReport::first_hard() const noexcept {
    for (const Violation& v : violations) {
        if (v.severity == Severity::hard) {
            return &v;
        }
    }
    return nullptr;
}

ConstraintReport clearance_check(const StageGeometry& stage, double interstage_factor) {
    validate(stage);
    ConstraintReport report;
    const double r = warburg_radius(stage.gap);

    const double wall = tip_to_lip_clearance(stage.lateral_clearance(), stage.emitter.bend_depth);
    if (wall < r) {
        report.violations.push_back({rules::wall_clearance, Severity::soft, wall, r,
                                     "tip-to-lip clearance is inside the space-charge radius"});
    }

    try {
        const double spacing = nearest_neighbor_spacing(layout_emitters(stage));
        if (std::isfinite(spacing) && spacing < 2.0 * r) {
            report.violations.push_back({rules::tip_spacing, Severity::soft, spacing, 2.0 * r,
                                         "tip spacing is below twice the space-charge radius"});
        }
    } catch (const LayoutError& e) {
        report.violations.push_back({rules::emitter_layout, Severity::hard, static_cast<double>(stage.emitter.tip_count),
                                     0.0, e.what()});
    }

    if (interstage_factor < kMinInterstageFactor) {
        report.violations.push_back({rules::interstage_arcing, Severity::hard, interstage_factor, kMinInterstageFactor,
                                     "inter-stage distance below one gap arcs along the duct"});
    } else if (interstage_factor < kPreferredInterstageFactor) {
        report.violations.push_back({rules::interstage_reverse_corona, Severity::soft, interstage_factor,
                                     kPreferredInterstageFactor,
                                     "inter-stage distance admits reverse corona from the next emitter"});
    }
    return report;
}

OnsetPenaltyCoeffs default_onset_coeffs() {
    const double r = warburg_radius(2.0e-3);
    const double wall = 200.0 / ((r - 1.25e-3) / r);
    return {wall, wall};
}

ClearanceDeficits clearance_deficits(const StageGeometry& stage) {
    validate(stage);
    const double r = warburg_radius(stage.gap);
    const double wall = tip_to_lip_clearance(stage.lateral_clearance(), stage.emitter.bend_depth);
    const double spacing = nearest_neighbor_spacing(layout_emitters(stage));
    ClearanceDeficits out;
    out.wall = std::max(0.0, r - wall) / r;
    if (std::isfinite(spacing)) {
        out.tip = std::max(0.0, 2.0 * r - spacing) / (2.0 * r);
    }
    return out;
}

double onset_penalty(const StageGeometry& stage, const OnsetPenaltyCoeffs& coeffs) {
    const ClearanceDeficits d = clearance_deficits(stage);
    return coeffs.wall * d.wall + coeffs.tip * d.tip;
}

double onset_penalty(const StageGeometry& stage) {
    return onset_penalty(stage, default_onset_coeffs());
}

ElectrodeOutline electrode_outline(const StageGeometry& stage, const OutlineOptions& options) {
    validate(stage);
    if (!(stage.tip_height() > 0.0)) {
        throw DomainError("electrode_outline: tip height must be positive");
    }
    if (!(options.rim_width > 0.0) || options.cap_segments < 4) {
        throw DomainError("electrode_outline: rim width must be positive and cap segments >= 4");
    }

    const double straight = stage.straight_length();
    const Stadium tips_contour(stage.emitter.inner_diameter, straight);
    const Stadium lip(stage.emitter.outer_diameter, straight);
    const Stadium rim(stage.emitter.outer_diameter + 2.0 * options.rim_width, straight);
    const double lip_perimeter = lip.perimeter();

    const std::vector<double> tip_arcs = layout_arcs(stage);
    const double half_base = 0.5 * tip_base_width(stage);

    struct Vertex {
        double key;
        int order;
        Point2 point;
    };
    std::vector<Vertex> vertices;
    std::vector<double> tip_centres;
    for (double arc : tip_arcs) {
        const double centre = tips_contour.map_arc_to(lip, arc);
        tip_centres.push_back(centre);
        vertices.push_back({wrap(centre - half_base, lip_perimeter), 0, lip.point_at(centre - half_base)});
        vertices.push_back({wrap(centre, lip_perimeter), 1, tips_contour.point_at(arc)});
        vertices.push_back({wrap(centre + half_base, lip_perimeter), 2, lip.point_at(centre + half_base)});
    }

    ElectrodeOutline out;
    for (double arc : contour_samples(lip, options.cap_segments)) {
        const bool covered = std::any_of(tip_centres.begin(), tip_centres.end(), [&](double centre) {
            return cyclic_distance(arc, centre, lip_perimeter) <= 1.01 * half_base;
        });
        if (!covered) {
            vertices.push_back({wrap(arc, lip_perimeter), 0, lip.point_at(arc)});
            ++out.emitter_base_vertex_count;
        }
    }
    std::stable_sort(vertices.begin(), vertices.end(), [](const Vertex& a, const Vertex& b) {
        return a.key < b.key || (a.key == b.key && a.order < b.order);
    });

    Polyline lip_edge;
    lip_edge.reserve(vertices.size());
    for (const Vertex& v : vertices) {
        lip_edge.push_back(v.point);
    }
    out.emitter.push_back(sample_contour(rim, options.cap_segments));
    out.emitter.push_back(std::move(lip_edge));

    // Collector: frame ring plus one rectangle per wire, clipped to the duct.
    const double h = stage.duct_inner_height;
    const double w = stage.duct_inner_width;
    const double r = 0.5 * h;
    const double half_straight = 0.5 * straight;
    const double ww = stage.collector.wire_width;
    const double pitch = stage.collector.pitch;
    out.collector.push_back(sample_contour(Stadium(h + 2.0 * options.rim_width, straight), options.cap_segments));
    out.collector.push_back(sample_contour(Stadium(h, straight), options.cap_segments));

    auto half_height_at = [&](double x) {
        const double beyond = std::abs(x) - half_straight;
        if (beyond <= 0.0) {
            return r;
        }
        return beyond >= r ? 0.0 : std::sqrt(r * r - beyond * beyond);
    };
    const int kx = static_cast<int>(std::floor((0.5 * w) / pitch));
    for (int k = -kx; k <= kx; ++k) {
        const double x = k * pitch;
        const double edge = std::abs(x) + 0.5 * ww;
        if (edge >= 0.5 * w) {
            continue;
        }
        const double extent = half_height_at(edge);
        if (extent <= 0.0) {
            continue;
        }
        out.collector.push_back(rectangle(x - 0.5 * ww, -extent, x + 0.5 * ww, extent));
    }
    const int ky = static_cast<int>(std::floor(r / pitch));
    for (int k = -ky; k <= ky; ++k) {
        const double y = k * pitch;
        const double edge = std::abs(y) + 0.5 * ww;
        if (edge >= r) {
            continue;
        }
        const double extent = half_straight + std::sqrt(r * r - edge * edge);
        out.collector.push_back(rectangle(-extent, y - 0.5 * ww, extent, y + 0.5 * ww));
    }
    return out;
}

}  // namespace eadkit
