#pragma once

#include "eadkit/geometry.hpp"

#include <string>

namespace eadkit {

// SVG in millimetre user units: one <path> per closed polyline, emitter and
// collector outlines in separate groups. Output is byte-deterministic.
std::string outline_to_svg(const ElectrodeOutline& outline);

}  // namespace eadkit
