#pragma once

#include <string>

namespace eadkit {

// Shortest representation that parses back to the same double. Locale
// independent.
std::string format_number(double value);

// Fixed-point with `decimals` digits after the point. Locale independent.
std::string format_fixed(double value, int decimals);

// Strict full-string parse; returns false on trailing garbage or empty input.
bool parse_number(const std::string& text, double& value);

}  // namespace eadkit
