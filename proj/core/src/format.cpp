#include "eadkit/format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

namespace eadkit {

std::string format_number(double value) {
    if (value == 0.0) {
        return "0";
    }
    std::array<char, 64> buf{};
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), result.ptr);
}

std::string format_fixed(double value, int decimals) {
    std::array<char, 128> buf{};
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, decimals);
    std::string out(buf.data(), result.ptr);
    if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) {
        out.erase(0, 1);
    }
    return out;
}

bool parse_number(const std::string& text, double& value) {
    if (text.empty()) {
        return false;
    }
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') {
        ++first;
    }
    const auto result = std::from_chars(first, last, value);
    return result.ec == std::errc() && result.ptr == last && std::isfinite(value);
}

}  // namespace eadkit
