#include "metacomment/util/numeric_io.hpp"

#include <charconv>
#include <cmath>

#include "metacomment/util/error.hpp"

namespace metacomment {

std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_real(std::string_view text, std::string_view what) {
    if (text == "inf") return INFINITY;
    if (text == "-inf") return -INFINITY;
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw DataError("invalid number for " + std::string(what) + ": '" + std::string(text) + "'");
    }
    return value;
}

long long parse_integer(std::string_view text, std::string_view what) {
    long long value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw DataError("invalid integer for " + std::string(what) + ": '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace metacomment
