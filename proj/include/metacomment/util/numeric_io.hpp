#pragma once

#include <string>
#include <string_view>

namespace metacomment {

// Shortest decimal string that parses back to exactly `value`.
std::string format_real(double value);

// Strict parse of a full string; throws DataError naming `what` on failure.
double parse_real(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

}  // namespace metacomment
