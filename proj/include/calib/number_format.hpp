#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace calib {

/// Fixed 17-significant-digit decimal ("%.17g" style, trailing zeros
/// dropped, exponent as e±dd). Locale independent.
std::string format_g17(double v);

/// Shortest decimal that parses back to the same double.
std::string format_shortest(double v);

/// Parses a full token as a double (leading '+' accepted, "nan"/"inf"
/// recognised). Returns nullopt when the token is not entirely numeric.
std::optional<double> parse_double(std::string_view token);

std::optional<long long> parse_integer(std::string_view token);

} // namespace calib
