#pragma once

#include <string>

#include <json.hpp>

namespace viltwin {

/// Compact single-line JSON in which every floating-point number is written
/// with 17 significant digits (`%.17g`), so doubles survive a text round trip
/// bit-for-bit. Object keys keep nlohmann's sorted order, which makes the
/// output a pure function of the value. Throws ValidationError on NaN/Inf.
std::string to_json_line(const nlohmann::json& value);

}  // namespace viltwin
