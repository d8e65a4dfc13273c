#pragma once

#include <string>

#include <json.hpp>

namespace subdiff {

/// Serializes with insertion-ordered keys, two-space indentation and every
/// floating-point number printed with %.17g, so identical values always
/// produce identical bytes. Non-finite numbers become null.
std::string dump_json(const nlohmann::ordered_json& doc);

/// %.17g formatting shared with the CSV writer.
std::string format_double(double value);

}  // namespace subdiff
