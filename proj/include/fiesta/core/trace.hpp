#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "fiesta/core/types.hpp"

namespace fiesta {

nlohmann::json to_json(const TraceEvent& event);

// One JSON-lines record, without the trailing newline.
std::string trace_line(const TraceEvent& event);

void write_trace(std::ostream& out, std::span<const TraceEvent> events);

}  // namespace fiesta
