#pragma once

#include <optional>
#include <string>

#include "tracereason/engine/engine.hpp"
#include "tracereason/result.hpp"

namespace tracereason::report {

enum class Format { Text, Json, Dot };

std::string_view to_string(Format f);
std::optional<Format> parse_format(std::string_view text);

struct RenderOptions {
  Format format = Format::Text;
  bool includeDerivations = false;
  std::optional<std::string> sliceLocation;
  bool ansi = false;  // text format only
};

struct ReportError {
  std::string message;
};

/// Renders an analysis result. Fails when `result` was evidently not
/// produced from `model` or the slice location does not exist.
///
/// DOT: one node per location (label = id, tooltip = type) and one edge per
/// closure tuple, solid for model tuples and dashed for inferred ones, red
/// when the tuple takes part in a violation. Two opposite edges of the same
/// relation and look are merged into one `dir=both` edge.
Result<std::string, ReportError> render_report(const engine::AnalysisResult& result, const model::TraceModel& model,
                                               const RenderOptions& opts);

}  // namespace tracereason::report
