#pragma once

#include <string>

#include "tracereason/engine/engine.hpp"
#include "tracereason/model/trace_model.hpp"
#include "tracereason/spec/ast.hpp"
#include "tracereason/spec/core.hpp"
#include "tracereason/types/hierarchy.hpp"

namespace fixtures {

std::string read(const std::string& path);
std::string path(const std::string& name);  // inside the fixture directory
std::string schema_path(const std::string& name);

struct LoadedSpec {
  tracereason::spec::SpecAst ast;
  tracereason::spec::CoreSpec core;
  tracereason::types::TypeHierarchy hierarchy;
};

/// Parses, desugars and builds the hierarchy; throws on any error.
LoadedSpec spec_from_text(const std::string& text, const std::string& name = "<test>");
LoadedSpec spec(const std::string& fixture);

tracereason::model::TraceModel model_from_text(const std::string& text, const std::string& name = "<test>");
tracereason::model::TraceModel model(const std::string& fixture);

/// analyze(), throwing on type errors.
tracereason::engine::AnalysisResult analyze(const tracereason::model::TraceModel& m, const LoadedSpec& s);

}  // namespace fixtures
