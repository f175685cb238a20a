#include "fixtures.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tracereason/spec/parser.hpp"

namespace fixtures {

namespace tr = tracereason;

std::string read(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string path(const std::string& name) { return std::string(TRACEREASON_FIXTURE_DIR) + "/" + name; }
std::string schema_path(const std::string& name) { return std::string(TRACEREASON_SCHEMA_DIR) + "/" + name; }

LoadedSpec spec_from_text(const std::string& text, const std::string& name) {
  auto ast = tr::spec::parse_spec(text, name);
  if (!ast) {
    std::ostringstream os;
    for (const auto& e : ast.error()) os << e << '\n';
    throw std::runtime_error(os.str());
  }
  auto core = tr::spec::desugar(*ast);
  if (!core) {
    std::ostringstream os;
    for (const auto& e : core.error()) os << e << '\n';
    throw std::runtime_error(os.str());
  }
  auto h = tr::types::build_hierarchy(*core);
  if (!h) {
    std::string msg;
    for (const auto& e : h.error()) msg += tr::types::format_type_error(e) + "\n";
    throw std::runtime_error(msg);
  }
  return {std::move(ast).value(), std::move(core).value(), std::move(h).value()};
}

LoadedSpec spec(const std::string& fixture) { return spec_from_text(read(path(fixture)), fixture); }

tr::model::TraceModel model_from_text(const std::string& text, const std::string& name) {
  auto m = tr::model::parse_model(text, name);
  if (!m) {
    std::ostringstream os;
    for (const auto& e : m.error()) os << e << '\n';
    throw std::runtime_error(os.str());
  }
  return std::move(m).value();
}

tr::model::TraceModel model(const std::string& fixture) { return model_from_text(read(path(fixture)), fixture); }

tr::engine::AnalysisResult analyze(const tr::model::TraceModel& m, const LoadedSpec& s) {
  auto r = tr::engine::analyze(m, s.core, s.hierarchy);
  if (!r) {
    std::string msg;
    for (const auto& e : r.error()) msg += tr::types::format_type_error(e) + "\n";
    throw std::runtime_error(msg);
  }
  return std::move(r).value();
}

}  // namespace fixtures
