#include "tracereason/report/report.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tracereason::report {

using engine::AnalysisResult;
using engine::Derivation;
using engine::Diagnosis;
using engine::Violation;
using model::TraceModel;
using model::TraceTuple;
using model::TupleKey;
using Json = nlohmann::ordered_json;

std::string_view to_string(Format f) {
  switch (f) {
    case Format::Text: return "text";
    case Format::Json: return "json";
    case Format::Dot: return "dot";
  }
  return "text";
}

std::optional<Format> parse_format(std::string_view text) {
  if (text == "text") return Format::Text;
  if (text == "json") return Format::Json;
  if (text == "dot") return Format::Dot;
  return std::nullopt;
}

namespace {

/// What gets rendered: either the whole result or its slice at one location.
struct View {
  std::vector<TraceTuple> assigned;
  std::vector<TraceTuple> inferred;
  std::vector<Violation> violations;
  std::vector<Diagnosis> diagnoses;
  std::vector<std::string> locations;  // ids of the nodes to draw
};

bool by_key(const TraceTuple& a, const TraceTuple& b) { return a.key() < b.key(); }

std::optional<std::string> stale_reason(const AnalysisResult& r, const TraceModel& m) {
  if (r.stats.assigned != m.tuples.size()) return "assigned count differs from the model";
  auto known = [&](const TupleKey& k) {
    return m.find_location(k.source) != nullptr && m.find_location(k.target) != nullptr;
  };
  for (const auto& t : r.inferred) {
    if (m.find_tuple(t.key())) return format_tuple(t.key()) + " is both inferred and in the model";
    if (!known(t.key())) return format_tuple(t.key()) + " refers to a location missing from the model";
  }
  for (const auto& v : r.violations) {
    for (const auto& k : v.involved) {
      if (!known(k)) return format_tuple(k) + " refers to a location missing from the model";
    }
  }
  for (const auto& d : r.diagnoses) {
    for (const auto& t : d.support) {
      if (!m.find_tuple(t.key())) return "diagnosis support " + format_tuple(t.key()) + " is not in the model";
    }
  }
  return std::nullopt;
}

View make_view(const AnalysisResult& r, const TraceModel& m, const std::optional<std::string>& slice) {
  View v;
  if (!slice) {
    v.assigned = m.tuples;
    v.inferred = r.inferred;
    v.violations = r.violations;
    v.diagnoses = r.diagnoses;
    for (const auto& l : m.locations) v.locations.push_back(l.id);
  } else {
    auto s = engine::slice_location(r, m, *slice).value();
    for (auto& t : s.tuples) (t.provenance == model::Provenance::Inferred ? v.inferred : v.assigned).push_back(t);
    auto touches = [&](const Violation& viol) {
      return std::any_of(viol.involved.begin(), viol.involved.end(),
                         [&](const TupleKey& k) { return k.source == *slice || k.target == *slice; });
    };
    for (const auto& viol : r.violations) {
      if (touches(viol)) v.violations.push_back(viol);
    }
    for (const auto& d : r.diagnoses) {
      if (touches(d.violation)) v.diagnoses.push_back(d);
    }
    std::set<std::string> ids{*slice};
    for (const auto& t : s.tuples) ids.insert({t.source, t.target});
    v.locations.assign(ids.begin(), ids.end());
  }
  std::sort(v.assigned.begin(), v.assigned.end(), by_key);
  std::sort(v.inferred.begin(), v.inferred.end(), by_key);
  std::sort(v.locations.begin(), v.locations.end());
  return v;
}

std::string binding_text(const engine::Binding& b) {
  std::string out;
  for (const auto& [var, loc] : b) out += (out.empty() ? "" : ", ") + var + "=" + loc;
  return out;
}

// ---------------------------------------------------------------------------
// text

struct Style {
  bool ansi;
  std::string red(const std::string& s) const { return ansi ? "\x1b[31m" + s + "\x1b[0m" : s; }
  std::string bold(const std::string& s) const { return ansi ? "\x1b[1m" + s + "\x1b[0m" : s; }
};

void derivation_tree(std::ostream& os, const AnalysisResult& r, const TraceModel& m, const TupleKey& k, int depth,
                     std::set<TupleKey>& path) {
  const std::string indent(static_cast<std::size_t>(4 + 2 * depth), ' ');
  auto d = r.derivations.find(k);
  if (d == r.derivations.end() || path.count(k) != 0) {
    const auto* t = m.find_tuple(k);
    os << indent << format_tuple(k) << "  " << (t ? model::to_string(t->provenance) : "given") << '\n';
    return;
  }
  os << indent << format_tuple(k) << "  by " << d->second.ruleId << '\n';
  path.insert(k);
  for (const auto& p : d->second.premises) derivation_tree(os, r, m, p, depth + 1, path);
  path.erase(k);
}

std::string render_text(const AnalysisResult& r, const TraceModel& m, const View& v, const RenderOptions& opts) {
  const Style st{opts.ansi};
  std::ostringstream os;
  os << st.bold("model " + m.name);
  if (opts.sliceLocation) os << " (slice at " << *opts.sliceLocation << ")";
  os << ": " << r.stats.assigned << " assigned, " << r.stats.inferred << " inferred, " << r.stats.violations
     << (r.stats.violations == 1 ? " violation" : " violations") << '\n';

  os << "\nassigned (" << v.assigned.size() << "):\n";
  for (const auto& t : v.assigned) {
    os << "  " << format_tuple(t.key());
    if (t.provenance != model::Provenance::Assigned) os << "  [" << model::to_string(t.provenance) << "]";
    os << '\n';
  }

  os << "\ninferred (" << v.inferred.size() << "):\n";
  for (const auto& t : v.inferred) {
    auto d = r.derivations.find(t.key());
    os << "  " << format_tuple(t.key());
    if (d != r.derivations.end()) os << "  by " << d->second.ruleId;
    os << '\n';
    if (opts.includeDerivations && d != r.derivations.end()) {
      std::set<TupleKey> path{t.key()};
      for (const auto& p : d->second.premises) derivation_tree(os, r, m, p, 0, path);
    }
  }

  os << "\nviolations (" << v.violations.size() << "):\n";
  for (std::size_t i = 0; i < v.violations.size(); ++i) {
    const auto& viol = v.violations[i];
    os << "  " << st.red("[" + std::to_string(i + 1) + "] " + viol.constraintId) << " at " << binding_text(viol.binding)
       << '\n';
    for (const auto& k : viol.involved) os << "      " << format_tuple(k) << '\n';
  }

  os << "\ndiagnoses (" << v.diagnoses.size() << "):\n";
  for (std::size_t i = 0; i < v.diagnoses.size(); ++i) {
    const auto& d = v.diagnoses[i];
    os << "  [" << i + 1 << "] " << d.violation.constraintId << " at " << binding_text(d.violation.binding)
       << " is caused by " << d.support.size() << (d.support.size() == 1 ? " trace" : " traces") << ":\n";
    for (const auto& t : d.support) os << "      " << format_tuple(t.key()) << '\n';
  }

  if (!r.warnings.empty() && !opts.sliceLocation) {
    os << "\nwarnings (" << r.warnings.size() << "):\n";
    for (const auto& w : r.warnings) os << "  " << w << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// json

Json key_json(const TupleKey& k) { return {{"relation", k.relation}, {"source", k.source}, {"target", k.target}}; }

Json tuple_json(const TraceTuple& t) {
  Json j = key_json(t.key());
  j["provenance"] = std::string(model::to_string(t.provenance));
  return j;
}

Json violation_json(const Violation& v) {
  Json binding = Json::object();
  for (const auto& [var, loc] : v.binding) binding[var] = loc;
  Json involved = Json::array();
  for (const auto& k : v.involved) involved.push_back(key_json(k));
  return {{"constraintId", v.constraintId}, {"binding", binding}, {"involved", involved}};
}

std::string render_json(const AnalysisResult& r, const View& v, const RenderOptions& opts) {
  Json out = Json::object();
  if (opts.sliceLocation) out["slice"] = *opts.sliceLocation;
  out["assigned"] = Json::array();
  for (const auto& t : v.assigned) out["assigned"].push_back(tuple_json(t));
  out["inferred"] = Json::array();
  for (const auto& t : v.inferred) {
    Json j = tuple_json(t);
    if (auto d = r.derivations.find(t.key()); d != r.derivations.end()) {
      Json premises = Json::array();
      for (const auto& p : d->second.premises) premises.push_back(key_json(p));
      j["derivation"] = {{"ruleId", d->second.ruleId}, {"premises", premises}};
    }
    out["inferred"].push_back(j);
  }
  out["violations"] = Json::array();
  for (const auto& viol : v.violations) out["violations"].push_back(violation_json(viol));
  out["diagnoses"] = Json::array();
  for (const auto& d : v.diagnoses) {
    Json support = Json::array();
    for (const auto& t : d.support) support.push_back(tuple_json(t));
    out["diagnoses"].push_back({{"violation", violation_json(d.violation)}, {"support", support}});
  }
  out["stats"] = {{"assigned", r.stats.assigned}, {"inferred", r.stats.inferred}, {"violations", r.stats.violations}};
  out["warnings"] = Json::array();
  for (const auto& w : r.warnings) out["warnings"].push_back(w);
  return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// dot

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string render_dot(const TraceModel& m, const View& v) {
  std::set<TupleKey> red;
  for (const auto& viol : v.violations) red.insert(viol.involved.begin(), viol.involved.end());

  struct Edge {
    bool dashed;
    bool red;
  };
  std::map<TupleKey, Edge> edges;
  for (const auto& t : v.assigned) edges[t.key()] = {false, red.count(t.key()) != 0};
  for (const auto& t : v.inferred) edges.emplace(t.key(), Edge{true, red.count(t.key()) != 0});

  std::ostringstream os;
  os << "digraph " << quote(m.name.empty() ? "trace" : m.name) << " {\n";
  os << "  node [shape=box];\n";
  for (const auto& id : v.locations) {
    const auto* loc = m.find_location(id);
    os << "  " << quote(id) << " [label=" << quote(id) << ", tooltip=" << quote(loc ? loc->sigType : "") << "];\n";
  }
  for (const auto& [k, e] : edges) {
    bool both = false;
    if (k.source != k.target) {
      auto rev = edges.find({k.relation, k.target, k.source});
      if (rev != edges.end() && rev->second.dashed == e.dashed && rev->second.red == e.red) {
        if (k.target < k.source) continue;  // emitted with its reverse
        both = true;
      }
    }
    os << "  " << quote(k.source) << " -> " << quote(k.target) << " [label=" << quote(k.relation)
       << ", style=" << (e.dashed ? "dashed" : "solid");
    if (e.red) os << ", color=red, fontcolor=red";
    if (both) os << ", dir=both";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace

Result<std::string, ReportError> render_report(const AnalysisResult& result, const TraceModel& model,
                                               const RenderOptions& opts) {
  if (auto why = stale_reason(result, model)) return Failure{ReportError{"stale result for model '" + model.name + "': " + *why}};
  if (opts.sliceLocation && !model.find_location(*opts.sliceLocation)) {
    return Failure{ReportError{"unknown location '" + *opts.sliceLocation + "'"}};
  }
  const View view = make_view(result, model, opts.sliceLocation);
  switch (opts.format) {
    case Format::Json: return render_json(result, view, opts);
    case Format::Dot: return render_dot(model, view);
    case Format::Text: break;
  }
  return render_text(result, model, view, opts);
}

}  // namespace tracereason::report
