#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tracereason/cli/cli.hpp"
#include "tracereason/engine/engine.hpp"
#include "tracereason/model/trace_model.hpp"
#include "tracereason/report/report.hpp"
#include "tracereason/spec/core.hpp"
#include "tracereason/spec/parser.hpp"
#include "tracereason/types/hierarchy.hpp"

namespace py = pybind11;
namespace tr = tracereason;

namespace {

struct Spec {
  tr::spec::CoreSpec core;
  tr::types::TypeHierarchy hierarchy;
};

template <typename E>
[[noreturn]] void raise(const std::vector<E>& errors) {
  std::ostringstream os;
  for (const auto& e : errors) os << e << '\n';
  throw py::value_error(os.str());
}

[[noreturn]] void raise(const std::vector<tr::types::TypeError>& errors) {
  std::string msg;
  for (const auto& e : errors) msg += tr::types::format_type_error(e) + "\n";
  throw py::value_error(msg);
}

Spec parse_spec(const std::string& text, const std::string& name) {
  auto ast = tr::spec::parse_spec(text, name);
  if (!ast) raise(ast.error());
  auto core = tr::spec::desugar(*ast);
  if (!core) raise(core.error());
  auto h = tr::types::build_hierarchy(*core);
  if (!h) raise(h.error());
  return Spec{std::move(core).value(), std::move(h).value()};
}

tr::model::TraceModel parse_model(const std::string& text, const std::string& name) {
  const bool json = !text.empty() && text.find_first_not_of(" \t\r\n") != std::string::npos &&
                    text[text.find_first_not_of(" \t\r\n")] == '{';
  auto m = json ? tr::model::parse_model_json(text, name) : tr::model::parse_model(text, name);
  if (!m) raise(m.error());
  return std::move(m).value();
}

py::tuple key_tuple(const tr::model::TupleKey& k) { return py::make_tuple(k.relation, k.source, k.target); }

py::dict violation_dict(const tr::engine::Violation& v) {
  py::dict binding;
  for (const auto& [var, loc] : v.binding) binding[py::str(var)] = loc;
  py::list involved;
  for (const auto& k : v.involved) involved.append(key_tuple(k));
  py::dict d;
  d["constraint_id"] = v.constraintId;
  d["binding"] = binding;
  d["involved"] = involved;
  return d;
}

}  // namespace

PYBIND11_MODULE(_tracereason, m) {
  m.doc() = "Trace inference and consistency checking over user-defined trace types";

  py::class_<Spec>(m, "Spec")
      .def_property_readonly("sigs",
                             [](const Spec& s) {
                               std::vector<std::string> out;
                               for (const auto& [name, info] : s.hierarchy.sigs()) out.push_back(name);
                               return out;
                             })
      .def_property_readonly("relations",
                             [](const Spec& s) {
                               std::vector<std::string> out;
                               for (const auto& [name, info] : s.hierarchy.relations()) out.push_back(name);
                               return out;
                             })
      .def_property_readonly("rule_ids",
                             [](const Spec& s) {
                               std::vector<std::string> out;
                               for (const auto& r : s.core.rules) out.push_back(r.id);
                               return out;
                             })
      .def_property_readonly("constraint_ids",
                             [](const Spec& s) {
                               std::vector<std::string> out;
                               for (const auto& c : s.core.constraints) out.push_back(c.id);
                               return out;
                             })
      .def("origin", [](const Spec& s, const std::string& id) -> std::string {
        for (const auto& r : s.core.rules) {
          if (r.id == id) return r.origin;
        }
        for (const auto& c : s.core.constraints) {
          if (c.id == id) return c.origin;
        }
        throw py::key_error(id);
      })
      .def("is_subtype", [](const Spec& s, const std::string& sub, const std::string& sup) {
        auto r = s.hierarchy.is_subtype(sub, sup);
        if (!r) throw py::value_error(tr::types::format_type_error(r.error()));
        return *r;
      });

  py::class_<tr::model::TraceModel>(m, "Model")
      .def_readonly("name", &tr::model::TraceModel::name)
      .def_property_readonly("locations",
                             [](const tr::model::TraceModel& mod) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& l : mod.locations) out.emplace_back(l.id, l.sigType);
                               return out;
                             })
      .def_property_readonly("tuples",
                             [](const tr::model::TraceModel& mod) {
                               py::list out;
                               for (const auto& t : mod.tuples) {
                                 out.append(py::make_tuple(t.relation, t.source, t.target,
                                                           std::string(tr::model::to_string(t.provenance))));
                               }
                               return out;
                             })
      .def("serialize",
           [](const tr::model::TraceModel& mod, const std::string& format) {
             if (format != "native" && format != "json") throw py::value_error("format must be 'native' or 'json'");
             return tr::model::serialize_model(mod, format == "json" ? tr::model::ModelFormat::Json
                                                                      : tr::model::ModelFormat::Native);
           },
           py::arg("format") = "native")
      .def("remove_trace",
           [](const tr::model::TraceModel& mod, const std::string& rel, const std::string& src, const std::string& dst) {
             auto r = tr::model::apply_edit(mod, tr::model::RemoveTrace{{rel, src, dst}});
             if (!r) throw py::value_error(r.error().message);
             return std::move(r).value();
           });

  py::class_<tr::engine::AnalysisResult>(m, "AnalysisResult")
      .def_property_readonly("inferred",
                             [](const tr::engine::AnalysisResult& r) {
                               py::list out;
                               for (const auto& t : r.inferred) out.append(key_tuple(t.key()));
                               return out;
                             })
      .def_property_readonly("violations",
                             [](const tr::engine::AnalysisResult& r) {
                               py::list out;
                               for (const auto& v : r.violations) out.append(violation_dict(v));
                               return out;
                             })
      .def_property_readonly("diagnoses",
                             [](const tr::engine::AnalysisResult& r) {
                               py::list out;
                               for (const auto& d : r.diagnoses) {
                                 py::list support;
                                 for (const auto& t : d.support) support.append(key_tuple(t.key()));
                                 py::dict e;
                                 e["violation"] = violation_dict(d.violation);
                                 e["support"] = support;
                                 out.append(e);
                               }
                               return out;
                             })
      .def_property_readonly("warnings", [](const tr::engine::AnalysisResult& r) { return r.warnings; })
      .def_property_readonly("stats", [](const tr::engine::AnalysisResult& r) {
        py::dict d;
        d["assigned"] = r.stats.assigned;
        d["inferred"] = r.stats.inferred;
        d["violations"] = r.stats.violations;
        return d;
      });

  m.def("parse_spec", &parse_spec, py::arg("text"), py::arg("name") = "<spec>",
        "Parse, desugar and type-check a specification. Raises ValueError with located messages.");
  m.def("parse_model", &parse_model, py::arg("text"), py::arg("name") = "<model>",
        "Parse a model in the native or JSON format.");
  m.def("check_model", [](const tr::model::TraceModel& mod, const Spec& s) {
    std::vector<std::string> out;
    for (const auto& e : tr::types::check_model(mod, s.hierarchy)) out.push_back(tr::types::format_type_error(e));
    return out;
  });
  m.def("analyze", [](const tr::model::TraceModel& mod, const Spec& s) {
    auto r = tr::engine::analyze(mod, s.core, s.hierarchy);
    if (!r) raise(r.error());
    return std::move(r).value();
  });
  m.def("accept_inferred",
        [](const tr::model::TraceModel& mod, const tr::engine::AnalysisResult& r,
           const std::vector<std::tuple<std::string, std::string, std::string>>& tuples) {
          std::vector<tr::model::TupleKey> keys;
          for (const auto& [rel, src, dst] : tuples) keys.push_back({rel, src, dst});
          auto out = tr::engine::accept_inferred(mod, r, keys);
          if (!out) throw py::value_error(out.error().message);
          return std::move(out).value();
        });
  m.def(
      "render_report",
      [](const tr::engine::AnalysisResult& r, const tr::model::TraceModel& mod, const std::string& format,
         bool include_derivations, std::optional<std::string> slice) {
        auto fmt = tr::report::parse_format(format);
        if (!fmt) throw py::value_error("format must be 'text', 'json' or 'dot'");
        auto out = tr::report::render_report(r, mod, {*fmt, include_derivations, std::move(slice), false});
        if (!out) throw py::value_error(out.error().message);
        return std::move(out).value();
      },
      py::arg("result"), py::arg("model"), py::arg("format") = "text", py::arg("include_derivations") = false,
      py::arg("slice") = py::none());
  m.def(
      "suggest_trace_types",
      [](const tr::model::TraceModel& mod, const Spec& s, const std::string& loc, const std::string& side) {
        if (side != "source" && side != "target") throw py::value_error("side must be 'source' or 'target'");
        auto r = tr::types::suggest_trace_types(mod, s.hierarchy, loc,
                                                side == "source" ? tr::types::Side::Source : tr::types::Side::Target);
        if (!r) throw py::value_error(tr::types::format_type_error(r.error()));
        return std::move(r).value();
      },
      py::arg("model"), py::arg("spec"), py::arg("location"), py::arg("side") = "source");
  m.def("suggest_targets", [](const tr::model::TraceModel& mod, const Spec& s, const std::string& loc,
                              const std::string& relation) {
    auto r = tr::types::suggest_targets(mod, s.hierarchy, loc, relation);
    if (!r) throw py::value_error(tr::types::format_type_error(r.error()));
    return std::move(r).value();
  });
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = tr::cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      "Run a command line; returns (exit_code, stdout, stderr).");
}
