#include "tracereason/cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tracereason/engine/engine.hpp"
#include "tracereason/model/trace_model.hpp"
#include "tracereason/report/report.hpp"
#include "tracereason/spec/core.hpp"
#include "tracereason/spec/parser.hpp"
#include "tracereason/types/hierarchy.hpp"

namespace tracereason::cli {

namespace {

struct Spec {
  spec::CoreSpec core;
  types::TypeHierarchy hierarchy;
};

struct Options {
  std::string specPath;
  std::string modelPath;
  std::string format = "text";
  bool includeDerivations = false;
  std::string slice;
  std::string location;
  std::string side = "source";
  std::string relation;
  bool acceptAll = false;
  std::vector<std::string> tuples;
  std::string output;
};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::optional<std::string> read_file(const std::string& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << "error: cannot read '" << path << "'\n";
    return std::nullopt;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const std::string& path, const std::string& text, std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  if (!(out << text)) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  return true;
}

std::optional<Spec> load_spec(const std::string& path, std::ostream& err) {
  auto text = read_file(path, err);
  if (!text) return std::nullopt;
  auto ast = spec::parse_spec(*text, path);
  if (!ast) {
    for (const auto& e : ast.error()) err << e << '\n';
    return std::nullopt;
  }
  auto core = spec::desugar(*ast);
  if (!core) {
    for (const auto& e : core.error()) err << e << '\n';
    return std::nullopt;
  }
  auto h = types::build_hierarchy(*core);
  if (!h) {
    for (const auto& e : h.error()) err << types::format_type_error(e) << '\n';
    return std::nullopt;
  }
  return Spec{std::move(core).value(), std::move(h).value()};
}

std::optional<model::TraceModel> load_model(const std::string& path, std::ostream& err) {
  auto text = read_file(path, err);
  if (!text) return std::nullopt;
  auto m = ends_with(path, ".json") ? model::parse_model_json(*text, path) : model::parse_model(*text, path);
  if (!m) {
    for (const auto& e : m.error()) err << e << '\n';
    return std::nullopt;
  }
  return std::move(m).value();
}

std::optional<engine::AnalysisResult> run_analysis(const model::TraceModel& m, const Spec& s, std::ostream& err) {
  auto r = engine::analyze(m, s.core, s.hierarchy);
  if (!r) {
    err << "error: model '" << m.name << "' does not type-check against the trace types\n";
    for (const auto& e : r.error()) err << format_type_error(e) << '\n';
    return std::nullopt;
  }
  for (const auto& w : r->warnings) err << "warning: " << w << '\n';
  return std::move(r).value();
}

std::optional<model::TupleKey> parse_tuple_arg(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ' && c != '\t') s += c;
  }
  const auto open = s.find('('), comma = s.find(','), close = s.find(')');
  if (open == std::string::npos || comma == std::string::npos || close != s.size() - 1 || !(open < comma) ||
      open == 0 || comma == open + 1 || close == comma + 1) {
    return std::nullopt;
  }
  return model::TupleKey{s.substr(0, open), s.substr(open + 1, comma - open - 1), s.substr(comma + 1, close - comma - 1)};
}

bool color_wanted(bool outIsTerminal) {
  const char* env = std::getenv("TRACEREASON_COLOR");
  if (env && std::string_view(env) == "never") return false;
  return outIsTerminal;
}

int verdict(const engine::AnalysisResult& r) { return r.violations.empty() ? kConsistent : kViolations; }

void print_block(std::ostream& out, const engine::AnalysisResult& r, const model::TraceModel& m,
                 const model::TupleKey& k, int depth) {
  const std::string indent(static_cast<std::size_t>(2 * depth + 4), ' ');
  auto d = r.derivations.find(k);
  if (d == r.derivations.end() || depth > 64) {
    const auto* t = m.find_tuple(k);
    out << indent << format_tuple(k) << "  " << (t ? model::to_string(t->provenance) : "given") << '\n';
    return;
  }
  out << indent << format_tuple(k) << "  by " << d->second.ruleId << '\n';
  for (const auto& p : d->second.premises) print_block(out, r, m, p, depth + 1);
}

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  auto s = load_spec(o.specPath, err);
  if (!s) return kError;
  out << o.specPath << ": " << s->hierarchy.sigs().size() << " sigs, " << s->hierarchy.relations().size()
      << " relations, " << s->core.rules.size() << " rules, " << s->core.constraints.size() << " constraints\n";
  if (o.modelPath.empty()) return kConsistent;
  auto m = load_model(o.modelPath, err);
  if (!m) return kError;
  auto errors = types::check_model(*m, s->hierarchy);
  for (const auto& e : errors) err << types::format_type_error(e) << '\n';
  if (!errors.empty()) return kError;
  out << o.modelPath << ": " << m->locations.size() << " locations, " << m->tuples.size() << " traces, well-typed\n";
  return kConsistent;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err, bool outIsTerminal) {
  auto s = load_spec(o.specPath, err);
  if (!s) return kError;
  auto m = load_model(o.modelPath, err);
  if (!m) return kError;
  auto fmt = report::parse_format(o.format);
  if (!fmt) {
    err << "error: unknown format '" << o.format << "'\n";
    return kError;
  }
  auto r = run_analysis(*m, *s, err);
  if (!r) return kError;
  report::RenderOptions opts{*fmt, o.includeDerivations, std::nullopt,
                             *fmt == report::Format::Text && o.output.empty() && color_wanted(outIsTerminal)};
  if (!o.slice.empty()) opts.sliceLocation = o.slice;
  auto text = report::render_report(*r, *m, opts);
  if (!text) {
    err << "error: " << text.error().message << '\n';
    return kError;
  }
  if (o.output.empty()) {
    out << *text;
  } else if (!write_file(o.output, *text, err)) {
    return kError;
  }
  return verdict(*r);
}

int cmd_infer(const Options& o, std::ostream& out, std::ostream& err, bool outIsTerminal) {
  if (!o.acceptAll) return cmd_report(o, out, err, outIsTerminal);
  if (o.output.empty()) {
    err << "error: --accept-all needs --output\n";
    return kError;
  }
  auto s = load_spec(o.specPath, err);
  if (!s) return kError;
  auto m = load_model(o.modelPath, err);
  if (!m) return kError;
  auto r = run_analysis(*m, *s, err);
  if (!r) return kError;
  std::vector<model::TupleKey> keys;
  for (const auto& t : r->inferred) keys.push_back(t.key());
  auto merged = engine::accept_inferred(*m, *r, keys);
  if (!merged) {
    err << "error: " << merged.error().message << '\n';
    return kError;
  }
  const auto fmt = ends_with(o.output, ".json") ? model::ModelFormat::Json : model::ModelFormat::Native;
  if (!write_file(o.output, model::serialize_model(*merged, fmt), err)) return kError;
  out << "accepted " << keys.size() << (keys.size() == 1 ? " inferred trace" : " inferred traces") << " into "
      << o.output << '\n';
  return verdict(*r);
}

int cmd_explain(const Options& o, std::ostream& out, std::ostream& err) {
  auto s = load_spec(o.specPath, err);
  if (!s) return kError;
  auto m = load_model(o.modelPath, err);
  if (!m) return kError;
  auto r = run_analysis(*m, *s, err);
  if (!r) return kError;
  if (r->violations.empty()) out << "model " << m->name << " is consistent\n";
  for (std::size_t i = 0; i < r->diagnoses.size(); ++i) {
    const auto& d = r->diagnoses[i];
    const auto& v = d.violation;
    if (i) out << '\n';
    out << "violation " << i + 1 << ": " << v.constraintId;
    for (const auto& c : s->core.constraints) {
      if (c.id == v.constraintId) out << " (" << c.origin << ")";
    }
    out << " at ";
    for (std::size_t b = 0; b < v.binding.size(); ++b) out << (b ? ", " : "") << v.binding[b].first << "=" << v.binding[b].second;
    out << "\n  involved:\n";
    for (const auto& k : v.involved) print_block(out, *r, *m, k, 0);
    out << "  caused by " << d.support.size() << " assigned " << (d.support.size() == 1 ? "trace" : "traces") << ":\n";
    for (const auto& t : d.support) out << "    " << format_tuple(t.key()) << '\n';
  }
  return verdict(*r);
}

int cmd_suggest(const Options& o, bool targets, std::ostream& out, std::ostream& err) {
  auto s = load_spec(o.specPath, err);
  if (!s) return kError;
  auto m = load_model(o.modelPath, err);
  if (!m) return kError;
  Result<std::vector<std::string>, types::TypeError> r = std::vector<std::string>{};
  if (targets) {
    r = types::suggest_targets(*m, s->hierarchy, o.location, o.relation);
  } else {
    r = types::suggest_trace_types(*m, s->hierarchy, o.location,
                                   o.side == "target" ? types::Side::Target : types::Side::Source);
  }
  if (!r) {
    err << types::format_type_error(r.error()) << '\n';
    return kError;
  }
  for (const auto& name : *r) out << name << '\n';
  return kConsistent;
}

int cmd_accept(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<model::TupleKey> keys;
  for (const auto& t : o.tuples) {
    auto k = parse_tuple_arg(t);
    if (!k) {
      err << "error: malformed trace '" << t << "', expected relation(source, target)\n";
      return kError;
    }
    keys.push_back(*k);
  }
  auto s = load_spec(o.specPath, err);
  if (!s) return kError;
  auto m = load_model(o.modelPath, err);
  if (!m) return kError;
  auto r = run_analysis(*m, *s, err);
  if (!r) return kError;
  if (o.acceptAll) {
    keys.clear();
    for (const auto& t : r->inferred) keys.push_back(t.key());
  }
  auto merged = engine::accept_inferred(*m, *r, keys);
  if (!merged) {
    err << "error: " << merged.error().message << '\n';
    return kError;
  }
  const std::string target = o.output.empty() ? o.modelPath : o.output;
  const auto fmt = ends_with(target, ".json") ? model::ModelFormat::Json : model::ModelFormat::Native;
  if (!write_file(target, model::serialize_model(*merged, fmt), err)) return kError;
  out << "accepted " << keys.size() << (keys.size() == 1 ? " trace" : " traces") << " into " << target << '\n';
  return verdict(*r);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool outIsTerminal) {
  CLI::App app{"Reasoning about user-defined trace types over trace models", "tracereason"};
  app.require_subcommand(1);
  Options o;

  auto add_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--spec", o.specPath, "Specification (.tarski)")->required();
    cmd->add_option("--model", o.modelPath, "Trace model (.trace or .json)")->required();
  };
  auto add_report = [&](CLI::App* cmd) {
    cmd->add_option("--format", o.format, "text, json or dot")->check(CLI::IsMember({"text", "json", "dot"}));
    cmd->add_flag("--include-derivations", o.includeDerivations, "Print the derivation of each inferred trace");
    cmd->add_option("--slice", o.slice, "Restrict the report to one location");
    cmd->add_option("--output", o.output, "Write to a file instead of stdout");
  };

  auto* validate = app.add_subcommand("validate", "Parse and type-check a specification (and optionally a model)");
  validate->add_option("--spec", o.specPath, "Specification (.tarski)")->required();
  validate->add_option("--model", o.modelPath, "Trace model to type-check");

  auto* check = app.add_subcommand("check", "Infer traces and report inconsistencies");
  add_inputs(check);
  add_report(check);

  auto* infer = app.add_subcommand("infer", "Infer traces; --accept-all writes them into a new model");
  add_inputs(infer);
  add_report(infer);
  infer->add_flag("--accept-all", o.acceptAll, "Accept every inferred trace");

  auto* explain = app.add_subcommand("explain", "Explain each inconsistency by its causing assigned traces");
  add_inputs(explain);

  auto* suggest = app.add_subcommand("suggest", "Suggest trace types or targets for a location");
  suggest->require_subcommand(1);
  auto* types_cmd = suggest->add_subcommand("types", "Relations a location can take part in");
  add_inputs(types_cmd);
  types_cmd->add_option("--location", o.location, "Location id")->required();
  types_cmd->add_option("--side", o.side, "source or target")->check(CLI::IsMember({"source", "target"}));
  auto* targets_cmd = suggest->add_subcommand("targets", "Locations a trace of a relation can point to");
  add_inputs(targets_cmd);
  targets_cmd->add_option("--location", o.location, "Source location id")->required();
  targets_cmd->add_option("--relation", o.relation, "Relation name")->required();

  auto* accept = app.add_subcommand("accept", "Add inferred traces to the model with provenance accepted");
  add_inputs(accept);
  accept->add_option("--trace", o.tuples, "Inferred trace, e.g. 'satisfies(i14, r11)'");
  accept->add_flag("--all", o.acceptAll, "Accept every inferred trace");
  accept->add_option("--output", o.output, "Where to write the model (default: overwrite --model)");

  auto* exportc = app.add_subcommand("export", "Write the analysis report");
  add_inputs(exportc);
  add_report(exportc);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kConsistent;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kConsistent;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run 'tracereason " << sub->get_name() << " --help' for usage\n";
    } else {
      err << "run 'tracereason --help' for usage\n";
    }
    return kError;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out, err);
    if (check->parsed() || exportc->parsed()) return cmd_report(o, out, err, outIsTerminal);
    if (infer->parsed()) return cmd_infer(o, out, err, outIsTerminal);
    if (explain->parsed()) return cmd_explain(o, out, err);
    if (types_cmd->parsed()) return cmd_suggest(o, false, out, err);
    if (targets_cmd->parsed()) return cmd_suggest(o, true, out, err);
    if (accept->parsed()) return cmd_accept(o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace tracereason::cli
