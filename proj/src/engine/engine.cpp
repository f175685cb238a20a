#include "tracereason/engine/engine.hpp"

#include <algorithm>
#include <set>

#include "program.hpp"

namespace tracereason::engine {

using detail::Closure;
using detail::LocId;
using detail::Program;
using detail::TupleId;

namespace {

TraceTuple make_tuple(const TupleKey& k, model::Provenance p) { return {k.relation, k.source, k.target, p}; }

Violation to_violation(const Program& p, const detail::InternalViolation& v) {
  const auto& c = p.constraint(v.constraint);
  Violation out;
  out.constraintId = p.core().constraints[c.index].id;
  for (std::size_t i = 0; i < c.varCount; ++i) out.binding.emplace_back(c.varNames[i], p.location_name(v.binding[i]));
  for (TupleId t : v.involved) out.involved.push_back(p.key_of(t));
  return out;
}

// Indices into p.base() of the model tuples that the derivation trees of
// `roots` bottom out in.
std::set<std::size_t> leaves(const Program& p, const Closure& cl, const std::vector<TupleId>& roots) {
  std::set<std::size_t> out;
  std::set<TupleId> seen;
  std::vector<TupleId> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    const TupleId t = stack.back();
    stack.pop_back();
    if (!seen.insert(t).second) continue;
    auto d = cl.derivations.find(t);
    if (d != cl.derivations.end()) {
      stack.insert(stack.end(), d->second.premises.begin(), d->second.premises.end());
      continue;
    }
    auto it = std::lower_bound(p.base().begin(), p.base().end(), t);
    if (it != p.base().end() && *it == t) out.insert(static_cast<std::size_t>(it - p.base().begin()));
  }
  return out;
}

}  // namespace

InferenceResult infer(const TraceModel& model, const spec::CoreSpec& core, const types::TypeHierarchy& h) {
  const Program p(model, core, h);
  const Closure cl = p.run();
  InferenceResult out;
  for (TupleId t : cl.derivedOrder) {
    const TupleKey key = p.key_of(t);
    out.inferred.push_back(make_tuple(key, model::Provenance::Inferred));
    const auto& d = cl.derivations.at(t);
    Derivation der{key, core.rules[d.rule].id, {}};
    for (TupleId prem : d.premises) der.premises.push_back(p.key_of(prem));
    out.derivations.emplace(key, std::move(der));
  }
  std::sort(out.inferred.begin(), out.inferred.end(),
            [](const TraceTuple& a, const TraceTuple& b) { return a.key() < b.key(); });
  out.warnings.assign(cl.warnings.begin(), cl.warnings.end());
  out.rounds = cl.rounds;
  return out;
}

std::vector<Violation> check_consistency(const TraceModel& model, const spec::CoreSpec& core,
                                         const types::TypeHierarchy& h, const InferenceResult& inference) {
  const Program p(model, core, h);
  detail::TupleStore store(p.location_count(), p.relation_count());
  for (TupleId t : p.base()) store.insert(t);
  for (const auto& t : inference.inferred) {
    if (auto id = p.id_of(t.key())) store.insert(*id);
  }
  std::vector<Violation> out;
  for (const auto& v : p.check(store)) out.push_back(to_violation(p, v));
  return out;
}

Result<Diagnosis, DiagnoseError> diagnose(const TraceModel& model, const spec::CoreSpec& core,
                                          const types::TypeHierarchy& h, const Violation& violation,
                                          const DerivationGraph& /*derivations*/) {
  const Program p(model, core, h);
  std::optional<std::size_t> ci;
  for (std::size_t i = 0; i < p.constraints().size(); ++i) {
    if (core.constraints[p.constraint(i).index].id == violation.constraintId) ci = i;
  }
  if (!ci) return Failure{DiagnoseError{"unknown constraint '" + violation.constraintId + "'"}};
  const auto& clause = p.constraint(*ci);
  if (violation.binding.size() != clause.varCount) {
    return Failure{DiagnoseError{"binding does not match the variables of " + violation.constraintId}};
  }
  std::vector<LocId> binding;
  for (std::size_t i = 0; i < clause.varCount; ++i) {
    const auto& [var, loc] = violation.binding[i];
    auto l = p.location_index(loc);
    if (var != clause.varNames[i] || !l) {
      return Failure{DiagnoseError{"binding does not match the variables of " + violation.constraintId}};
    }
    binding.push_back(*l);
  }

  std::vector<bool> enabled(p.base().size(), true);
  std::vector<TupleId> involved;
  Closure cl = p.run(enabled);
  if (!p.violated_at(cl.store, *ci, binding, &involved)) {
    return Failure{DiagnoseError{"violation of " + violation.constraintId + " is not reproducible from the model"}};
  }
  // A tuple outside the current witness can be dropped without re-running:
  // the witness derivation survives, so the violation persists.
  std::set<std::size_t> witness = leaves(p, cl, involved);
  for (std::size_t i = 0; i < enabled.size(); ++i) {
    enabled[i] = false;
    if (witness.count(i) == 0) continue;
    Closure next = p.run(enabled);
    if (p.violated_at(next.store, *ci, binding, &involved)) {
      witness = leaves(p, next, involved);
    } else {
      enabled[i] = true;
    }
  }

  Diagnosis out{violation, {}};
  for (std::size_t i = 0; i < enabled.size(); ++i) {
    if (!enabled[i]) continue;
    const TupleKey key = p.key_of(p.base()[i]);
    const auto* t = model.find_tuple(key);
    out.support.push_back(t ? *t : make_tuple(key, model::Provenance::Assigned));
  }
  return out;
}

Result<AnalysisResult, std::vector<types::TypeError>> analyze(const TraceModel& model, const spec::CoreSpec& core,
                                                              const types::TypeHierarchy& h) {
  if (auto errors = types::check_model(model, h); !errors.empty()) return Failure{std::move(errors)};
  InferenceResult inference = infer(model, core, h);
  AnalysisResult out;
  out.violations = check_consistency(model, core, h, inference);
  for (const auto& v : out.violations) {
    auto d = diagnose(model, core, h, v, inference.derivations);
    if (d) out.diagnoses.push_back(std::move(d).value());
  }
  out.inferred = std::move(inference.inferred);
  out.derivations = std::move(inference.derivations);
  out.warnings = std::move(inference.warnings);
  out.stats = {model.tuples.size(), out.inferred.size(), out.violations.size()};
  return out;
}

Result<Slice, SliceError> slice_location(const AnalysisResult& result, const TraceModel& model, std::string_view loc) {
  if (!model.find_location(loc)) return Failure{SliceError{"unknown location '" + std::string(loc) + "'"}};
  Slice out;
  out.location = std::string(loc);
  std::vector<TupleKey> roots;
  auto incident = [&](const TraceTuple& t) { return t.source == loc || t.target == loc; };
  for (const auto& t : model.tuples) {
    if (incident(t)) out.tuples.push_back(t);
  }
  for (const auto& t : result.inferred) {
    if (!incident(t)) continue;
    out.tuples.push_back(t);
    roots.push_back(t.key());
  }
  std::sort(out.tuples.begin(), out.tuples.end(),
            [](const TraceTuple& a, const TraceTuple& b) { return a.key() < b.key(); });

  std::set<TupleKey> seen;
  while (!roots.empty()) {
    TupleKey k = std::move(roots.back());
    roots.pop_back();
    if (!seen.insert(k).second) continue;
    auto it = result.derivations.find(k);
    if (it == result.derivations.end()) continue;
    out.derivations.push_back(it->second);
    for (const auto& prem : it->second.premises) roots.push_back(prem);
  }
  std::sort(out.derivations.begin(), out.derivations.end(),
            [](const Derivation& a, const Derivation& b) { return a.conclusion < b.conclusion; });
  return out;
}

Result<TraceModel, model::EditError> accept_inferred(const TraceModel& model, const AnalysisResult& result,
                                                     const std::vector<TupleKey>& tuples) {
  std::set<TupleKey> inferred;
  for (const auto& t : result.inferred) inferred.insert(t.key());
  TraceModel out = model;
  std::set<TupleKey> added;
  for (const auto& k : tuples) {
    if (inferred.count(k) == 0) {
      return Failure{model::EditError{model::EditError::Kind::NotInferred, format_tuple(k) + " was not inferred"}};
    }
    if (model.find_tuple(k) || !added.insert(k).second) {
      return Failure{model::EditError{model::EditError::Kind::DuplicateTrace, format_tuple(k) + " is already in the model"}};
    }
    out.tuples.push_back(make_tuple(k, model::Provenance::Accepted));
  }
  return out;
}

}  // namespace tracereason::engine
