#include "tracereason/types/hierarchy.hpp"

#include <algorithm>
#include <set>

namespace tracereason::types {

std::string_view to_string(TypeErrorKind kind) {
  switch (kind) {
    case TypeErrorKind::UnknownSig: return "UnknownSig";
    case TypeErrorKind::UnknownRelation: return "UnknownRelation";
    case TypeErrorKind::UnknownLocation: return "UnknownLocation";
    case TypeErrorKind::CycleInHierarchy: return "CycleInHierarchy";
    case TypeErrorKind::DuplicateName: return "DuplicateName";
    case TypeErrorKind::AbstractInstantiation: return "AbstractInstantiation";
    case TypeErrorKind::DomainMismatch: return "DomainMismatch";
    case TypeErrorKind::RangeMismatch: return "RangeMismatch";
    case TypeErrorKind::PayloadSchemaMismatch: return "PayloadSchemaMismatch";
  }
  return "TypeError";
}

std::string format_type_error(const TypeError& e) {
  std::string out;
  if (e.span) out += format_span(*e.span) + ": ";
  out += "error: " + std::string(to_string(e.kind)) + " '" + e.subject + "': " + e.detail;
  return out;
}

const RelationInfo* TypeHierarchy::relation(std::string_view name) const {
  auto it = relations_.find(std::string(name));
  return it == relations_.end() ? nullptr : &it->second;
}

Result<bool, TypeError> TypeHierarchy::is_subtype(std::string_view sub, std::string_view sup) const {
  for (auto name : {sub, sup}) {
    if (!has_sig(name)) return Failure{TypeError{TypeErrorKind::UnknownSig, std::string(name), "no such signature", {}}};
  }
  return conforms(sub, sup);
}

bool TypeHierarchy::conforms(std::string_view sub, std::string_view sup) const {
  std::string current(sub);
  // Bounded by the number of sigs; the forest has no cycles once built.
  for (std::size_t steps = 0; steps <= sigs_.size(); ++steps) {
    auto it = sigs_.find(current);
    if (it == sigs_.end()) return false;
    if (current == sup) return true;
    if (!it->second.parent) return false;
    current = *it->second.parent;
  }
  return false;
}

std::optional<LocationKind> TypeHierarchy::effective_kind(std::string_view sig) const {
  std::string current(sig);
  for (std::size_t steps = 0; steps <= sigs_.size(); ++steps) {
    auto it = sigs_.find(current);
    if (it == sigs_.end()) return std::nullopt;
    if (it->second.locationKind) return it->second.locationKind;
    if (!it->second.parent) return std::nullopt;
    current = *it->second.parent;
  }
  return std::nullopt;
}

Result<TypeHierarchy, std::vector<TypeError>> build_hierarchy(const spec::CoreSpec& core) {
  TypeHierarchy h;
  std::vector<TypeError> errors;

  for (const auto& sig : core.sigs) {
    SigInfo info{sig.parent, sig.isAbstract, sig.locationKind};
    if (!h.sigs_.emplace(sig.name, info).second) {
      errors.push_back({TypeErrorKind::DuplicateName, sig.name, "signature declared more than once", sig.span});
    }
  }
  for (const auto& rel : core.relations) {
    if (!h.relations_.emplace(rel.name, RelationInfo{rel.domain, rel.range}).second) {
      errors.push_back({TypeErrorKind::DuplicateName, rel.name, "relation declared more than once", rel.span});
    }
  }

  for (const auto& sig : core.sigs) {
    if (sig.parent && !h.has_sig(*sig.parent)) {
      errors.push_back({TypeErrorKind::UnknownSig, *sig.parent, "parent of sig " + sig.name + " is not declared", sig.span});
    }
    for (const auto& field : sig.fields) {
      if (!h.has_sig(field.target)) {
        errors.push_back({TypeErrorKind::UnknownSig, field.target,
                          "target of field " + sig.name + "." + field.name + " is not declared", field.span});
      }
    }
  }

  // Cycle detection: walk each parent chain; revisiting a sig on the same walk is a cycle.
  std::set<std::string> reported;
  for (const auto& [name, info] : h.sigs_) {
    std::set<std::string> seen{name};
    auto current = info.parent;
    while (current) {
      auto it = h.sigs_.find(*current);
      if (it == h.sigs_.end()) break;
      if (!seen.insert(*current).second) {
        if (*current == name && reported.insert(name).second) {
          const auto decl = std::find_if(core.sigs.begin(), core.sigs.end(),
                                         [&](const spec::SigDecl& s) { return s.name == name; });
          errors.push_back({TypeErrorKind::CycleInHierarchy, name, "signature is its own ancestor",
                            decl == core.sigs.end() ? std::nullopt : std::optional(decl->span)});
        }
        break;
      }
      current = it->second.parent;
    }
  }

  auto check_vars = [&](const std::vector<spec::TypedVar>& vars, const std::vector<spec::CoreAtom>& body,
                        const std::string& id) {
    for (const auto& v : vars) {
      if (!h.has_sig(v.sig)) {
        errors.push_back({TypeErrorKind::UnknownSig, v.sig, "type of variable '" + v.name + "' in " + id, v.span});
      }
    }
    for (const auto& atom : body) {
      if (const auto* t = std::get_if<spec::CoreTypeTest>(&atom); t && !h.has_sig(t->sig)) {
        errors.push_back({TypeErrorKind::UnknownSig, t->sig, "type test in " + id, std::nullopt});
      }
    }
  };
  std::set<std::string> checked_spans;  // one report per source formula, not per DNF item
  for (const auto& r : core.rules) {
    if (checked_spans.insert(format_span(r.span) + r.origin).second) check_vars(r.vars, r.body, r.id);
  }
  for (const auto& c : core.constraints) {
    if (checked_spans.insert(format_span(c.span) + c.origin).second) check_vars(c.vars, c.body, c.id);
  }

  if (!errors.empty()) return Failure{std::move(errors)};
  return h;
}

namespace {

void check_payload(const model::Location& loc, const TypeHierarchy& h, std::vector<TypeError>& errors) {
  const auto& p = loc.payload;
  auto mismatch = [&](std::string detail) {
    errors.push_back({TypeErrorKind::PayloadSchemaMismatch, loc.id, std::move(detail), std::nullopt});
  };
  if (auto expected = h.effective_kind(loc.sigType); expected && *expected != p.kind) {
    mismatch("payload kind " + std::string(spec::to_string(p.kind)) + " does not match " + loc.sigType +
             " locations, which are " + std::string(spec::to_string(*expected)));
    return;
  }
  if (p.resource.empty()) mismatch("missing required field 'resource'");
  if ((p.offset && *p.offset < 0) || (p.length && *p.length < 0)) mismatch("offset and length must be non-negative");
  switch (p.kind) {
    case LocationKind::Text:
      if (p.element) mismatch("text locations do not have an 'element' field");
      break;
    case LocationKind::Code:
      if (!p.offset || !p.length) mismatch("code locations require 'offset' and 'length'");
      if (p.element) mismatch("code locations do not have an 'element' field");
      break;
    case LocationKind::Model:
      if (!p.element) mismatch("model locations require 'element'");
      if (p.offset || p.length) mismatch("model locations do not have 'offset' or 'length' fields");
      break;
  }
}

}  // namespace

std::vector<TypeError> check_model(const model::TraceModel& m, const TypeHierarchy& h) {
  std::vector<TypeError> errors;
  for (const auto& loc : m.locations) {
    auto it = h.sigs().find(loc.sigType);
    if (it == h.sigs().end()) {
      errors.push_back({TypeErrorKind::UnknownSig, loc.sigType, "type of location " + loc.id + " is not declared", {}});
      continue;
    }
    if (it->second.isAbstract) {
      errors.push_back({TypeErrorKind::AbstractInstantiation, loc.id,
                        "location has abstract type " + loc.sigType + "; use one of its extensions", {}});
    }
    check_payload(loc, h, errors);
  }
  for (const auto& t : m.tuples) {
    const RelationInfo* rel = h.relation(t.relation);
    if (!rel) {
      errors.push_back({TypeErrorKind::UnknownRelation, t.relation, "trace " + format_tuple(t.key()) + " uses an undeclared relation", {}});
      continue;
    }
    const auto* src = m.find_location(t.source);
    const auto* dst = m.find_location(t.target);
    if (!src || !dst) {
      errors.push_back({TypeErrorKind::UnknownLocation, !src ? t.source : t.target,
                        "endpoint of " + format_tuple(t.key()) + " is not a location", {}});
      continue;
    }
    if (h.has_sig(src->sigType) && !h.conforms(src->sigType, rel->domain)) {
      errors.push_back({TypeErrorKind::DomainMismatch, format_tuple(t.key()),
                        t.source + " : " + src->sigType + " is not a subtype of " + rel->domain, {}});
    }
    if (h.has_sig(dst->sigType) && !h.conforms(dst->sigType, rel->range)) {
      errors.push_back({TypeErrorKind::RangeMismatch, format_tuple(t.key()),
                        t.target + " : " + dst->sigType + " is not a subtype of " + rel->range, {}});
    }
  }
  return errors;
}

Result<std::vector<std::string>, TypeError> suggest_trace_types(const model::TraceModel& m, const TypeHierarchy& h,
                                                                std::string_view loc, Side side) {
  const auto* l = m.find_location(loc);
  if (!l) return Failure{TypeError{TypeErrorKind::UnknownLocation, std::string(loc), "no such location", {}}};
  std::vector<std::string> out;
  for (const auto& [name, rel] : h.relations()) {  // std::map: already sorted
    if (h.conforms(l->sigType, side == Side::Source ? rel.domain : rel.range)) out.push_back(name);
  }
  return out;
}

Result<std::vector<std::string>, TypeError> suggest_targets(const model::TraceModel& m, const TypeHierarchy& h,
                                                            std::string_view loc, std::string_view relation) {
  const auto* l = m.find_location(loc);
  if (!l) return Failure{TypeError{TypeErrorKind::UnknownLocation, std::string(loc), "no such location", {}}};
  const RelationInfo* rel = h.relation(relation);
  if (!rel) return Failure{TypeError{TypeErrorKind::UnknownRelation, std::string(relation), "no such relation", {}}};
  if (!h.conforms(l->sigType, rel->domain)) {
    return Failure{TypeError{TypeErrorKind::DomainMismatch, std::string(loc),
                             l->sigType + " is not a subtype of " + rel->domain + ", the domain of " +
                                 std::string(relation),
                             {}}};
  }
  std::vector<std::string> out;
  for (const auto& cand : m.locations) {
    if (cand.id != loc && h.conforms(cand.sigType, rel->range)) out.push_back(cand.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace tracereason::types
