#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracereason/model/trace_model.hpp"
#include "tracereason/result.hpp"
#include "tracereason/source_span.hpp"
#include "tracereason/spec/core.hpp"

namespace tracereason::types {

using spec::LocationKind;

enum class TypeErrorKind {
  UnknownSig,
  UnknownRelation,
  UnknownLocation,
  CycleInHierarchy,
  DuplicateName,
  AbstractInstantiation,
  DomainMismatch,
  RangeMismatch,
  PayloadSchemaMismatch,
};

std::string_view to_string(TypeErrorKind kind);

struct TypeError {
  TypeErrorKind kind;
  std::string subject;
  std::string detail;
  std::optional<SourceSpan> span;
};

std::string format_type_error(const TypeError& e);

struct SigInfo {
  std::optional<std::string> parent;
  bool isAbstract = false;
  std::optional<LocationKind> locationKind;
};

struct RelationInfo {
  std::string domain;
  std::string range;
};

/// Single-inheritance signature forest plus relation signatures.
class TypeHierarchy {
 public:
  const std::map<std::string, SigInfo>& sigs() const { return sigs_; }
  const std::map<std::string, RelationInfo>& relations() const { return relations_; }

  bool has_sig(std::string_view name) const { return sigs_.find(std::string(name)) != sigs_.end(); }
  const RelationInfo* relation(std::string_view name) const;

  /// Reflexive-transitive ancestry. Unknown names are an error.
  Result<bool, TypeError> is_subtype(std::string_view sub, std::string_view sup) const;

  /// Like is_subtype, but unknown names simply do not conform.
  bool conforms(std::string_view sub, std::string_view sup) const;

  /// The location kind annotated on `sig` or its nearest annotated ancestor.
  std::optional<LocationKind> effective_kind(std::string_view sig) const;

 private:
  friend Result<TypeHierarchy, std::vector<TypeError>> build_hierarchy(const spec::CoreSpec& core);

  std::map<std::string, SigInfo> sigs_;
  std::map<std::string, RelationInfo> relations_;
};

/// Builds the hierarchy and validates every signature name referenced by
/// the core spec (parents, field targets, quantifier types, type tests).
Result<TypeHierarchy, std::vector<TypeError>> build_hierarchy(const spec::CoreSpec& core);

/// Empty when the model is well-typed: no abstract locations, every tuple
/// endpoint conforms to its relation's signature, and every payload matches
/// its location kind.
std::vector<TypeError> check_model(const model::TraceModel& model, const TypeHierarchy& h);

enum class Side { Source, Target };

/// Relations whose domain (Source) or range (Target) admits the location's
/// type, sorted by name.
Result<std::vector<std::string>, TypeError> suggest_trace_types(const model::TraceModel& model, const TypeHierarchy& h,
                                                                std::string_view loc, Side side);

/// Locations that can be the target of `relation` from `loc`, excluding
/// `loc` itself, sorted by id.
Result<std::vector<std::string>, TypeError> suggest_targets(const model::TraceModel& model, const TypeHierarchy& h,
                                                            std::string_view loc, std::string_view relation);

}  // namespace tracereason::types
