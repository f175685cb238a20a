#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tracereason/model/trace_model.hpp"
#include "tracereason/result.hpp"
#include "tracereason/spec/core.hpp"
#include "tracereason/types/hierarchy.hpp"

namespace tracereason::engine {

using model::TraceModel;
using model::TraceTuple;
using model::TupleKey;

/// Why an inferred tuple holds: the rule that fired and the tuples it
/// matched. Premises always existed before the conclusion was derived.
struct Derivation {
  TupleKey conclusion;
  std::string ruleId;
  std::vector<TupleKey> premises;
};

using DerivationGraph = std::map<TupleKey, Derivation>;

struct InferenceResult {
  std::vector<TraceTuple> inferred;  // canonical order, provenance Inferred
  DerivationGraph derivations;
  std::vector<std::string> warnings;  // derived tuples dropped by the signature guard
  std::size_t rounds = 0;
};

using Binding = std::vector<std::pair<std::string, std::string>>;  // variable -> location id, declaration order

struct Violation {
  std::string constraintId;
  Binding binding;
  std::vector<TupleKey> involved;  // matched body tuples, then the forbidden tuple for Forbid heads
};

struct Diagnosis {
  Violation violation;
  std::vector<TraceTuple> support;  // canonical order
};

struct Stats {
  std::size_t assigned = 0;
  std::size_t inferred = 0;
  std::size_t violations = 0;
};

struct AnalysisResult {
  std::vector<TraceTuple> inferred;
  DerivationGraph derivations;
  std::vector<Violation> violations;
  std::vector<Diagnosis> diagnoses;
  std::vector<std::string> warnings;
  Stats stats;
};

/// Least fixpoint of the rules over the model's tuples, by semi-naive
/// evaluation. Every model tuple counts as given, whatever its provenance.
/// A quantified variable ranges over locations whose type conforms to its
/// declared sig. Derived tuples whose endpoints fall outside the head
/// relation's signature are skipped with a warning.
InferenceResult infer(const TraceModel& model, const spec::CoreSpec& core, const types::TypeHierarchy& h);

/// Evaluates every constraint over model tuples plus `inference.inferred`.
/// Violations are ordered by constraint declaration, then by binding.
std::vector<Violation> check_consistency(const TraceModel& model, const spec::CoreSpec& core,
                                         const types::TypeHierarchy& h, const InferenceResult& inference);

struct DiagnoseError {
  std::string message;
};

/// Subset-minimal set of model tuples from which the same violation
/// (constraint id and binding) is still derivable. Starting from all model
/// tuples, each tuple is dropped in canonical order whenever the violation
/// survives without it.
Result<Diagnosis, DiagnoseError> diagnose(const TraceModel& model, const spec::CoreSpec& core,
                                          const types::TypeHierarchy& h, const Violation& violation,
                                          const DerivationGraph& derivations);

/// infer, then check_consistency, then diagnose each violation. Fails with
/// the model's type errors when it does not type-check.
Result<AnalysisResult, std::vector<types::TypeError>> analyze(const TraceModel& model, const spec::CoreSpec& core,
                                                              const types::TypeHierarchy& h);

struct Slice {
  std::string location;
  std::vector<TraceTuple> tuples;         // closure tuples with `location` as an endpoint
  std::vector<Derivation> derivations;    // premise trees of the inferred ones, by conclusion
};

struct SliceError {
  std::string message;
};

Result<Slice, SliceError> slice_location(const AnalysisResult& result, const TraceModel& model, std::string_view loc);

/// Appends the listed inferred tuples to the model with provenance Accepted.
Result<TraceModel, model::EditError> accept_inferred(const TraceModel& model, const AnalysisResult& result,
                                                     const std::vector<TupleKey>& tuples);

}  // namespace tracereason::engine
