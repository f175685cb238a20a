#pragma once

// Index-based form of a (model, core spec, hierarchy) triple used by the
// evaluator. Locations and relations are numbered in name order, so index
// order and canonical string order coincide.

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tracereason/engine/engine.hpp"

namespace tracereason::engine::detail {

using LocId = std::uint32_t;
using RelId = std::uint32_t;
using TupleId = std::uint64_t;

struct MemberAtom {
  RelId rel;
  std::uint32_t src;  // variable indices
  std::uint32_t dst;
};

struct Clause {
  std::size_t index;  // position in core.rules / core.constraints
  std::uint32_t varCount = 0;
  std::vector<std::string> varNames;
  std::vector<MemberAtom> members;
  std::vector<std::vector<bool>> allowed;  // allowed[var][loc]: sig guard and type tests
  std::vector<std::uint32_t> freeVars;     // vars not mentioned by any membership atom
  // joinOrder[seed] lists the non-seed atoms in evaluation order; the last
  // entry (index members.size()) is the order for a seedless evaluation.
  std::vector<std::vector<std::uint32_t>> joinOrder;

  enum class HeadKind { Derive, Forbid, MustEqual, Deny };
  HeadKind head = HeadKind::Deny;
  RelId headRel = 0;
  std::uint32_t headLeft = 0;
  std::uint32_t headRight = 0;
};

/// A tuple set with per-endpoint adjacency for joins.
class TupleStore {
 public:
  TupleStore(std::size_t locs, std::size_t rels);

  bool contains(TupleId id) const { return present_.count(id) != 0; }
  bool insert(TupleId id);

  const std::vector<LocId>& out(RelId r, LocId s) const { return out_[r * locs_ + s]; }
  const std::vector<LocId>& in(RelId r, LocId d) const { return in_[r * locs_ + d]; }
  const std::vector<TupleId>& all(RelId r) const { return all_[r]; }
  std::size_t size() const { return present_.size(); }

 private:
  std::size_t locs_;
  std::unordered_set<TupleId> present_;
  std::vector<std::vector<LocId>> out_;
  std::vector<std::vector<LocId>> in_;
  std::vector<std::vector<TupleId>> all_;
};

struct InternalDerivation {
  std::size_t rule;
  std::vector<TupleId> premises;
};

struct Closure {
  TupleStore store;
  std::vector<TupleId> derivedOrder;  // inferred tuples, in derivation order
  std::unordered_map<TupleId, InternalDerivation> derivations;
  std::set<std::string> warnings;
  std::size_t rounds = 0;
};

struct InternalViolation {
  std::size_t constraint;
  std::vector<LocId> binding;
  std::vector<TupleId> involved;
};

class Program {
 public:
  Program(const TraceModel& model, const spec::CoreSpec& core, const types::TypeHierarchy& h);

  std::size_t location_count() const { return locIds_.size(); }
  std::size_t relation_count() const { return relNames_.size(); }

  TupleId tuple_id(RelId r, LocId s, LocId d) const { return (static_cast<TupleId>(r) * locCount() + s) * locCount() + d; }
  RelId rel_of(TupleId t) const { return static_cast<RelId>(t / (locCount() * locCount())); }
  LocId src_of(TupleId t) const { return static_cast<LocId>((t / locCount()) % locCount()); }
  LocId dst_of(TupleId t) const { return static_cast<LocId>(t % locCount()); }

  TupleKey key_of(TupleId t) const;
  std::optional<TupleId> id_of(const TupleKey& key) const;
  const std::string& location_name(LocId l) const { return locIds_[l]; }
  std::optional<LocId> location_index(std::string_view id) const;

  /// Model tuples that resolved against the declared relations, in canonical order.
  const std::vector<TupleId>& base() const { return base_; }

  /// Fixpoint over the base tuples for which `enabled` is true (all when empty).
  Closure run(const std::vector<bool>& enabled = {}) const;

  std::vector<InternalViolation> check(const TupleStore& closure) const;

  /// Whether constraint `c` is violated at exactly `binding` over the closure.
  bool violated_at(const TupleStore& closure, std::size_t c, const std::vector<LocId>& binding,
                   std::vector<TupleId>* involved) const;

  const Clause& constraint(std::size_t c) const { return constraints_[c]; }
  const std::vector<Clause>& constraints() const { return constraints_; }
  const spec::CoreSpec& core() const { return core_; }

 private:
  TupleId locCount() const { return static_cast<TupleId>(locIds_.size() == 0 ? 1 : locIds_.size()); }
  Clause compile(const std::vector<spec::TypedVar>& vars, const std::vector<spec::CoreAtom>& body,
                 std::size_t index) const;
  void enumerate(const Clause& c, std::optional<std::uint32_t> seed, const std::vector<TupleId>& seedTuples,
                 const TupleStore& store,
                 const std::function<void(const std::vector<LocId>&, const std::vector<TupleId>&)>& emit) const;

  const spec::CoreSpec& core_;
  const types::TypeHierarchy& h_;
  std::vector<std::string> locIds_;
  std::vector<std::string> locTypes_;
  std::vector<std::string> relNames_;
  std::unordered_map<std::string, RelId> relIndex_;
  std::vector<std::vector<bool>> domainOk_;  // [rel][loc]
  std::vector<std::vector<bool>> rangeOk_;
  std::vector<Clause> rules_;
  std::vector<Clause> constraints_;
  std::vector<TupleId> base_;
};

}  // namespace tracereason::engine::detail
