#include "program.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace tracereason::engine::detail {

namespace {

constexpr LocId kUnbound = std::numeric_limits<LocId>::max();

}  // namespace

TupleStore::TupleStore(std::size_t locs, std::size_t rels)
    : locs_(locs), out_(rels * locs), in_(rels * locs), all_(rels) {}

bool TupleStore::insert(TupleId id) {
  if (!present_.insert(id).second) return false;
  const std::size_t n = locs_ == 0 ? 1 : locs_;
  const auto d = static_cast<LocId>(id % n);
  const auto s = static_cast<LocId>((id / n) % n);
  const auto r = static_cast<RelId>(id / (n * n));
  out_[r * locs_ + s].push_back(d);
  in_[r * locs_ + d].push_back(s);
  all_[r].push_back(id);
  return true;
}

Program::Program(const TraceModel& model, const spec::CoreSpec& core, const types::TypeHierarchy& h)
    : core_(core), h_(h) {
  std::map<std::string, std::string> locs;
  for (const auto& l : model.locations) locs.emplace(l.id, l.sigType);
  for (const auto& [id, type] : locs) {
    locIds_.push_back(id);
    locTypes_.push_back(type);
  }
  for (const auto& [name, info] : h.relations()) {
    relIndex_.emplace(name, static_cast<RelId>(relNames_.size()));
    relNames_.push_back(name);
    std::vector<bool> dom(locIds_.size()), rng(locIds_.size());
    for (std::size_t l = 0; l < locIds_.size(); ++l) {
      dom[l] = h.conforms(locTypes_[l], info.domain);
      rng[l] = h.conforms(locTypes_[l], info.range);
    }
    domainOk_.push_back(std::move(dom));
    rangeOk_.push_back(std::move(rng));
  }

  for (std::size_t i = 0; i < core.rules.size(); ++i) {
    const auto& r = core.rules[i];
    Clause c = compile(r.vars, r.body, i);
    c.head = Clause::HeadKind::Derive;
    auto rel = relIndex_.find(r.head.relation);
    if (rel == relIndex_.end()) continue;
    c.headRel = rel->second;
    const auto pos = [&](const std::string& v) {
      return static_cast<std::uint32_t>(std::find(c.varNames.begin(), c.varNames.end(), v) - c.varNames.begin());
    };
    c.headLeft = pos(r.head.source);
    c.headRight = pos(r.head.target);
    if (c.headLeft >= c.varCount || c.headRight >= c.varCount) continue;
    rules_.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < core.constraints.size(); ++i) {
    const auto& k = core.constraints[i];
    Clause c = compile(k.vars, k.body, i);
    const auto pos = [&](const std::string& v) {
      return static_cast<std::uint32_t>(std::find(c.varNames.begin(), c.varNames.end(), v) - c.varNames.begin());
    };
    if (const auto* f = std::get_if<spec::Forbid>(&k.head)) {
      auto rel = relIndex_.find(f->relation);
      if (rel == relIndex_.end()) continue;
      c.head = Clause::HeadKind::Forbid;
      c.headRel = rel->second;
      c.headLeft = pos(f->source);
      c.headRight = pos(f->target);
    } else if (const auto* e = std::get_if<spec::MustEqual>(&k.head)) {
      c.head = Clause::HeadKind::MustEqual;
      c.headLeft = pos(e->left);
      c.headRight = pos(e->right);
    } else {
      c.head = Clause::HeadKind::Deny;
    }
    constraints_.push_back(std::move(c));
  }

  for (const auto& t : model.tuples) {
    if (auto id = id_of(t.key())) base_.push_back(*id);
  }
  std::sort(base_.begin(), base_.end());
  base_.erase(std::unique(base_.begin(), base_.end()), base_.end());
}

Clause Program::compile(const std::vector<spec::TypedVar>& vars, const std::vector<spec::CoreAtom>& body,
                        std::size_t index) const {
  Clause c;
  c.index = index;
  for (const auto& v : vars) c.varNames.push_back(v.name);
  c.varCount = static_cast<std::uint32_t>(vars.size());
  auto var_index = [&](const std::string& name) {
    return static_cast<std::uint32_t>(std::find(c.varNames.begin(), c.varNames.end(), name) - c.varNames.begin());
  };

  c.allowed.assign(c.varCount, std::vector<bool>(locIds_.size()));
  for (std::uint32_t v = 0; v < c.varCount; ++v) {
    for (std::size_t l = 0; l < locIds_.size(); ++l) c.allowed[v][l] = h_.conforms(locTypes_[l], vars[v].sig);
  }

  std::vector<bool> mentioned(c.varCount);
  for (const auto& atom : body) {
    if (const auto* m = std::get_if<spec::CoreMembership>(&atom)) {
      auto rel = relIndex_.find(m->relation);
      const std::uint32_t s = var_index(m->source), d = var_index(m->target);
      if (rel == relIndex_.end() || s >= c.varCount || d >= c.varCount) {
        // Unresolvable atom: nothing can match, so the clause never fires.
        for (auto& a : c.allowed) std::fill(a.begin(), a.end(), false);
        continue;
      }
      c.members.push_back({rel->second, s, d});
      mentioned[s] = mentioned[d] = true;
    } else {
      const auto& t = std::get<spec::CoreTypeTest>(atom);
      const std::uint32_t v = var_index(t.var);
      if (v >= c.varCount) continue;
      for (std::size_t l = 0; l < locIds_.size(); ++l) {
        if (!h_.conforms(locTypes_[l], t.sig)) c.allowed[v][l] = false;
      }
    }
  }
  for (std::uint32_t v = 0; v < c.varCount; ++v) {
    if (!mentioned[v]) c.freeVars.push_back(v);
  }

  const std::size_t m = c.members.size();
  for (std::size_t seed = 0; seed <= m; ++seed) {
    std::vector<bool> bound(c.varCount);
    std::vector<bool> used(m);
    if (seed < m) {
      bound[c.members[seed].src] = bound[c.members[seed].dst] = true;
      used[seed] = true;
    }
    std::vector<std::uint32_t> order;
    for (std::size_t step = 0; step < m - (seed < m ? 1 : 0); ++step) {
      int best = -1, best_score = -1;
      for (std::size_t a = 0; a < m; ++a) {
        if (used[a]) continue;
        const int score = int(bound[c.members[a].src]) + int(bound[c.members[a].dst]);
        if (score > best_score) {
          best = static_cast<int>(a);
          best_score = score;
        }
      }
      used[best] = true;
      bound[c.members[best].src] = bound[c.members[best].dst] = true;
      order.push_back(static_cast<std::uint32_t>(best));
    }
    c.joinOrder.push_back(std::move(order));
  }
  return c;
}

TupleKey Program::key_of(TupleId t) const {
  return {relNames_[rel_of(t)], locIds_[src_of(t)], locIds_[dst_of(t)]};
}

std::optional<LocId> Program::location_index(std::string_view id) const {
  auto it = std::lower_bound(locIds_.begin(), locIds_.end(), id);
  if (it == locIds_.end() || *it != id) return std::nullopt;
  return static_cast<LocId>(it - locIds_.begin());
}

std::optional<TupleId> Program::id_of(const TupleKey& key) const {
  auto rel = relIndex_.find(key.relation);
  auto s = location_index(key.source);
  auto d = location_index(key.target);
  if (rel == relIndex_.end() || !s || !d) return std::nullopt;
  return tuple_id(rel->second, *s, *d);
}

namespace {

/// Backtracking join over one clause.
class Walker {
 public:
  using Emit = std::function<void(const std::vector<LocId>&, const std::vector<TupleId>&)>;

  Walker(const Program& p, const Clause& c, const TupleStore& store, const std::vector<std::uint32_t>& order,
         const Emit& emit)
      : p_(p), c_(c), store_(store), order_(order), emit_(emit), binding_(c.varCount, kUnbound),
        matched_(c.members.size()) {}

  void from_seed(std::uint32_t seed, const std::vector<TupleId>& tuples) {
    const MemberAtom& a = c_.members[seed];
    for (TupleId t : tuples) {
      const LocId s = p_.src_of(t), d = p_.dst_of(t);
      if (a.src == a.dst && s != d) continue;
      if (!c_.allowed[a.src][s] || !c_.allowed[a.dst][d]) continue;
      binding_[a.src] = s;
      binding_[a.dst] = d;
      matched_[seed] = t;
      step(0);
      binding_[a.src] = binding_[a.dst] = kUnbound;
    }
  }

  void full() { step(0); }

 private:
  void step(std::size_t k) {
    if (k == order_.size()) {
      free_vars(0);
      return;
    }
    const std::uint32_t idx = order_[k];
    const MemberAtom& a = c_.members[idx];
    const LocId sv = binding_[a.src], dv = binding_[a.dst];
    if (sv != kUnbound && dv != kUnbound) {
      const TupleId t = p_.tuple_id(a.rel, sv, dv);
      if (!store_.contains(t)) return;
      matched_[idx] = t;
      step(k + 1);
    } else if (sv != kUnbound) {
      for (LocId d : store_.out(a.rel, sv)) {
        if (!c_.allowed[a.dst][d]) continue;
        binding_[a.dst] = d;
        matched_[idx] = p_.tuple_id(a.rel, sv, d);
        step(k + 1);
      }
      binding_[a.dst] = kUnbound;
    } else if (dv != kUnbound) {
      for (LocId s : store_.in(a.rel, dv)) {
        if (!c_.allowed[a.src][s]) continue;
        binding_[a.src] = s;
        matched_[idx] = p_.tuple_id(a.rel, s, dv);
        step(k + 1);
      }
      binding_[a.src] = kUnbound;
    } else {
      for (TupleId t : store_.all(a.rel)) {
        const LocId s = p_.src_of(t), d = p_.dst_of(t);
        if (a.src == a.dst && s != d) continue;
        if (!c_.allowed[a.src][s] || !c_.allowed[a.dst][d]) continue;
        binding_[a.src] = s;
        binding_[a.dst] = d;
        matched_[idx] = t;
        step(k + 1);
      }
      binding_[a.src] = binding_[a.dst] = kUnbound;
    }
  }

  void free_vars(std::size_t k) {
    if (k == c_.freeVars.size()) {
      emit_(binding_, matched_);
      return;
    }
    const std::uint32_t v = c_.freeVars[k];
    for (LocId l = 0; l < p_.location_count(); ++l) {
      if (!c_.allowed[v][l]) continue;
      binding_[v] = l;
      free_vars(k + 1);
    }
    binding_[v] = kUnbound;
  }

  const Program& p_;
  const Clause& c_;
  const TupleStore& store_;
  const std::vector<std::uint32_t>& order_;
  const Emit& emit_;
  std::vector<LocId> binding_;
  std::vector<TupleId> matched_;
};

}  // namespace

void Program::enumerate(const Clause& c, std::optional<std::uint32_t> seed, const std::vector<TupleId>& seedTuples,
                        const TupleStore& store,
                        const std::function<void(const std::vector<LocId>&, const std::vector<TupleId>&)>& emit) const {
  Walker w(*this, c, store, c.joinOrder[seed ? *seed : c.members.size()], emit);
  if (seed) {
    w.from_seed(*seed, seedTuples);
  } else {
    w.full();
  }
}

Closure Program::run(const std::vector<bool>& enabled) const {
  Closure cl{TupleStore(locIds_.size(), relNames_.size()), {}, {}, {}, 0};
  std::vector<std::vector<TupleId>> delta(relNames_.size());
  for (std::size_t i = 0; i < base_.size(); ++i) {
    if (!enabled.empty() && !enabled[i]) continue;
    cl.store.insert(base_[i]);
    delta[rel_of(base_[i])].push_back(base_[i]);
  }

  while (true) {
    ++cl.rounds;
    std::vector<TupleId> pending;
    std::unordered_set<TupleId> pending_set;
    for (const Clause& rule : rules_) {
      const auto& spec_rule = core_.rules[rule.index];
      auto emit = [&](const std::vector<LocId>& b, const std::vector<TupleId>& matched) {
        const LocId s = b[rule.headLeft], d = b[rule.headRight];
        const TupleId t = tuple_id(rule.headRel, s, d);
        if (cl.store.contains(t) || pending_set.count(t) != 0) return;
        if (!domainOk_[rule.headRel][s] || !rangeOk_[rule.headRel][d]) {
          const auto& info = *h_.relation(relNames_[rule.headRel]);
          cl.warnings.insert("rule " + spec_rule.id + " would derive " + format_tuple(key_of(t)) +
                             ", outside the signature " + info.domain + " -> " + info.range + "; skipped");
          return;
        }
        pending.push_back(t);
        pending_set.insert(t);
        cl.derivations.emplace(t, InternalDerivation{rule.index, matched});
      };
      if (rule.members.empty()) {
        if (cl.rounds == 1) enumerate(rule, std::nullopt, {}, cl.store, emit);
        continue;
      }
      for (std::uint32_t seed = 0; seed < rule.members.size(); ++seed) {
        enumerate(rule, seed, delta[rule.members[seed].rel], cl.store, emit);
      }
    }
    if (pending.empty()) break;
    std::sort(pending.begin(), pending.end());
    for (auto& d : delta) d.clear();
    for (TupleId t : pending) {
      cl.store.insert(t);
      cl.derivedOrder.push_back(t);
      delta[rel_of(t)].push_back(t);
    }
  }
  return cl;
}

std::vector<InternalViolation> Program::check(const TupleStore& closure) const {
  std::vector<InternalViolation> out;
  for (const Clause& c : constraints_) {
    std::vector<InternalViolation> found;
    auto emit = [&](const std::vector<LocId>& b, const std::vector<TupleId>& matched) {
      std::vector<TupleId> involved = matched;
      switch (c.head) {
        case Clause::HeadKind::Deny: break;
        case Clause::HeadKind::Forbid: {
          const TupleId t = tuple_id(c.headRel, b[c.headLeft], b[c.headRight]);
          if (!closure.contains(t)) return;
          involved.push_back(t);
          break;
        }
        case Clause::HeadKind::MustEqual:
          if (b[c.headLeft] == b[c.headRight]) return;
          break;
        case Clause::HeadKind::Derive: return;
      }
      found.push_back({c.index, b, std::move(involved)});
    };
    enumerate(c, std::nullopt, {}, closure, emit);
    std::sort(found.begin(), found.end(),
              [](const InternalViolation& a, const InternalViolation& b) { return a.binding < b.binding; });
    found.erase(std::unique(found.begin(), found.end(),
                            [](const InternalViolation& a, const InternalViolation& b) { return a.binding == b.binding; }),
                found.end());
    out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
  }
  return out;
}

bool Program::violated_at(const TupleStore& closure, std::size_t ci, const std::vector<LocId>& b,
                          std::vector<TupleId>* involved) const {
  const Clause& c = constraints_[ci];
  if (b.size() != c.varCount) return false;
  for (std::uint32_t v = 0; v < c.varCount; ++v) {
    if (b[v] >= locIds_.size() || !c.allowed[v][b[v]]) return false;
  }
  std::vector<TupleId> hit;
  for (const auto& a : c.members) {
    const TupleId t = tuple_id(a.rel, b[a.src], b[a.dst]);
    if (!closure.contains(t)) return false;
    hit.push_back(t);
  }
  switch (c.head) {
    case Clause::HeadKind::Forbid: {
      const TupleId t = tuple_id(c.headRel, b[c.headLeft], b[c.headRight]);
      if (!closure.contains(t)) return false;
      hit.push_back(t);
      break;
    }
    case Clause::HeadKind::MustEqual:
      if (b[c.headLeft] == b[c.headRight]) return false;
      break;
    default:
      break;
  }
  if (involved) *involved = std::move(hit);
  return true;
}

}  // namespace tracereason::engine::detail
