// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sfst/automaton.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <set>
#include <unordered_set>

#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

namespace {

std::string LabelName(const SymbolTable& symbols, SymbolId label) {
  if (label == symbols.phi_id()) return "<phi>";
  const std::string* s = symbols.Find(label);
  return s ? *s : StrCat("#", label);
}

}  // namespace

Automaton::Automaton(std::shared_ptr<const SymbolTable> symbols,
                     std::vector<std::vector<Transition>> arcs,
                     StateId initial, StateId final)
    : symbols_(std::move(symbols)),
      arcs_(std::move(arcs)),
      initial_(initial),
      final_(final) {
  if (!symbols_) throw Error("automaton: null symbol table");
  const StateId n = NumStates();
  if (n == 0) throw Error("automaton: no states");
  if (initial_ < 0 || initial_ >= n || final_ < 0 || final_ >= n) {
    throw Error("automaton: initial or final state out of range");
  }
  if (initial_ == final_) {
    throw Error("automaton: initial state cannot be the final state");
  }
  if (!arcs_[static_cast<std::size_t>(final_)].empty()) {
    throw Error(StrCat("automaton: transition out of final state ", final_));
  }
  const SymbolId phi = symbols_->phi_id();
  for (StateId q = 0; q < n; ++q) {
    auto& state_arcs = arcs_[static_cast<std::size_t>(q)];
    std::sort(state_arcs.begin(), state_arcs.end(),
              [](const Transition& a, const Transition& b) {
                return a.label < b.label;
              });
    SymbolId prev = -1;
    bool first = true;
    for (const Transition& t : state_arcs) {
      if (!first && t.label == prev) {
        if (t.label == phi) {
          throw Error(StrCat("automaton: multiple failure transitions at state ", q));
        }
        throw Error(StrCat("automaton: duplicate transition (", q, ", ",
                           LabelName(*symbols_, t.label), ")"));
      }
      first = false;
      prev = t.label;
      if (t.label != phi && !symbols_->HasId(t.label)) {
        throw Error(StrCat("automaton: unknown symbol id ", t.label,
                           " at state ", q));
      }
      if (!std::isfinite(t.weight) || t.weight < 0.0) {
        throw Error(StrCat("automaton: bad weight at state ", q, " label ",
                           LabelName(*symbols_, t.label)));
      }
      if (t.dst < 0 || t.dst >= n) {
        throw Error(StrCat("automaton: destination out of range at state ", q));
      }
      if (t.label == phi) {
        has_phi_ = true;
        if (t.dst == final_) {
          throw Error(StrCat("automaton: failure transition into final state from ", q));
        }
      }
    }
  }
  // phi-cycle check: each state has at most one phi arc, so chains are paths.
  if (has_phi_) {
    std::vector<int8_t> mark(static_cast<std::size_t>(n), 0);  // 0 new, 1 active, 2 done
    for (StateId q = 0; q < n; ++q) {
      StateId c = q;
      std::vector<StateId> chain;
      while (c != kNoState && mark[static_cast<std::size_t>(c)] == 0) {
        mark[static_cast<std::size_t>(c)] = 1;
        chain.push_back(c);
        const Transition* p = PhiArc(c);
        c = p ? p->dst : kNoState;
      }
      if (c != kNoState && mark[static_cast<std::size_t>(c)] == 1) {
        throw Error(StrCat("automaton: phi-cycle through state ", c));
      }
      for (StateId s : chain) mark[static_cast<std::size_t>(s)] = 2;
    }
  }
}

const Transition* Automaton::FindArc(StateId q, SymbolId label) const {
  const auto& state_arcs = arcs_[static_cast<std::size_t>(q)];
  auto it = std::lower_bound(state_arcs.begin(), state_arcs.end(), label,
                             [](const Transition& t, SymbolId l) {
                               return t.label < l;
                             });
  if (it == state_arcs.end() || it->label != label) return nullptr;
  return &*it;
}

std::size_t Automaton::NumArcs() const {
  std::size_t total = 0;
  for (const auto& a : arcs_) total += a.size();
  return total;
}

std::vector<PhiExtendedArc> Automaton::PhiExtendedTransitions(StateId q) const {
  if (q == final_) throw Error("phi-extended transitions of the final state");
  std::vector<PhiExtendedArc> out;
  std::set<SymbolId> seen;
  const SymbolId phi = PhiLabel();
  double acc = 1.0;
  StateId c = q;
  while (true) {
    for (const Transition& t : Arcs(c)) {
      if (t.label == phi) continue;
      if (seen.insert(t.label).second) {
        out.push_back({q, t.label, acc * t.weight, t.dst, c});
      }
    }
    const Transition* p = PhiArc(c);
    if (p == nullptr) break;
    acc *= p->weight;
    c = p->dst;
  }
  std::sort(out.begin(), out.end(),
            [](const PhiExtendedArc& a, const PhiExtendedArc& b) {
              return a.label < b.label;
            });
  return out;
}

std::optional<PhiExtendedArc> Automaton::ResolveLabel(StateId q,
                                                      SymbolId label) const {
  if (label == PhiLabel()) throw Error("cannot resolve the phi label");
  double acc = 1.0;
  StateId c = q;
  while (true) {
    if (const Transition* t = FindArc(c, label)) {
      return PhiExtendedArc{q, label, acc * t->weight, t->dst, c};
    }
    const Transition* p = PhiArc(c);
    if (p == nullptr) return std::nullopt;
    acc *= p->weight;
    c = p->dst;
  }
}

bool Automaton::operator==(const Automaton& other) const {
  return initial_ == other.initial_ && final_ == other.final_ &&
         arcs_ == other.arcs_ && *symbols_ == *other.symbols_;
}

std::string BackoffViolation::Describe(const SymbolTable& symbols) const {
  if (label == kNoLabelViolation) {
    return StrCat("state ", src, " backs off to ", target,
                  " without strictly more readable labels");
  }
  return StrCat("state ", src, " reads '", LabelName(symbols, label),
                "' but its backoff state ", target, " does not");
}

BackoffReport CheckBackoffComplete(const Automaton& a) {
  BackoffReport report;
  const SymbolId phi = a.PhiLabel();
  for (StateId q = 0; q < a.NumStates(); ++q) {
    const Transition* p = a.PhiArc(q);
    if (p == nullptr) continue;
    const StateId target = p->dst;
    bool equal = true;
    for (const Transition& t : a.Arcs(q)) {
      if (t.label == phi) continue;
      if (a.FindArc(target, t.label) == nullptr) {
        report.violations.push_back({q, target, t.label});
        equal = false;
      }
    }
    if (a.PhiArc(target) == nullptr) {
      // Strict containment: the target must read something q does not.
      std::size_t q_sigma = a.Arcs(q).size() - 1;  // minus the phi arc
      std::size_t t_sigma = a.Arcs(target).size();
      if (equal && q_sigma == t_sigma) {
        report.violations.push_back({q, target, kNoLabelViolation});
      }
    }
  }
  return report;
}

bool IsStochastic(const Automaton& a, double tol) {
  for (StateId q = 0; q < a.NumStates(); ++q) {
    if (q == a.Final()) continue;
    long double sum = 0.0L;
    for (const PhiExtendedArc& e : a.PhiExtendedTransitions(q)) {
      if (e.weight < 0.0) return false;
      sum += e.weight;
    }
    if (std::fabs(static_cast<double>(sum) - 1.0) > tol) return false;
  }
  return true;
}

namespace {

// States on the phi path from q to `resolved_at` inclusive, q excluded.
void MarkChain(const Automaton& a, StateId q, StateId resolved_at,
               std::vector<char>* mark) {
  StateId c = q;
  while (c != resolved_at) {
    const Transition* p = a.PhiArc(c);
    SFST_CHECK(p != nullptr, "broken phi chain");
    c = p->dst;
    (*mark)[static_cast<std::size_t>(c)] = 1;
  }
}

}  // namespace

Automaton Trim(const Automaton& a) {
  const StateId n = a.NumStates();
  const SymbolId phi = a.PhiLabel();

  // Anchor states: reached from the initial state by complete phi-extended
  // moves (each move ends with a symbol read).
  std::vector<std::vector<PhiExtendedArc>> ext(static_cast<std::size_t>(n));
  for (StateId q = 0; q < n; ++q) {
    if (q != a.Final()) ext[static_cast<std::size_t>(q)] = a.PhiExtendedTransitions(q);
  }
  std::vector<char> anchor(static_cast<std::size_t>(n), 0);
  std::deque<StateId> queue;
  anchor[static_cast<std::size_t>(a.Initial())] = 1;
  queue.push_back(a.Initial());
  while (!queue.empty()) {
    StateId q = queue.front();
    queue.pop_front();
    for (const PhiExtendedArc& e : ext[static_cast<std::size_t>(q)]) {
      if (!anchor[static_cast<std::size_t>(e.dst)]) {
        anchor[static_cast<std::size_t>(e.dst)] = 1;
        queue.push_back(e.dst);
      }
    }
  }

  // Coaccessible states: an allowed suffix of extended moves reaches final.
  std::vector<std::vector<StateId>> rev(static_cast<std::size_t>(n));
  for (StateId q = 0; q < n; ++q) {
    for (const PhiExtendedArc& e : ext[static_cast<std::size_t>(q)]) {
      rev[static_cast<std::size_t>(e.dst)].push_back(q);
    }
  }
  std::vector<char> coacc(static_cast<std::size_t>(n), 0);
  coacc[static_cast<std::size_t>(a.Final())] = 1;
  queue.push_back(a.Final());
  while (!queue.empty()) {
    StateId q = queue.front();
    queue.pop_front();
    for (StateId p : rev[static_cast<std::size_t>(q)]) {
      if (!coacc[static_cast<std::size_t>(p)]) {
        coacc[static_cast<std::size_t>(p)] = 1;
        queue.push_back(p);
      }
    }
  }

  // Useful states: anchors that are coaccessible, plus every state a useful
  // extended move passes through while backing off.
  std::vector<char> useful(static_cast<std::size_t>(n), 0);
  for (StateId q = 0; q < n; ++q) {
    if (!anchor[static_cast<std::size_t>(q)] || !coacc[static_cast<std::size_t>(q)]) continue;
    useful[static_cast<std::size_t>(q)] = 1;
    for (const PhiExtendedArc& e : ext[static_cast<std::size_t>(q)]) {
      if (coacc[static_cast<std::size_t>(e.dst)]) {
        MarkChain(a, q, e.resolved_at, &useful);
      }
    }
  }
  if (!useful[static_cast<std::size_t>(a.Initial())] ||
      !useful[static_cast<std::size_t>(a.Final())]) {
    throw Error("empty language");
  }

  std::vector<StateId> remap(static_cast<std::size_t>(n), kNoState);
  StateId next = 0;
  for (StateId q = 0; q < n; ++q) {
    if (useful[static_cast<std::size_t>(q)]) remap[static_cast<std::size_t>(q)] = next++;
  }

  // Order states so that a state's (kept) phi target is rebuilt before the
  // state itself; arc-keeping decisions at a state need the final arc sets
  // of everything deeper on its failure chain.
  std::vector<char> phi_kept(static_cast<std::size_t>(n), 0);
  for (StateId q = 0; q < n; ++q) {
    if (!useful[static_cast<std::size_t>(q)]) continue;
    const Transition* p = a.PhiArc(q);
    if (p != nullptr && useful[static_cast<std::size_t>(p->dst)]) {
      phi_kept[static_cast<std::size_t>(q)] = 1;
    }
  }
  std::vector<int> depth(static_cast<std::size_t>(n), -1);
  auto chain_depth = [&](StateId q, auto&& self) -> int {
    if (depth[static_cast<std::size_t>(q)] >= 0) return depth[static_cast<std::size_t>(q)];
    int d = 0;
    if (phi_kept[static_cast<std::size_t>(q)]) d = 1 + self(a.PhiArc(q)->dst, self);
    depth[static_cast<std::size_t>(q)] = d;
    return d;
  };
  std::vector<StateId> order;
  for (StateId q = 0; q < n; ++q) {
    if (useful[static_cast<std::size_t>(q)]) {
      chain_depth(q, chain_depth);
      order.push_back(q);
    }
  }
  std::sort(order.begin(), order.end(), [&](StateId x, StateId y) {
    return depth[static_cast<std::size_t>(x)] < depth[static_cast<std::size_t>(y)];
  });

  std::vector<std::vector<Transition>> new_arcs(static_cast<std::size_t>(next));
  // Final arc sets in old-state numbering, for deep-resolution lookups.
  std::vector<std::vector<Transition>> kept(static_cast<std::size_t>(n));
  for (StateId q : order) {
    for (const Transition& t : a.Arcs(q)) {
      if (t.label == phi) {
        if (phi_kept[static_cast<std::size_t>(q)]) kept[static_cast<std::size_t>(q)].push_back(t);
        continue;
      }
      if (useful[static_cast<std::size_t>(t.dst)]) {
        kept[static_cast<std::size_t>(q)].push_back(t);
        continue;
      }
      // The destination is dead. Dropping the label would un-shadow any
      // live deeper resolution of it, changing string weights from zero to
      // positive; keep a zero-weight arc in that case.
      if (!phi_kept[static_cast<std::size_t>(q)]) continue;
      StateId c = a.PhiArc(q)->dst;
      bool live_below = false;
      while (true) {
        const auto& carcs = kept[static_cast<std::size_t>(c)];
        auto it = std::find_if(carcs.begin(), carcs.end(), [&](const Transition& u) {
          return u.label == t.label;
        });
        if (it != carcs.end()) {
          live_below = it->weight > 0.0;
          break;
        }
        if (!phi_kept[static_cast<std::size_t>(c)]) break;
        c = a.PhiArc(c)->dst;
      }
      if (live_below) {
        kept[static_cast<std::size_t>(q)].push_back({t.label, 0.0, a.PhiArc(q)->dst});
      }
    }
    auto& out = new_arcs[static_cast<std::size_t>(remap[static_cast<std::size_t>(q)])];
    for (const Transition& t : kept[static_cast<std::size_t>(q)]) {
      out.push_back({t.label, t.weight, remap[static_cast<std::size_t>(t.dst)]});
    }
  }

  return Automaton(a.SymbolsPtr(), std::move(new_arcs),
                   remap[static_cast<std::size_t>(a.Initial())],
                   remap[static_cast<std::size_t>(a.Final())]);
}

Automaton ExpandPhi(const Automaton& a) {
  std::vector<std::vector<Transition>> arcs(static_cast<std::size_t>(a.NumStates()));
  for (StateId q = 0; q < a.NumStates(); ++q) {
    if (q == a.Final()) continue;
    for (const PhiExtendedArc& e : a.PhiExtendedTransitions(q)) {
      arcs[static_cast<std::size_t>(q)].push_back({e.label, e.weight, e.dst});
    }
  }
  return Automaton(a.SymbolsPtr(), std::move(arcs), a.Initial(), a.Final());
}

Automaton StripWeights(const Automaton& a) {
  std::vector<std::vector<Transition>> arcs(static_cast<std::size_t>(a.NumStates()));
  for (StateId q = 0; q < a.NumStates(); ++q) {
    for (const Transition& t : a.Arcs(q)) {
      arcs[static_cast<std::size_t>(q)].push_back({t.label, 1.0, t.dst});
    }
  }
  return Automaton(a.SymbolsPtr(), std::move(arcs), a.Initial(), a.Final());
}

Automaton ReplaceWeights(const Automaton& a,
                         const std::vector<std::vector<double>>& weights) {
  SFST_CHECK(weights.size() == static_cast<std::size_t>(a.NumStates()),
             "weight table shape mismatch");
  std::vector<std::vector<Transition>> arcs(static_cast<std::size_t>(a.NumStates()));
  for (StateId q = 0; q < a.NumStates(); ++q) {
    auto state_arcs = a.Arcs(q);
    SFST_CHECK(weights[static_cast<std::size_t>(q)].size() == state_arcs.size(),
               "weight table shape mismatch at state ", q);
    for (std::size_t k = 0; k < state_arcs.size(); ++k) {
      arcs[static_cast<std::size_t>(q)].push_back(
          {state_arcs[k].label, weights[static_cast<std::size_t>(q)][k],
           state_arcs[k].dst});
    }
  }
  return Automaton(a.SymbolsPtr(), std::move(arcs), a.Initial(), a.Final());
}

bool IsAcyclicAutomaton(const Automaton& a) {
  const StateId n = a.NumStates();
  std::vector<int8_t> mark(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<StateId, std::size_t>> stack;
  for (StateId root = 0; root < n; ++root) {
    if (mark[static_cast<std::size_t>(root)] != 0) continue;
    stack.emplace_back(root, 0);
    mark[static_cast<std::size_t>(root)] = 1;
    while (!stack.empty()) {
      auto& [q, idx] = stack.back();
      auto arcs = a.Arcs(q);
      if (idx == arcs.size()) {
        mark[static_cast<std::size_t>(q)] = 2;
        stack.pop_back();
        continue;
      }
      StateId v = arcs[idx++].dst;
      if (mark[static_cast<std::size_t>(v)] == 1) return false;
      if (mark[static_cast<std::size_t>(v)] == 0) {
        mark[static_cast<std::size_t>(v)] = 1;
        stack.emplace_back(v, 0);
      }
    }
  }
  return true;
}

std::optional<std::vector<StateId>> FindIsomorphism(const Automaton& a,
                                                    const Automaton& b) {
  if (a.NumStates() != b.NumStates()) return std::nullopt;
  if (!(a.Symbols() == b.Symbols())) return std::nullopt;
  std::vector<StateId> map(static_cast<std::size_t>(a.NumStates()), kNoState);
  std::deque<StateId> queue;
  map[static_cast<std::size_t>(a.Initial())] = b.Initial();
  queue.push_back(a.Initial());
  StateId visited = 0;
  while (!queue.empty()) {
    StateId qa = queue.front();
    queue.pop_front();
    ++visited;
    StateId qb = map[static_cast<std::size_t>(qa)];
    auto arcs_a = a.Arcs(qa);
    auto arcs_b = b.Arcs(qb);
    if (arcs_a.size() != arcs_b.size()) return std::nullopt;
    for (std::size_t k = 0; k < arcs_a.size(); ++k) {
      if (arcs_a[k].label != arcs_b[k].label) return std::nullopt;
      if (arcs_a[k].weight != arcs_b[k].weight) return std::nullopt;
      StateId& m = map[static_cast<std::size_t>(arcs_a[k].dst)];
      if (m == kNoState) {
        m = arcs_b[k].dst;
        queue.push_back(arcs_a[k].dst);
      } else if (m != arcs_b[k].dst) {
        return std::nullopt;
      }
    }
  }
  if (map[static_cast<std::size_t>(a.Final())] != b.Final()) return std::nullopt;
  if (visited != a.NumStates()) return std::nullopt;
  return map;
}

bool IsIsomorphic(const Automaton& a, const Automaton& b) {
  return FindIsomorphism(a, b).has_value();
}

}  // namespace sfst
