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

#include <sfst/intersection.h>

#include <algorithm>
#include <deque>
#include <unordered_map>

#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

namespace {

std::uint64_t PairKey(StateId s, StateId a) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s)) << 32) |
         static_cast<std::uint32_t>(a);
}

void RequireSharedSymbols(const Automaton& s, const Automaton& a) {
  if (s.SymbolsPtr() != a.SymbolsPtr() && !(s.Symbols() == a.Symbols())) {
    throw Error("intersect: symbol table mismatch");
  }
}

struct ProductBuilder {
  const Automaton& s;
  const Automaton& a;
  std::unordered_map<std::uint64_t, StateId> index;
  std::vector<std::pair<StateId, StateId>> pairs;
  std::vector<std::vector<Transition>> arcs;
  std::vector<std::vector<StateId>> reads;
  std::vector<std::pair<StateId, SymbolId>> parent;
  std::vector<CoverageGap> gaps;
  std::deque<StateId> queue;

  explicit ProductBuilder(const Automaton& s, const Automaton& a) : s(s), a(a) {}

  StateId Intern(StateId qs, StateId qa, StateId from, SymbolId via) {
    auto [it, inserted] = index.emplace(PairKey(qs, qa),
                                        static_cast<StateId>(pairs.size()));
    if (inserted) {
      pairs.emplace_back(qs, qa);
      arcs.emplace_back();
      reads.emplace_back();
      parent.emplace_back(from, via);
      queue.push_back(it->second);
    }
    return it->second;
  }

  void Emit(StateId from, SymbolId label, double weight, StateId qs, StateId qa,
            StateId read_at) {
    StateId dst = Intern(qs, qa, from, label);
    arcs[static_cast<std::size_t>(from)].push_back({label, weight, dst});
    reads[static_cast<std::size_t>(from)].push_back(read_at);
  }

  ProductAutomaton Finish() {
    StateId final = Intern(s.Final(), a.Final(), kNoState, kNoState);
    // Arc order must be the label order the Automaton constructor sorts to;
    // keep read_state aligned by sorting the two together.
    for (std::size_t q = 0; q < arcs.size(); ++q) {
      auto& ts = arcs[q];
      auto& rs = reads[q];
      std::vector<std::size_t> perm(ts.size());
      for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
      std::sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) {
        return ts[x].label < ts[y].label;
      });
      std::vector<Transition> ts2(ts.size());
      std::vector<StateId> rs2(rs.size());
      for (std::size_t i = 0; i < perm.size(); ++i) {
        ts2[i] = ts[perm[i]];
        rs2[i] = rs[perm[i]];
      }
      ts = std::move(ts2);
      rs = std::move(rs2);
    }
    ProductAutomaton out{
        Automaton(s.SymbolsPtr(), std::move(arcs), 0, final),
        std::move(pairs), std::move(reads), std::move(gaps), std::move(parent)};
    return out;
  }
};

}  // namespace

std::string ProductAutomaton::DescribeGap(const CoverageGap& gap) const {
  std::vector<SymbolId> prefix;
  StateId p = gap.product_state;
  while (p != kNoState && parent[static_cast<std::size_t>(p)].first != kNoState) {
    prefix.push_back(parent[static_cast<std::size_t>(p)].second);
    p = parent[static_cast<std::size_t>(p)].first;
  }
  std::reverse(prefix.begin(), prefix.end());
  const SymbolTable& symbols = machine.Symbols();
  std::string text;
  for (SymbolId x : prefix) {
    const std::string* name = symbols.Find(x);
    text += name ? *name : StrCat("#", x);
    text += ' ';
  }
  const std::string* bad = symbols.Find(gap.label);
  return StrCat("source emits '", bad ? *bad : StrCat("#", gap.label),
                "' after \"", text, "\" (source state ", gap.source_state,
                ") but the target cannot read it from state ",
                gap.target_state);
}

ProductAutomaton IntersectWfa(const Automaton& source, const Automaton& target) {
  RequireSharedSymbols(source, target);
  if (source.HasPhi() || target.HasPhi()) {
    throw Error("intersect: plain intersection requires phi-free machines");
  }
  return IntersectPhi(source, target);
}

ProductAutomaton IntersectPhi(const Automaton& source, const Automaton& target) {
  RequireSharedSymbols(source, target);
  if (target.HasPhi()) {
    BackoffReport report = CheckBackoffComplete(target);
    if (!report.ok()) {
      throw Error(StrCat("intersect: target is not backoff-complete: ",
                         report.violations.front().Describe(target.Symbols())));
    }
  }

  ProductBuilder b(source, target);
  b.Intern(source.Initial(), target.Initial(), kNoState, kNoState);
  while (!b.queue.empty()) {
    StateId pid = b.queue.front();
    b.queue.pop_front();
    auto [qs, qa] = b.pairs[static_cast<std::size_t>(pid)];
    if (qs == source.Final() || qa == target.Final()) continue;

    const Transition* s_phi = source.PhiArc(qs);
    const Transition* a_phi = target.PhiArc(qa);
    const bool product_phi = s_phi != nullptr && a_phi != nullptr;

    for (const PhiExtendedArc& e : source.PhiExtendedTransitions(qs)) {
      const SymbolId x = e.label;
      const bool s_direct = e.resolved_at == qs;
      const Transition* a_arc = target.FindArc(qa, x);
      if (s_direct && a_arc != nullptr) {
        b.Emit(pid, x, e.weight * a_arc->weight, e.dst, a_arc->dst, qa);
      } else if (s_direct && a_arc == nullptr) {
        auto res = target.ResolveLabel(qa, x);
        if (!res) {
          if (e.weight > 0.0) b.gaps.push_back({qs, qa, x, pid});
          continue;
        }
        b.Emit(pid, x, e.weight * res->weight, e.dst, res->dst, res->resolved_at);
      } else if (!s_direct && a_arc != nullptr) {
        b.Emit(pid, x, e.weight * a_arc->weight, e.dst, a_arc->dst, qa);
      } else {
        // Readable on neither side directly: follow the paired failure arcs
        // when both exist, where the label stays unshadowed.
        if (product_phi) {
          if (!target.ResolveLabel(qa, x)) {
            if (e.weight > 0.0) b.gaps.push_back({qs, qa, x, pid});
          }
          continue;  // a deeper product state reads it
        }
        if (e.weight > 0.0) b.gaps.push_back({qs, qa, x, pid});
      }
    }
    if (product_phi) {
      b.Emit(pid, source.PhiLabel(), s_phi->weight * a_phi->weight, s_phi->dst,
             a_phi->dst, kNoState);
    }
  }
  return b.Finish();
}

Graph CompensatedMachine::ToGraph() const {
  Graph g;
  g.num_states = num_states;
  g.initial = initial;
  g.arcs.resize(static_cast<std::size_t>(num_states));
  for (StateId q = 0; q < num_states; ++q) {
    for (const CompensatedArc& a : arcs[static_cast<std::size_t>(q)]) {
      g.arcs[static_cast<std::size_t>(q)].push_back({a.weight, a.dst});
    }
  }
  return g;
}

namespace {

CompensatedMachine BuildCompensated(
    const Automaton& m, const std::vector<std::vector<StateId>>& read_state) {
  {
    Graph g = GraphFromAutomaton(m);
    if (m.HasPhi() && !IsAcyclicGraph(g)) {
      throw Error(
          "compensate: cyclic product; exact compensated counting is limited "
          "to acyclic products, use sampled counting instead");
    }
  }
  const SymbolId phi = m.PhiLabel();
  CompensatedMachine out;
  out.num_states = m.NumStates();
  out.initial = m.Initial();
  out.final = m.Final();
  out.arcs.resize(static_cast<std::size_t>(m.NumStates()));

  auto read_of = [&](StateId q, std::size_t arc_idx) {
    return read_state.empty() ? q : read_state[static_cast<std::size_t>(q)][arc_idx];
  };

  for (StateId q = 0; q < m.NumStates(); ++q) {
    auto arcs = m.Arcs(q);
    const Transition* p = m.PhiArc(q);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const Transition& t = arcs[k];
      if (t.label == phi) {
        out.arcs[static_cast<std::size_t>(q)].push_back(
            {kEpsilonLabel, kNoState, t.weight, t.dst});
        continue;
      }
      out.arcs[static_cast<std::size_t>(q)].push_back(
          {t.label, read_of(q, k), t.weight, t.dst});
      // One negative arc per shadowed resolution: the path that reads this
      // label again beyond the failure arc is disallowed and must cancel.
      if (p != nullptr) {
        auto res = m.ResolveLabel(p->dst, t.label);
        if (res) {
          // Read state of the arc owning the deep resolution.
          StateId deep_read = res->resolved_at;
          if (!read_state.empty()) {
            auto deep_arcs = m.Arcs(res->resolved_at);
            for (std::size_t j = 0; j < deep_arcs.size(); ++j) {
              if (deep_arcs[j].label == t.label) {
                deep_read = read_state[static_cast<std::size_t>(res->resolved_at)][j];
                break;
              }
            }
          }
          out.arcs[static_cast<std::size_t>(q)].push_back(
              {t.label, deep_read, -p->weight * res->weight, res->dst});
        }
      }
    }
  }
  return out;
}

}  // namespace

CompensatedMachine CompensatePhi(const ProductAutomaton& product) {
  return BuildCompensated(product.machine, product.read_state);
}

CompensatedMachine CompensateAutomaton(const Automaton& a) {
  return BuildCompensated(a, {});
}

}  // namespace sfst
