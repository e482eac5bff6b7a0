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

#include "testing/oracles.h"

#include <cmath>
#include <limits>

#include <sfst/util.h>

namespace sfst::testing {

namespace {

void EnumerateRec(const Automaton& a, StateId q, String* prefix, double weight,
                  int max_len, std::map<String, double>* out) {
  if (q == a.Final()) {
    (*out)[*prefix] += weight;
    return;
  }
  if (static_cast<int>(prefix->size()) >= max_len) return;
  for (const PhiExtendedArc& e : a.PhiExtendedTransitions(q)) {
    if (e.weight == 0.0) continue;
    prefix->push_back(e.label);
    EnumerateRec(a, e.dst, prefix, weight * e.weight, max_len, out);
    prefix->pop_back();
  }
}

std::size_t ArcIndexOf(const Automaton& a, StateId q, SymbolId label) {
  auto arcs = a.Arcs(q);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    if (arcs[k].label == label) return k;
  }
  throw InternalError("oracle: arc not found");
}

}  // namespace

std::map<String, double> EnumerateStrings(const Automaton& a, int max_len) {
  std::map<String, double> out;
  String prefix;
  EnumerateRec(a, a.Initial(), &prefix, 1.0, max_len, &out);
  return out;
}

ArcCounts OracleCounts(const Automaton& source, const Automaton& target) {
  SFST_CHECK(IsAcyclicAutomaton(source), "oracle counting needs an acyclic source");
  const SymbolId phi = target.PhiLabel();
  ArcCounts counts(target);
  // Long enough to cover every path of the acyclic source.
  const int max_len = source.NumStates() + 2;
  for (const auto& [string, weight] : EnumerateStrings(source, max_len)) {
    StateId qa = target.Initial();
    for (SymbolId x : string) {
      auto res = target.ResolveLabel(qa, x);
      SFST_CHECK(res.has_value(), "oracle: source string not covered by target");
      // Failure hops leave every chain state before the resolution.
      StateId c = qa;
      while (c != res->resolved_at) {
        const Transition* p = target.PhiArc(c);
        counts.At(c, ArcIndexOf(target, c, phi)) += weight;
        c = p->dst;
      }
      counts.At(res->resolved_at, ArcIndexOf(target, res->resolved_at, x)) += weight;
      qa = res->dst;
    }
  }
  return counts;
}

std::map<std::pair<StateId, StateId>, double> OracleGamma(
    const Automaton& source, const Automaton& target) {
  SFST_CHECK(IsAcyclicAutomaton(source), "oracle gamma needs an acyclic source");
  std::map<std::pair<StateId, StateId>, double> gamma;
  const int max_len = source.NumStates() + 2;
  // Recursive prefix walk: each prefix contributes its source probability
  // to the pair it lands on.
  struct Walker {
    const Automaton& s;
    const Automaton& t;
    std::map<std::pair<StateId, StateId>, double>& gamma;
    int max_len;

    void Walk(StateId qs, StateId qa, double mass, int depth) {
      gamma[{qs, qa}] += mass;
      if (qs == s.Final() || depth >= max_len) return;
      for (const PhiExtendedArc& e : s.PhiExtendedTransitions(qs)) {
        if (e.weight == 0.0) continue;
        auto res = t.ResolveLabel(qa, e.label);
        SFST_CHECK(res.has_value(), "oracle: prefix not covered by target");
        Walk(e.dst, res->dst, mass * e.weight, depth + 1);
      }
    }
  } walker{source, target, gamma, max_len};
  walker.Walk(source.Initial(), target.Initial(), 1.0, 0);
  return gamma;
}

double OracleKl(const Automaton& source, const Automaton& candidate) {
  SFST_CHECK(IsAcyclicAutomaton(source), "oracle KL needs an acyclic source");
  const int max_len = source.NumStates() + 2;
  long double divergence = 0.0L;
  for (const auto& [string, ps] : EnumerateStrings(source, max_len)) {
    if (ps == 0.0) continue;
    // Candidate weight of the same string over allowed paths (deterministic,
    // so a single walk).
    double pt = 1.0;
    StateId qa = candidate.Initial();
    for (SymbolId x : string) {
      auto res = candidate.ResolveLabel(qa, x);
      if (!res || res->weight <= 0.0) {
        return std::numeric_limits<double>::infinity();
      }
      pt *= res->weight;
      qa = res->dst;
    }
    if (qa != candidate.Final()) return std::numeric_limits<double>::infinity();
    divergence += ps * (std::log(ps) - std::log(pt));
  }
  return static_cast<double>(divergence);
}

namespace {

double CompWeightRec(const CompensatedMachine& m, StateId q, const String& s,
                     std::size_t pos) {
  double total = 0.0;
  if (pos == s.size() && q == m.final) total += 1.0;
  for (const CompensatedArc& arc : m.arcs[static_cast<std::size_t>(q)]) {
    if (arc.label == kEpsilonLabel) {
      total += arc.weight * CompWeightRec(m, arc.dst, s, pos);
    } else if (pos < s.size() && arc.label == s[pos]) {
      total += arc.weight * CompWeightRec(m, arc.dst, s, pos + 1);
    }
  }
  return total;
}

}  // namespace

double CompensatedStringWeight(const CompensatedMachine& m, const String& s) {
  return CompWeightRec(m, m.initial, s, 0);
}

double TotalVariation(const std::vector<double>& p, const std::vector<double>& q) {
  SFST_CHECK(p.size() == q.size(), "total variation: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::fabs(p[i] - q[i]);
  return 0.5 * sum;
}

}  // namespace sfst::testing
