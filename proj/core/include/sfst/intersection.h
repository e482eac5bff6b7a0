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
//
// Product constructions: plain WFA intersection, phi-preserving
// intersection, and the phi -> epsilon negative-compensation transform that
// keeps track of target-side read states.

#ifndef SFST_INTERSECTION_H_
#define SFST_INTERSECTION_H_

#include <utility>
#include <vector>

#include <sfst/automaton.h>
#include <sfst/shortest-distance.h>

namespace sfst {

// A source label that cannot be read from the paired target state; evidence
// that L(source) is not contained in L(target).
struct CoverageGap {
  StateId source_state;
  StateId target_state;
  SymbolId label;
  StateId product_state;
};

// The reachable product of a source and a target machine. `machine` is a
// (phi-)WFA over product states; `pairs` maps each product state back to
// (source state, target state); `read_state` parallels machine arcs and
// holds the target-side state at which each sigma label is actually read
// (the resolution state q^x when the target backs off).
struct ProductAutomaton {
  Automaton machine;
  std::vector<std::pair<StateId, StateId>> pairs;
  std::vector<std::vector<StateId>> read_state;
  std::vector<CoverageGap> coverage_gaps;
  // BFS parent links for reconstructing witness prefixes: (state, label).
  std::vector<std::pair<StateId, SymbolId>> parent;

  // A human-readable witness for a coverage gap: the offending prefix.
  std::string DescribeGap(const CoverageGap& gap) const;
};

// Intersection of a stochastic phi-free source with a phi-free unweighted
// target over a shared symbol table. String weights equal the source's.
ProductAutomaton IntersectWfa(const Automaton& source, const Automaton& target);

// Phi-preserving intersection: the product keeps a failure transition
// wherever both sides back off, and expands one-sided backoffs into
// explicit arcs. Allowed-path string weights equal the source's on
// L(source) n L(target). The target must be backoff-complete when it has
// failure transitions.
ProductAutomaton IntersectPhi(const Automaton& source, const Automaton& target);

constexpr SymbolId kEpsilonLabel = -1;

struct CompensatedArc {
  SymbolId label;      // a sigma label, or kEpsilonLabel for former phi arcs
  StateId read_state;  // target-side read state; kNoState on epsilon arcs
  double weight;       // may be negative on compensation arcs
  StateId dst;
};

// A plain WFA over the real semiring, equivalent to a phi-WFA: each phi arc
// became an epsilon arc, and each formerly disallowed path is cancelled by
// exactly one negatively-weighted arc.
struct CompensatedMachine {
  StateId num_states = 0;
  StateId initial = 0;
  StateId final = 0;
  std::vector<std::vector<CompensatedArc>> arcs;

  Graph ToGraph() const;
};

// Throws when the product graph is cyclic (exact counting then has to use
// either the expansion route or sampling).
CompensatedMachine CompensatePhi(const ProductAutomaton& product);

// The same transform applied to a stand-alone phi-WFA; read states refer to
// the machine's own states.
CompensatedMachine CompensateAutomaton(const Automaton& a);

}  // namespace sfst

#endif  // SFST_INTERSECTION_H_
