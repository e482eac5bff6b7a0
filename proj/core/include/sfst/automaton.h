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
// Deterministic weighted finite automata with failure (phi) transitions:
// the data model, structural validation, phi semantics (extended
// transitions, shadowing, backoff completeness) and trimming.

#ifndef SFST_AUTOMATON_H_
#define SFST_AUTOMATON_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <sfst/symbol-table.h>

namespace sfst {

using StateId = std::int32_t;

constexpr StateId kNoState = -1;

// One transition out of an implicit source state. The label is a symbol id
// or the table's phi id; weights are non-negative on user-facing machines.
struct Transition {
  SymbolId label;
  double weight;
  StateId dst;

  bool operator==(const Transition&) const = default;
};

// An effective transition of E*[q]: the first unshadowed way to read
// `label` from `src`, through an optional leading failure path. `weight` is
// the product of the phi weights along that path and the matched arc
// weight; `resolved_at` is the state q^x owning the matched arc.
struct PhiExtendedArc {
  StateId src;
  SymbolId label;
  double weight;
  StateId dst;
  StateId resolved_at;
};

// A deterministic (phi-)WFA with a single initial and a single final state.
// The final state is a sink. Immutable after construction; construction
// validates: at most one arc per (state, label), at most one phi arc per
// state, no phi cycles, labels known to the symbol table, finite
// non-negative weights.
class Automaton {
 public:
  Automaton(std::shared_ptr<const SymbolTable> symbols,
            std::vector<std::vector<Transition>> arcs, StateId initial,
            StateId final);

  StateId NumStates() const { return static_cast<StateId>(arcs_.size()); }
  StateId Initial() const { return initial_; }
  StateId Final() const { return final_; }

  std::span<const Transition> Arcs(StateId q) const {
    return arcs_[static_cast<std::size_t>(q)];
  }
  // Binary search by label; nullptr if absent.
  const Transition* FindArc(StateId q, SymbolId label) const;
  const Transition* PhiArc(StateId q) const {
    return FindArc(q, PhiLabel());
  }
  bool HasPhi() const { return has_phi_; }
  std::size_t NumArcs() const;

  const SymbolTable& Symbols() const { return *symbols_; }
  const std::shared_ptr<const SymbolTable>& SymbolsPtr() const {
    return symbols_;
  }
  SymbolId PhiLabel() const { return symbols_->phi_id(); }
  SymbolId TerminatorLabel() const { return symbols_->terminator_id(); }

  // E*[q], sorted by label. q must not be the final state.
  std::vector<PhiExtendedArc> PhiExtendedTransitions(StateId q) const;
  // The E* entry for one label, or nullopt when the label is unreadable.
  std::optional<PhiExtendedArc> ResolveLabel(StateId q, SymbolId label) const;

  bool operator==(const Automaton&) const;

 private:
  std::shared_ptr<const SymbolTable> symbols_;
  std::vector<std::vector<Transition>> arcs_;  // per state, label-sorted
  StateId initial_;
  StateId final_;
  bool has_phi_ = false;
};

// One backoff-completeness violation. label == kNoLabelViolation marks a
// failed strict-containment requirement for the (src, target) pair.
struct BackoffViolation {
  StateId src;
  StateId target;
  SymbolId label;
  std::string Describe(const SymbolTable& symbols) const;
};

constexpr SymbolId kNoLabelViolation = -1;

struct BackoffReport {
  std::vector<BackoffViolation> violations;
  bool ok() const { return violations.empty(); }
};

// A phi arc q -> q' requires L[q] n Sigma within L[q'] n Sigma, strictly
// when q' has no phi arc of its own.
BackoffReport CheckBackoffComplete(const Automaton& a);

// True iff every non-final state's E* weights sum to 1 within tol.
bool IsStochastic(const Automaton& a, double tol);

// Removes states that lie on no allowed successful path, preserving the
// weight of every accepted string. Throws Error("empty language") when
// nothing remains.
Automaton Trim(const Automaton& a);

// Replaces E[q] by E*[q]: an equivalent plain WFA without phi arcs.
Automaton ExpandPhi(const Automaton& a);

// Same topology, all weights set to one.
Automaton StripWeights(const Automaton& a);

// Same topology, weights taken from `weights` (aligned with Arcs(q)).
Automaton ReplaceWeights(const Automaton& a,
                         const std::vector<std::vector<double>>& weights);

// True when the graph of all arcs (phi included) has no directed cycle.
bool IsAcyclicAutomaton(const Automaton& a);

// Label- and weight-preserving bijection between two deterministic
// machines; the vector maps a's states to b's. Requires every state of a
// reachable.
std::optional<std::vector<StateId>> FindIsomorphism(const Automaton& a,
                                                    const Automaton& b);
bool IsIsomorphic(const Automaton& a, const Automaton& b);

}  // namespace sfst

#endif  // SFST_AUTOMATON_H_
