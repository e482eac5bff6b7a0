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
// Expected transition counts of a source model run against a target
// topology: c(x,q) for plain WFA targets, C(x,q) and C(phi,q) for phi-WFA
// targets, computed exactly (product + shortest distance) or by sampling.

#ifndef SFST_COUNTING_H_
#define SFST_COUNTING_H_

#include <cstdint>
#include <vector>

#include <sfst/automaton.h>
#include <sfst/sequence-model.h>

namespace sfst {

// Counts aligned with a target automaton: value k of state q belongs to the
// k-th arc of Arcs(q). On phi-WFA targets the phi arc's slot holds C(phi,q).
class ArcCounts {
 public:
  ArcCounts() = default;
  explicit ArcCounts(const Automaton& a);

  double& At(StateId q, std::size_t arc_index) {
    return values_[static_cast<std::size_t>(q)][arc_index];
  }
  double At(StateId q, std::size_t arc_index) const {
    return values_[static_cast<std::size_t>(q)][arc_index];
  }
  // The count of label x at state q; the arc must exist.
  double Get(const Automaton& a, StateId q, SymbolId label) const;

  // C(q): the sum over all of L[q], the phi slot included.
  double Total(StateId q) const;

  const std::vector<std::vector<double>>& values() const { return values_; }
  std::vector<std::vector<double>>& values() { return values_; }

 private:
  std::vector<std::vector<double>> values_;
};

using CountTable = ArcCounts;     // c(x,q), phi-free targets
using AggCountTable = ArcCounts;  // C(x,q) with C(phi,q) in the phi slots

// Expected counts of a phi-free stochastic source against a phi-free
// unweighted target. Throws on coverage gaps and on non-convergence.
CountTable CountWfa(const Automaton& source, const Automaton& target);

// Expected aggregated counts against a backoff-complete phi-WFA target.
// Acyclic products go through the negative-compensation transform and a
// real-semiring shortest distance; cyclic products use the equivalent
// phi-extended expansion of the product under the positive real semiring.
// C(phi, .) is filled by flow conservation.
AggCountTable CountPhi(const Automaton& source, const Automaton& target);

// Derives C(phi,q) from the sigma counts: count mass entering a state
// equals the count mass leaving it, the initial state receiving the source
// mass (1 for exact counts, the accepted fraction for sampled ones).
// Computed in topological order of the phi arcs. Throws when a phi count is
// negative beyond 1e-6.
void PhiCountFromFlow(const Automaton& target, AggCountTable* counts,
                      double source_mass = 1.0);

struct SampledCounts {
  AggCountTable counts;
  std::int64_t requested = 0;
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;   // sampled strings outside L(target)
  std::int64_t truncated = 0;  // samples cut at max_len and discarded
  double lost_mass = 0;        // next-symbol mass falling outside L(target)
};

// Unbiased sampled estimate of the aggregated counts: per accepted sample
// and position, the model's full next-symbol distribution is added into the
// resolution buckets, scaled by 1/n. Deterministic given the seed; each
// sample owns the derived stream (seed, sample index).
SampledCounts CountSampled(const SequenceModel& model, const Automaton& target,
                           std::int64_t n, std::uint64_t seed,
                           int max_len = 10000);

// Counts rendered as a weighted automaton over the target topology (arc
// weights are counts; phi arcs carry C(phi,q)).
Automaton CountsToAutomaton(const Automaton& target, const ArcCounts& counts);

// Reads the weights of a counts automaton back into a table.
ArcCounts CountsFromAutomaton(const Automaton& counts_automaton);

}  // namespace sfst

#endif  // SFST_COUNTING_H_
