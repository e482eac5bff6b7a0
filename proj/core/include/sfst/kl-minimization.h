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
// Turning expected counts into the KL-minimizing weighted automaton: the
// closed form c(x,q)/c(q) for phi-free targets, per-state difference-of-
// convex iteration for phi-WFA targets, and failure-weight assignment from
// the companion distribution.

#ifndef SFST_KL_MINIMIZATION_H_
#define SFST_KL_MINIMIZATION_H_

#include <cstdint>
#include <vector>

#include <sfst/automaton.h>
#include <sfst/counting.h>
#include <sfst/sequence-model.h>

namespace sfst {

struct ApproxConfig {
  double epsilon = 1e-6;   // lower bound on every companion weight
  double tol = 1e-10;      // max-norm convergence threshold on y
  int max_iters = 1000;
  // Sampled counting (used when the source is an opaque model).
  std::int64_t samples = 100000;
  std::uint64_t seed = 0;
  int max_sample_len = 10000;
};

// Backoff structure of a target automaton, indexed for per-state solves:
// for each state q, the states q0 with a phi arc into q together with the
// positions of L[q0] n Sigma inside q's arc list.
class BackoffIndex {
 public:
  struct Contributor {
    StateId state;                   // q0 in B1(q)
    std::size_t phi_arc_index;       // position of q0's phi arc (its count slot)
    std::vector<int> label_positions;  // L[q0] n Sigma as indices into Arcs(q)
  };

  explicit BackoffIndex(const Automaton& a);

  const std::vector<Contributor>& At(StateId q) const {
    return contributors_[static_cast<std::size_t>(q)];
  }

 private:
  std::vector<std::vector<Contributor>> contributors_;
};

// One per-state optimization instance over k = counts.size() coordinates
// (the companion distribution at the state, phi coordinate included).
struct DcProblem {
  std::vector<double> counts;  // C(x,q), the phi slot holding C(phi,q)
  struct Contributor {
    double phi_count;          // C(phi,q0)
    std::vector<int> labels;   // positions of L[q0] n Sigma in y
  };
  std::vector<Contributor> contributors;
  double epsilon = 1e-6;
};

struct DcSolution {
  std::vector<double> y;
  int iterations = 0;
  double objective = 0;
};

// The objective of the per-state problem (what the DC iteration ascends):
//   sum_x C(x,q) log y_x  -  sum_{q0} C(phi,q0) log(1 - sum_{x in L[q0]} y_x).
double DcObjective(const DcProblem& problem, const std::vector<double>& y);

// Iterates y_x <- max(C(x,q) / (lambda - f(x,q,y)), epsilon) with lambda
// found by bisection so that sum y = 1, from the count-proportional
// initialization. The objective is checked to be non-decreasing at every
// iteration; a decrease beyond 1e-9 raises InternalError. With no
// contributors the update reduces to the closed form in one step.
DcSolution SolveStateDc(const DcProblem& problem, double tol, int max_iters);

// Lemma-3 closed form: weights c(x,q)/c(q); zero-count states fall back to
// the uniform distribution over their labels.
Automaton NormalizeClosedForm(const CountTable& counts, const Automaton& target);

// Weights a backoff-complete topology from per-state companion vectors
// (aligned with Arcs(q)): sigma arcs get y_x, and the failure arc q -> q'
// gets y_phi / d(q,q') with d(q,q') = 1 - sum_{x in L[q] n Sigma} y'_x.
// The result is stochastic over the phi-extended transitions.
Automaton AssignFailureWeights(const std::vector<std::vector<double>>& y,
                               const Automaton& target);

// KL-minimizing normalization of a counts automaton (weights = counts):
// closed form when the machine is phi-free, otherwise per-state DC solves
// followed by failure-weight assignment.
Automaton KlMinNormalize(const Automaton& counts_automaton,
                         const ApproxConfig& config);

// Per-state proportional normalization of a counts automaton, the phi slot
// treated as an ordinary coordinate (the closed form on raw counts).
Automaton LocalNormalize(const Automaton& counts_automaton);

// count -> solve -> assign. Exact counting for automaton sources; the
// overload taking a model uses sampled counting with config.samples and
// config.seed. The topology's weights are ignored.
Automaton Approximate(const Automaton& source, const Automaton& topology,
                      const ApproxConfig& config);
Automaton Approximate(const SequenceModel& source, const Automaton& topology,
                      const ApproxConfig& config);

}  // namespace sfst

#endif  // SFST_KL_MINIMIZATION_H_
