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
// Corpus perplexity, exact KL divergence between automata, and the
// test-set topology lower bound.

#ifndef SFST_EVALUATION_H_
#define SFST_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <string>

#include <sfst/automaton.h>
#include <sfst/kl-minimization.h>
#include <sfst/sequence-model.h>
#include <sfst/text-io.h>

namespace sfst {

struct EvalReport {
  double log_prob_total = 0;  // natural log
  std::int64_t sentence_count = 0;
  std::int64_t token_count = 0;  // terminators included
  double perplexity = 0;
  double bits_per_symbol = 0;
  std::int64_t oov_count = 0;
  // 1-based corpus line of the first zero-probability sentence, if any.
  std::optional<std::int64_t> zero_prob_line;
};

EvalReport Perplexity(const SequenceModel& model, const Corpus& corpus);

struct KlResult {
  double value = 0;
  // Set when the divergence is infinite because some source string is
  // outside the candidate's support.
  std::optional<std::string> witness;
};

// D(p_source || p_candidate), both stochastic automata, the candidate
// possibly carrying failure transitions. Computed from pair-state visit
// masses over the product with the candidate's topology.
KlResult KlDivergence(const Automaton& source, const Automaton& candidate);

// The empirical distribution of a corpus as a prefix-tree WFA.
Automaton BuildEmpiricalModel(const Corpus& corpus,
                              std::shared_ptr<const SymbolTable> symbols);

struct LowerBoundResult {
  EvalReport report;
  Automaton model;
};

// The minimum test perplexity achievable with topology `a`: approximates
// the corpus's empirical model onto `a` and evaluates it on the same
// corpus. Exact up to DC stationarity (the solver guarantees a stationary
// point of the per-state objective, not a global optimum).
LowerBoundResult TopologyLowerBound(const Corpus& corpus, const Automaton& a,
                                    const ApproxConfig& config);

}  // namespace sfst

#endif  // SFST_EVALUATION_H_
