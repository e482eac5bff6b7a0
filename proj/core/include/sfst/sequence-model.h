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
// The opaque next-symbol source interface p(x|state) with state advance,
// a phi-WFA-backed implementation, a toy non-Markovian character model,
// random sampling and string scoring.

#ifndef SFST_SEQUENCE_MODEL_H_
#define SFST_SEQUENCE_MODEL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <sfst/automaton.h>
#include <sfst/random.h>
#include <sfst/symbol-table.h>

namespace sfst {

// Sparse distribution over next symbols, ascending by id, summing to 1.
using Distribution = std::vector<std::pair<SymbolId, double>>;

class SequenceModel {
 public:
  using State = std::uint64_t;

  virtual ~SequenceModel() = default;

  virtual State Start() const = 0;
  // Throws for a state reached by advancing past the terminator.
  virtual Distribution NextDistribution(State state) const = 0;
  // The symbol must have positive support at the state.
  virtual State Advance(State state, SymbolId symbol) const = 0;
  virtual const SymbolTable& Symbols() const = 0;
};

// Evaluates a stochastic phi-WFA as a sequence model: the distribution at a
// state is its phi-extended transition weights, shadowing included.
class WfaBackedModel : public SequenceModel {
 public:
  explicit WfaBackedModel(Automaton automaton, double stochastic_tol = 1e-6);

  State Start() const override;
  Distribution NextDistribution(State state) const override;
  State Advance(State state, SymbolId symbol) const override;
  const SymbolTable& Symbols() const override {
    return automaton_.Symbols();
  }

  const Automaton& automaton() const { return automaton_; }

 private:
  Automaton automaton_;
  std::vector<std::vector<PhiExtendedArc>> extended_;  // per state, eager
};

// A fixed-parameter recurrent character scorer whose hidden state hashes
// the full history, so it is not Markovian of any finite order. With
// amplitude 0 every distribution is uniform. Stands in for neural sources.
class ToyCharModel : public SequenceModel {
 public:
  ToyCharModel(std::shared_ptr<const SymbolTable> symbols, double amplitude,
               std::uint64_t params_seed);

  State Start() const override;
  Distribution NextDistribution(State state) const override;
  State Advance(State state, SymbolId symbol) const override;
  const SymbolTable& Symbols() const override { return *symbols_; }

 private:
  std::shared_ptr<const SymbolTable> symbols_;
  std::vector<SymbolId> alphabet_;
  double amplitude_;
  std::uint64_t params_seed_;
};

// One terminator-ended sample; nullopt when max_len was hit (the caller
// discards truncated samples when exactness matters).
std::optional<std::vector<SymbolId>> SampleOne(const SequenceModel& model,
                                               CounterRng& rng, int max_len);

// Deterministic given the seed.
std::optional<std::vector<SymbolId>> Sample(const SequenceModel& model,
                                            std::uint64_t seed, int max_len);

// Natural-log probability of a terminator-ended string; -inf when any
// factor is zero.
double Score(const SequenceModel& model, const std::vector<SymbolId>& string);

}  // namespace sfst

#endif  // SFST_SEQUENCE_MODEL_H_
