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

#include <sfst/sequence-model.h>

#include <cmath>
#include <limits>

#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

WfaBackedModel::WfaBackedModel(Automaton automaton, double stochastic_tol)
    : automaton_(std::move(automaton)) {
  if (!IsStochastic(automaton_, stochastic_tol)) {
    throw Error("sequence model: automaton is not stochastic");
  }
  extended_.resize(static_cast<std::size_t>(automaton_.NumStates()));
  for (StateId q = 0; q < automaton_.NumStates(); ++q) {
    if (q == automaton_.Final()) continue;
    extended_[static_cast<std::size_t>(q)] = automaton_.PhiExtendedTransitions(q);
  }
}

SequenceModel::State WfaBackedModel::Start() const {
  return static_cast<State>(automaton_.Initial());
}

Distribution WfaBackedModel::NextDistribution(State state) const {
  const StateId q = static_cast<StateId>(state);
  if (q == automaton_.Final()) {
    throw Error("sequence model: no distribution after the terminator");
  }
  Distribution dist;
  for (const PhiExtendedArc& e : extended_[static_cast<std::size_t>(q)]) {
    dist.emplace_back(e.label, e.weight);
  }
  return dist;
}

SequenceModel::State WfaBackedModel::Advance(State state, SymbolId symbol) const {
  const StateId q = static_cast<StateId>(state);
  if (q == automaton_.Final()) {
    throw Error("sequence model: advance past the terminator");
  }
  for (const PhiExtendedArc& e : extended_[static_cast<std::size_t>(q)]) {
    if (e.label == symbol) return static_cast<State>(e.dst);
  }
  throw Error(StrCat("sequence model: symbol ", symbol,
                     " unreadable from state ", q));
}

namespace {

// Terminal states carry a tag bit so a toy state can never collide with one.
constexpr std::uint64_t kToyTerminal = ~0ULL;

}  // namespace

ToyCharModel::ToyCharModel(std::shared_ptr<const SymbolTable> symbols,
                           double amplitude, std::uint64_t params_seed)
    : symbols_(std::move(symbols)),
      amplitude_(amplitude),
      params_seed_(params_seed) {
  if (!symbols_) throw Error("toy model: null symbol table");
  alphabet_ = symbols_->Alphabet();
  if (alphabet_.empty()) throw Error("toy model: empty alphabet");
}

SequenceModel::State ToyCharModel::Start() const {
  return SplitMix64(params_seed_ ^ 0x5eedULL);
}

Distribution ToyCharModel::NextDistribution(State state) const {
  if (state == kToyTerminal) {
    throw Error("sequence model: no distribution after the terminator");
  }
  Distribution dist;
  dist.reserve(alphabet_.size());
  long double total = 0.0L;
  for (SymbolId x : alphabet_) {
    const std::uint64_t h =
        SplitMix64(state ^ SplitMix64(static_cast<std::uint64_t>(x) + 1));
    const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;
    const double logit = amplitude_ * (2.0 * unit - 1.0);
    const double w = std::exp(logit);
    dist.emplace_back(x, w);
    total += w;
  }
  for (auto& [x, w] : dist) w = static_cast<double>(w / total);
  return dist;
}

SequenceModel::State ToyCharModel::Advance(State state, SymbolId symbol) const {
  if (state == kToyTerminal) {
    throw Error("sequence model: advance past the terminator");
  }
  if (symbol == symbols_->terminator_id()) return kToyTerminal;
  return SplitMix64(state * 0x100000001b3ULL ^
                    SplitMix64(static_cast<std::uint64_t>(symbol) + 17));
}

std::optional<std::vector<SymbolId>> SampleOne(const SequenceModel& model,
                                               CounterRng& rng, int max_len) {
  if (max_len <= 0) throw Error("sample: max_len must be positive");
  const SymbolId terminator = model.Symbols().terminator_id();
  std::vector<SymbolId> out;
  SequenceModel::State state = model.Start();
  while (true) {
    const Distribution dist = model.NextDistribution(state);
    const double u = rng.NextUnit();
    double cum = 0.0;
    SymbolId picked = dist.empty() ? terminator : dist.back().first;
    for (const auto& [x, p] : dist) {
      cum += p;
      if (u < cum) {
        picked = x;
        break;
      }
    }
    out.push_back(picked);
    if (picked == terminator) return out;
    if (static_cast<int>(out.size()) >= max_len) return std::nullopt;
    state = model.Advance(state, picked);
  }
}

std::optional<std::vector<SymbolId>> Sample(const SequenceModel& model,
                                            std::uint64_t seed, int max_len) {
  CounterRng rng = CounterRng::ForSample(seed, 0);
  return SampleOne(model, rng, max_len);
}

double Score(const SequenceModel& model, const std::vector<SymbolId>& string) {
  const SymbolId terminator = model.Symbols().terminator_id();
  if (string.empty() || string.back() != terminator) {
    throw Error("score: string must end with the terminator");
  }
  for (std::size_t i = 0; i + 1 < string.size(); ++i) {
    if (string[i] == terminator) {
      throw Error("score: terminator before the end of the string");
    }
    if (!model.Symbols().HasId(string[i])) {
      throw Error(StrCat("score: unknown symbol id ", string[i]));
    }
  }
  long double total = 0.0L;
  SequenceModel::State state = model.Start();
  for (std::size_t i = 0; i < string.size(); ++i) {
    const SymbolId x = string[i];
    const Distribution dist = model.NextDistribution(state);
    double p = 0.0;
    for (const auto& [sym, prob] : dist) {
      if (sym == x) {
        p = prob;
        break;
      }
    }
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(p);
    if (x != terminator) state = model.Advance(state, x);
  }
  return static_cast<double>(total);
}

}  // namespace sfst
