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

#include <sfst/evaluation.h>

#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include <sfst/intersection.h>
#include <sfst/shortest-distance.h>
#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

EvalReport Perplexity(const SequenceModel& model, const Corpus& corpus) {
  EvalReport report;
  report.oov_count = corpus.oov_count;
  long double total = 0.0L;
  std::int64_t line = 0;
  for (const auto& sentence : corpus.sentences) {
    ++line;
    std::vector<SymbolId> terminated = sentence;
    terminated.push_back(model.Symbols().terminator_id());
    const double logp = Score(model, terminated);
    if (std::isinf(logp) && !report.zero_prob_line) report.zero_prob_line = line;
    total += logp;
    report.token_count += static_cast<std::int64_t>(terminated.size());
    ++report.sentence_count;
  }
  report.log_prob_total = static_cast<double>(total);
  if (report.token_count > 0) {
    const double mean_neg =
        -report.log_prob_total / static_cast<double>(report.token_count);
    report.perplexity = std::exp(mean_neg);
    report.bits_per_symbol = mean_neg / std::log(2.0);
  } else {
    report.perplexity = 1.0;
    report.bits_per_symbol = 0.0;
  }
  return report;
}

KlResult KlDivergence(const Automaton& source, const Automaton& candidate) {
  ProductAutomaton product = IntersectPhi(source, StripWeights(candidate));
  if (!product.coverage_gaps.empty()) {
    return {std::numeric_limits<double>::infinity(),
            product.DescribeGap(product.coverage_gaps.front())};
  }
  const Automaton& m = product.machine;

  // Anchor masses: the expected number of visits per product pair, counting
  // arrivals by symbol reads (the empty prefix arrives at the start state).
  // Computed over the phi-extended expansion so cycles stay positive.
  Graph g;
  g.num_states = m.NumStates();
  g.initial = m.Initial();
  g.arcs.resize(static_cast<std::size_t>(m.NumStates()));
  std::vector<std::vector<PhiExtendedArc>> ext(
      static_cast<std::size_t>(m.NumStates()));
  for (StateId p = 0; p < m.NumStates(); ++p) {
    if (p == m.Final()) continue;
    ext[static_cast<std::size_t>(p)] = m.PhiExtendedTransitions(p);
    for (const PhiExtendedArc& e : ext[static_cast<std::size_t>(p)]) {
      g.arcs[static_cast<std::size_t>(p)].push_back({e.weight, e.dst});
    }
  }
  QueueDiscipline queue = IsAcyclicGraph(g) ? QueueDiscipline::Topological()
                                            : QueueDiscipline::Fifo();
  DistanceResult gamma = ShortestDistance(g, queue, Semiring::kPositiveReal);

  // Cached extended distributions of both machines.
  std::unordered_map<StateId, std::vector<PhiExtendedArc>> source_ext;
  std::unordered_map<StateId, std::map<SymbolId, double>> cand_ext;

  long double divergence = 0.0L;
  for (StateId p = 0; p < m.NumStates(); ++p) {
    const double mass = gamma.distance[static_cast<std::size_t>(p)];
    if (mass <= 0.0) continue;
    auto [qs, qa] = product.pairs[static_cast<std::size_t>(p)];
    if (qs == source.Final()) continue;

    auto sit = source_ext.find(qs);
    if (sit == source_ext.end()) {
      sit = source_ext.emplace(qs, source.PhiExtendedTransitions(qs)).first;
    }
    auto cit = cand_ext.find(qa);
    if (cit == cand_ext.end()) {
      std::map<SymbolId, double> dist;
      for (const PhiExtendedArc& e : candidate.PhiExtendedTransitions(qa)) {
        dist.emplace(e.label, e.weight);
      }
      cit = cand_ext.emplace(qa, std::move(dist)).first;
    }
    for (const PhiExtendedArc& e : sit->second) {
      const double ps = e.weight;
      if (ps <= 0.0) continue;
      auto pt_it = cit->second.find(e.label);
      const double pt = pt_it == cit->second.end() ? 0.0 : pt_it->second;
      if (pt <= 0.0) {
        const std::string* name = source.Symbols().Find(e.label);
        return {std::numeric_limits<double>::infinity(),
                StrCat("candidate assigns zero probability to '",
                       name ? *name : StrCat("#", e.label),
                       "' at candidate state ", qa)};
      }
      divergence += static_cast<long double>(mass) * ps * (std::log(ps) - std::log(pt));
    }
  }
  double value = static_cast<double>(divergence);
  if (value < 0.0) {
    if (value < -1e-9) {
      throw InternalError(StrCat("negative KL divergence ", value));
    }
    value = 0.0;
  }
  return {value, std::nullopt};
}

Automaton BuildEmpiricalModel(const Corpus& corpus,
                              std::shared_ptr<const SymbolTable> symbols) {
  if (corpus.sentences.empty()) throw Error("empirical model: empty corpus");
  const SymbolId terminator = symbols->terminator_id();

  struct Node {
    std::map<SymbolId, StateId> children;
    std::map<SymbolId, std::int64_t> child_counts;  // terminator included
    std::int64_t total = 0;
  };
  std::vector<Node> nodes(1);
  for (const auto& sentence : corpus.sentences) {
    StateId at = 0;
    for (std::size_t i = 0; i <= sentence.size(); ++i) {
      const SymbolId x = i < sentence.size() ? sentence[i] : terminator;
      Node& node = nodes[static_cast<std::size_t>(at)];
      node.total += 1;
      node.child_counts[x] += 1;
      if (x == terminator) break;
      auto it = node.children.find(x);
      if (it == node.children.end()) {
        StateId next = static_cast<StateId>(nodes.size());
        nodes[static_cast<std::size_t>(at)].children.emplace(x, next);
        nodes.emplace_back();
        at = next;
      } else {
        at = it->second;
      }
    }
  }
  const StateId final = static_cast<StateId>(nodes.size());
  std::vector<std::vector<Transition>> arcs(nodes.size() + 1);
  for (StateId q = 0; q < final; ++q) {
    const Node& node = nodes[static_cast<std::size_t>(q)];
    for (const auto& [x, count] : node.child_counts) {
      const double w =
          static_cast<double>(count) / static_cast<double>(node.total);
      const StateId dst =
          x == terminator ? final : node.children.at(x);
      arcs[static_cast<std::size_t>(q)].push_back({x, w, dst});
    }
  }
  return Automaton(std::move(symbols), std::move(arcs), 0, final);
}

LowerBoundResult TopologyLowerBound(const Corpus& corpus, const Automaton& a,
                                    const ApproxConfig& config) {
  Automaton empirical = BuildEmpiricalModel(corpus, a.SymbolsPtr());
  Automaton model = Approximate(empirical, a, config);
  WfaBackedModel backed(model);
  return {Perplexity(backed, corpus), std::move(model)};
}

}  // namespace sfst
