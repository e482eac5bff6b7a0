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

#include <sfst/counting.h>

#include <algorithm>
#include <cmath>
#include <iostream>

#include <sfst/intersection.h>
#include <sfst/shortest-distance.h>
#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

ArcCounts::ArcCounts(const Automaton& a) {
  values_.resize(static_cast<std::size_t>(a.NumStates()));
  for (StateId q = 0; q < a.NumStates(); ++q) {
    values_[static_cast<std::size_t>(q)].assign(a.Arcs(q).size(), 0.0);
  }
}

double ArcCounts::Get(const Automaton& a, StateId q, SymbolId label) const {
  auto arcs = a.Arcs(q);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    if (arcs[k].label == label) return At(q, k);
  }
  throw Error(StrCat("no arc with label ", label, " at state ", q));
}

double ArcCounts::Total(StateId q) const {
  long double sum = 0.0L;
  for (double v : values_[static_cast<std::size_t>(q)]) sum += v;
  return static_cast<double>(sum);
}

namespace {

void RequireCoverage(const ProductAutomaton& product) {
  if (product.coverage_gaps.empty()) return;
  throw Error(StrCat("counting: coverage violation, ",
                     product.coverage_gaps.size(), " gap(s); first: ",
                     product.DescribeGap(product.coverage_gaps.front())));
}

// Index of the arc labeled `label` at state q; the arc must exist.
std::size_t ArcIndex(const Automaton& a, StateId q, SymbolId label) {
  auto arcs = a.Arcs(q);
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    if (arcs[k].label == label) return k;
  }
  throw InternalError(StrCat("missing arc for label ", label, " at state ", q));
}

void ClampNegatives(ArcCounts* counts) {
  for (auto& row : counts->values()) {
    for (double& v : row) {
      if (v < 0.0) {
        if (v < -1e-9) {
          std::cerr << "warning: clamping negative count " << v << " to 0\n";
        }
        v = 0.0;
      }
    }
  }
}

// Exact aggregated counts through the compensation transform (Fig. 4
// pipeline): real-semiring shortest distance over the compensated product,
// then per-arc sums bucketed by the target-side read state.
AggCountTable CountViaCompensation(const ProductAutomaton& product,
                                   const Automaton& target) {
  CompensatedMachine comp = CompensatePhi(product);
  Graph g = comp.ToGraph();
  QueueDiscipline queue = IsAcyclicGraph(g) ? QueueDiscipline::Topological()
                                            : QueueDiscipline::Fifo();
  DistanceResult gamma = ShortestDistance(g, queue, Semiring::kReal);

  std::vector<std::vector<long double>> acc(
      static_cast<std::size_t>(target.NumStates()));
  for (StateId q = 0; q < target.NumStates(); ++q) {
    acc[static_cast<std::size_t>(q)].assign(target.Arcs(q).size(), 0.0L);
  }
  for (StateId p = 0; p < comp.num_states; ++p) {
    const double gp = gamma.distance[static_cast<std::size_t>(p)];
    if (gp == 0.0) continue;
    for (const CompensatedArc& arc : comp.arcs[static_cast<std::size_t>(p)]) {
      if (arc.label == kEpsilonLabel) continue;
      acc[static_cast<std::size_t>(arc.read_state)]
         [ArcIndex(target, arc.read_state, arc.label)] +=
          static_cast<long double>(gp) * arc.weight;
    }
  }
  AggCountTable counts(target);
  for (StateId q = 0; q < target.NumStates(); ++q) {
    for (std::size_t k = 0; k < acc[static_cast<std::size_t>(q)].size(); ++k) {
      counts.At(q, k) = static_cast<double>(acc[static_cast<std::size_t>(q)][k]);
    }
  }
  return counts;
}

// Equivalent route without negative weights: anchor masses over the
// phi-extended expansion of the product (positive real semiring, so the
// fifo queue converges on sub-stochastic cycles), then per extended arc
// sums bucketed by the read state.
AggCountTable CountViaExpansion(const ProductAutomaton& product,
                                const Automaton& target) {
  const Automaton& m = product.machine;
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

  std::vector<std::vector<long double>> acc(
      static_cast<std::size_t>(target.NumStates()));
  for (StateId q = 0; q < target.NumStates(); ++q) {
    acc[static_cast<std::size_t>(q)].assign(target.Arcs(q).size(), 0.0L);
  }
  for (StateId p = 0; p < m.NumStates(); ++p) {
    const double gp = gamma.distance[static_cast<std::size_t>(p)];
    if (gp == 0.0) continue;
    for (const PhiExtendedArc& e : ext[static_cast<std::size_t>(p)]) {
      // The read state of the arc owning the resolution.
      const StateId read =
          product.read_state[static_cast<std::size_t>(e.resolved_at)]
                            [ArcIndex(m, e.resolved_at, e.label)];
      acc[static_cast<std::size_t>(read)][ArcIndex(target, read, e.label)] +=
          static_cast<long double>(gp) * e.weight;
    }
  }
  AggCountTable counts(target);
  for (StateId q = 0; q < target.NumStates(); ++q) {
    for (std::size_t k = 0; k < acc[static_cast<std::size_t>(q)].size(); ++k) {
      counts.At(q, k) = static_cast<double>(acc[static_cast<std::size_t>(q)][k]);
    }
  }
  return counts;
}

}  // namespace

CountTable CountWfa(const Automaton& source, const Automaton& target) {
  if (source.HasPhi() || target.HasPhi()) {
    throw Error("count: plain counting requires phi-free machines");
  }
  ProductAutomaton product = IntersectWfa(source, StripWeights(target));
  RequireCoverage(product);
  CountTable counts = CountViaExpansion(product, target);
  ClampNegatives(&counts);
  return counts;
}

AggCountTable CountPhi(const Automaton& source, const Automaton& target) {
  ProductAutomaton product = IntersectPhi(source, StripWeights(target));
  RequireCoverage(product);
  AggCountTable counts;
  if (product.machine.HasPhi() &&
      !IsAcyclicGraph(GraphFromAutomaton(product.machine))) {
    counts = CountViaExpansion(product, target);
  } else {
    counts = CountViaCompensation(product, target);
  }
  ClampNegatives(&counts);
  PhiCountFromFlow(target, &counts);
  return counts;
}

void PhiCountFromFlow(const Automaton& target, AggCountTable* counts,
                      double source_mass) {
  const SymbolId phi = target.PhiLabel();
  const StateId n = target.NumStates();

  // Static sigma inflow per state, and phi depth for the processing order.
  std::vector<long double> inflow(static_cast<std::size_t>(n), 0.0L);
  inflow[static_cast<std::size_t>(target.Initial())] += source_mass;
  for (StateId q = 0; q < n; ++q) {
    auto arcs = target.Arcs(q);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (arcs[k].label == phi) continue;
      inflow[static_cast<std::size_t>(arcs[k].dst)] += counts->At(q, k);
    }
  }
  std::vector<int> depth(static_cast<std::size_t>(n), -1);
  auto phi_depth = [&](StateId q, auto&& self) -> int {
    if (depth[static_cast<std::size_t>(q)] >= 0) return depth[static_cast<std::size_t>(q)];
    const Transition* p = target.PhiArc(q);
    int d = p == nullptr ? 0 : 1 + self(p->dst, self);
    depth[static_cast<std::size_t>(q)] = d;
    return d;
  };
  std::vector<StateId> with_phi;
  for (StateId q = 0; q < n; ++q) {
    if (target.PhiArc(q) != nullptr) {
      phi_depth(q, phi_depth);
      with_phi.push_back(q);
    }
  }
  std::sort(with_phi.begin(), with_phi.end(), [&](StateId x, StateId y) {
    return depth[static_cast<std::size_t>(x)] > depth[static_cast<std::size_t>(y)];
  });

  for (StateId q : with_phi) {
    auto arcs = target.Arcs(q);
    long double outflow = 0.0L;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (arcs[k].label != phi) outflow += counts->At(q, k);
    }
    long double phi_count = inflow[static_cast<std::size_t>(q)] - outflow;
    if (phi_count < -1e-6) {
      throw Error(StrCat("phi count from flow: negative C(phi,", q, ") = ",
                         static_cast<double>(phi_count),
                         "; counts are inconsistent"));
    }
    if (phi_count < 0.0L) phi_count = 0.0L;
    counts->At(q, ArcIndex(target, q, phi)) = static_cast<double>(phi_count);
    inflow[static_cast<std::size_t>(target.PhiArc(q)->dst)] += phi_count;
  }
}

SampledCounts CountSampled(const SequenceModel& model, const Automaton& target,
                           std::int64_t n, std::uint64_t seed, int max_len) {
  if (n <= 0) throw Error("sampled counting: sample count must be positive");
  if (target.HasPhi()) {
    BackoffReport report = CheckBackoffComplete(target);
    if (!report.ok()) {
      throw Error(StrCat("sampled counting: target is not backoff-complete: ",
                         report.violations.front().Describe(target.Symbols())));
    }
  }
  const SymbolId terminator = model.Symbols().terminator_id();

  std::vector<std::vector<long double>> acc(
      static_cast<std::size_t>(target.NumStates()));
  for (StateId q = 0; q < target.NumStates(); ++q) {
    acc[static_cast<std::size_t>(q)].assign(target.Arcs(q).size(), 0.0L);
  }
  SampledCounts out;
  out.requested = n;
  long double lost = 0.0L;

  std::vector<Distribution> dists;
  for (std::int64_t j = 0; j < n; ++j) {
    CounterRng rng = CounterRng::ForSample(seed, static_cast<std::uint64_t>(j));
    dists.clear();
    std::vector<SymbolId> sample;
    SequenceModel::State h = model.Start();
    bool truncated = false;
    while (true) {
      dists.push_back(model.NextDistribution(h));
      const Distribution& dist = dists.back();
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
      sample.push_back(picked);
      if (picked == terminator) break;
      if (static_cast<int>(sample.size()) >= max_len) {
        truncated = true;
        break;
      }
      h = model.Advance(h, picked);
    }
    if (truncated) {
      ++out.truncated;
      continue;
    }
    // Accept only samples inside L(target).
    StateId qa = target.Initial();
    bool rejected = false;
    for (SymbolId x : sample) {
      auto res = target.ResolveLabel(qa, x);
      if (!res) {
        rejected = true;
        break;
      }
      qa = res->dst;
    }
    if (rejected || qa != target.Final()) {
      ++out.rejected;
      continue;
    }
    ++out.accepted;
    qa = target.Initial();
    for (std::size_t i = 0; i < sample.size(); ++i) {
      for (const auto& [x, p] : dists[i]) {
        if (p <= 0.0) continue;
        auto res = target.ResolveLabel(qa, x);
        if (!res) {
          lost += p;
          continue;
        }
        acc[static_cast<std::size_t>(res->resolved_at)]
           [ArcIndex(target, res->resolved_at, x)] += p;
      }
      qa = target.ResolveLabel(qa, sample[i])->dst;
    }
  }

  out.counts = AggCountTable(target);
  const long double scale = 1.0L / static_cast<long double>(n);
  for (StateId q = 0; q < target.NumStates(); ++q) {
    for (std::size_t k = 0; k < acc[static_cast<std::size_t>(q)].size(); ++k) {
      out.counts.At(q, k) =
          static_cast<double>(acc[static_cast<std::size_t>(q)][k] * scale);
    }
  }
  out.lost_mass = static_cast<double>(lost * scale);
  ClampNegatives(&out.counts);
  if (target.HasPhi()) {
    const double source_mass =
        static_cast<double>(out.accepted) / static_cast<double>(n);
    PhiCountFromFlow(target, &out.counts, source_mass);
  }
  return out;
}

Automaton CountsToAutomaton(const Automaton& target, const ArcCounts& counts) {
  return ReplaceWeights(target, counts.values());
}

ArcCounts CountsFromAutomaton(const Automaton& counts_automaton) {
  ArcCounts counts(counts_automaton);
  for (StateId q = 0; q < counts_automaton.NumStates(); ++q) {
    auto arcs = counts_automaton.Arcs(q);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      counts.At(q, k) = arcs[k].weight;
    }
  }
  return counts;
}

}  // namespace sfst
