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

#include <sfst/kl-minimization.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

BackoffIndex::BackoffIndex(const Automaton& a) {
  contributors_.resize(static_cast<std::size_t>(a.NumStates()));
  const SymbolId phi = a.PhiLabel();
  for (StateId q0 = 0; q0 < a.NumStates(); ++q0) {
    auto arcs = a.Arcs(q0);
    const Transition* p = a.PhiArc(q0);
    if (p == nullptr) continue;
    Contributor c;
    c.state = q0;
    c.phi_arc_index = 0;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (arcs[k].label == phi) {
        c.phi_arc_index = k;
        continue;
      }
      auto target_arcs = a.Arcs(p->dst);
      bool found = false;
      for (std::size_t j = 0; j < target_arcs.size(); ++j) {
        if (target_arcs[j].label == arcs[k].label) {
          c.label_positions.push_back(static_cast<int>(j));
          found = true;
          break;
        }
      }
      if (!found) {
        throw Error(StrCat("backoff index: state ", q0,
                           " is not backoff-complete at label ",
                           arcs[k].label));
      }
    }
    contributors_[static_cast<std::size_t>(p->dst)].push_back(std::move(c));
  }
}

double DcObjective(const DcProblem& problem, const std::vector<double>& y) {
  long double obj = 0.0L;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (problem.counts[i] > 0.0) obj += problem.counts[i] * std::log(y[i]);
  }
  for (const auto& c : problem.contributors) {
    if (c.phi_count <= 0.0) continue;
    long double covered = 0.0L;
    for (int i : c.labels) covered += y[static_cast<std::size_t>(i)];
    obj -= c.phi_count * std::log(static_cast<double>(1.0L - covered));
  }
  return static_cast<double>(obj);
}

namespace {

// y(lambda) of the linearized subproblem and its sum.
double SumY(const DcProblem& problem, const std::vector<double>& f,
            double lambda, std::vector<double>* y) {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < problem.counts.size(); ++i) {
    double v = problem.epsilon;
    if (problem.counts[i] > 0.0) {
      const double denom = lambda - f[i];
      if (denom > 0.0) v = std::max(problem.counts[i] / denom, problem.epsilon);
      else v = std::numeric_limits<double>::infinity();
    }
    (*y)[i] = v;
    sum += v;
  }
  return static_cast<double>(sum);
}

}  // namespace

DcSolution SolveStateDc(const DcProblem& problem, double tol, int max_iters) {
  const std::size_t k = problem.counts.size();
  if (k == 0) throw Error("dc solve: no labels");
  for (double c : problem.counts) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw Error("dc solve: counts must be finite and non-negative");
    }
  }
  const double eps = problem.epsilon;
  if (eps <= 0.0 || eps * static_cast<double>(k) >= 1.0) {
    throw Error(StrCat("dc solve: epsilon ", eps, " too large for ", k,
                       " labels"));
  }
  for (const auto& c : problem.contributors) {
    for (int i : c.labels) {
      if (i < 0 || static_cast<std::size_t>(i) >= k) {
        throw Error("dc solve: contributor label out of range");
      }
    }
  }

  DcSolution solution;
  long double total = 0.0L;
  for (double c : problem.counts) total += c;
  const double count_total = static_cast<double>(total);

  if (count_total <= 0.0) {  // trivial case: any y is optimal
    solution.y.assign(k, 1.0 / static_cast<double>(k));
    solution.objective = DcObjective(problem, solution.y);
    return solution;
  }

  // Count-proportional initialization inside the constrained simplex.
  std::vector<double> y(k);
  const double shrink = 1.0 - eps * static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    y[i] = problem.counts[i] / count_total * shrink + eps;
  }

  double objective = DcObjective(problem, y);
  std::vector<double> f(k);
  std::vector<double> next(k);
  for (int iter = 0; iter < max_iters; ++iter) {
    // Linearization factors from the current estimate.
    std::fill(f.begin(), f.end(), 0.0);
    for (const auto& c : problem.contributors) {
      if (c.phi_count <= 0.0) continue;
      long double covered = 0.0L;
      for (int i : c.labels) covered += y[static_cast<std::size_t>(i)];
      const double denom = static_cast<double>(1.0L - covered);
      SFST_CHECK(denom > 0.0, "dc solve: covered mass reached 1 (state not backoff-complete?)");
      const double share = c.phi_count / denom;
      for (int i : c.labels) f[static_cast<std::size_t>(i)] += share;
    }

    double lb = -std::numeric_limits<double>::infinity();
    double max_f = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      lb = std::max(lb, f[i] + problem.counts[i]);
      max_f = std::max(max_f, f[i]);
    }
    double ub = max_f + count_total / shrink;

    double sum_lb = SumY(problem, f, lb, &next);
    if (sum_lb < 1.0 - 1e-12) {
      // The bound is pinned by a zero-count coordinate whose linear gain
      // ties with lambda; such coordinates are free at the optimum and
      // absorb the slack uniformly.
      std::vector<std::size_t> tied;
      for (std::size_t i = 0; i < k; ++i) {
        if (problem.counts[i] == 0.0 && f[i] >= lb - 1e-12 * std::fabs(lb)) {
          tied.push_back(i);
        }
      }
      SFST_CHECK(!tied.empty(), "dc solve: no coordinate to absorb slack");
      const double slack = (1.0 - sum_lb) / static_cast<double>(tied.size());
      for (std::size_t i : tied) next[i] += slack;
    } else {
      double lo = lb, hi = std::max(ub, lb);
      double sum = sum_lb;
      for (int step = 0; step < 200 && std::fabs(sum - 1.0) > 1e-12; ++step) {
        const double mid = 0.5 * (lo + hi);
        sum = SumY(problem, f, mid, &next);
        if (sum > 1.0) lo = mid;
        else hi = mid;
      }
    }

    const double next_objective = DcObjective(problem, next);
    if (next_objective < objective - 1e-9) {
      throw InternalError(StrCat("dc solve: objective decreased from ",
                                 objective, " to ", next_objective));
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      delta = std::max(delta, std::fabs(next[i] - y[i]));
    }
    y = next;
    objective = next_objective;
    solution.iterations = iter + 1;
    if (delta < tol) break;
  }

  solution.y = std::move(y);
  solution.objective = objective;
  return solution;
}

Automaton NormalizeClosedForm(const CountTable& counts, const Automaton& target) {
  if (target.HasPhi()) {
    throw Error("closed-form normalization requires a phi-free target");
  }
  std::vector<std::vector<double>> weights(
      static_cast<std::size_t>(target.NumStates()));
  for (StateId q = 0; q < target.NumStates(); ++q) {
    const std::size_t deg = target.Arcs(q).size();
    auto& row = weights[static_cast<std::size_t>(q)];
    row.assign(deg, 0.0);
    if (deg == 0) continue;
    const double total = counts.Total(q);
    for (std::size_t kk = 0; kk < deg; ++kk) {
      row[kk] = total > 0.0 ? counts.At(q, kk) / total
                            : 1.0 / static_cast<double>(deg);
    }
  }
  return ReplaceWeights(target, weights);
}

Automaton AssignFailureWeights(const std::vector<std::vector<double>>& y,
                               const Automaton& target) {
  const SymbolId phi = target.PhiLabel();
  if (target.HasPhi()) {
    BackoffReport report = CheckBackoffComplete(target);
    if (!report.ok()) {
      throw Error(StrCat("assign failure weights: not backoff-complete: ",
                         report.violations.front().Describe(target.Symbols())));
    }
  }
  std::vector<std::vector<double>> weights(
      static_cast<std::size_t>(target.NumStates()));
  for (StateId q = 0; q < target.NumStates(); ++q) {
    auto arcs = target.Arcs(q);
    auto& row = weights[static_cast<std::size_t>(q)];
    row.assign(arcs.size(), 0.0);
    const Transition* p = target.PhiArc(q);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (arcs[k].label == phi) {
        // alpha(q,q') = p_a(phi|q) / d(q,q').
        long double covered = 0.0L;
        for (std::size_t j = 0; j < arcs.size(); ++j) {
          if (arcs[j].label == phi) continue;
          const Transition* shadow = target.FindArc(p->dst, arcs[j].label);
          SFST_CHECK(shadow != nullptr, "assign: backoff-completeness broken");
          auto target_arcs = target.Arcs(p->dst);
          const std::size_t idx =
              static_cast<std::size_t>(shadow - target_arcs.data());
          covered += y[static_cast<std::size_t>(p->dst)][idx];
        }
        const double d = static_cast<double>(1.0L - covered);
        SFST_CHECK(d > 0.0, "assign: non-positive backoff denominator at state ", q);
        row[k] = y[static_cast<std::size_t>(q)][k] / d;
      } else {
        row[k] = y[static_cast<std::size_t>(q)][k];
      }
    }
  }
  return ReplaceWeights(target, weights);
}

Automaton KlMinNormalize(const Automaton& counts_automaton,
                         const ApproxConfig& config) {
  if (!counts_automaton.HasPhi()) {
    return NormalizeClosedForm(CountsFromAutomaton(counts_automaton),
                               counts_automaton);
  }
  const Automaton& a = counts_automaton;
  BackoffIndex index(a);
  const AggCountTable counts = CountsFromAutomaton(a);
  std::vector<std::vector<double>> y(static_cast<std::size_t>(a.NumStates()));
  for (StateId q = 0; q < a.NumStates(); ++q) {
    const std::size_t deg = a.Arcs(q).size();
    if (deg == 0) continue;
    DcProblem problem;
    problem.epsilon = config.epsilon;
    problem.counts.resize(deg);
    for (std::size_t k = 0; k < deg; ++k) problem.counts[k] = counts.At(q, k);
    for (const auto& c : index.At(q)) {
      problem.contributors.push_back(
          {counts.At(c.state, c.phi_arc_index), c.label_positions});
    }
    y[static_cast<std::size_t>(q)] =
        SolveStateDc(problem, config.tol, config.max_iters).y;
  }
  return AssignFailureWeights(y, a);
}

Automaton LocalNormalize(const Automaton& counts_automaton) {
  std::vector<std::vector<double>> weights(
      static_cast<std::size_t>(counts_automaton.NumStates()));
  for (StateId q = 0; q < counts_automaton.NumStates(); ++q) {
    auto arcs = counts_automaton.Arcs(q);
    auto& row = weights[static_cast<std::size_t>(q)];
    row.assign(arcs.size(), 0.0);
    long double total = 0.0L;
    for (const Transition& t : arcs) total += t.weight;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      row[k] = total > 0.0L ? static_cast<double>(arcs[k].weight / total)
                            : 1.0 / static_cast<double>(arcs.size());
    }
  }
  return ReplaceWeights(counts_automaton, weights);
}

namespace {

Automaton ApproximateFromCounts(const Automaton& topology,
                                const ArcCounts& counts,
                                const ApproxConfig& config) {
  return KlMinNormalize(CountsToAutomaton(topology, counts), config);
}

void RequireTopology(const Automaton& topology) {
  if (topology.HasPhi()) {
    BackoffReport report = CheckBackoffComplete(topology);
    if (!report.ok()) {
      throw Error(StrCat("approximate: topology is not backoff-complete: ",
                         report.violations.front().Describe(topology.Symbols())));
    }
  }
}

}  // namespace

Automaton Approximate(const Automaton& source, const Automaton& topology,
                      const ApproxConfig& config) {
  Automaton topo = StripWeights(topology);
  RequireTopology(topo);
  if (source.HasPhi() || topo.HasPhi()) {
    return ApproximateFromCounts(topo, CountPhi(source, topo), config);
  }
  return ApproximateFromCounts(topo, CountWfa(source, topo), config);
}

Automaton Approximate(const SequenceModel& source, const Automaton& topology,
                      const ApproxConfig& config) {
  Automaton topo = StripWeights(topology);
  RequireTopology(topo);
  SampledCounts sampled = CountSampled(source, topo, config.samples,
                                       config.seed, config.max_sample_len);
  return ApproximateFromCounts(topo, sampled.counts, config);
}

}  // namespace sfst
