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

#include <sfst/shortest-distance.h>

#include <cmath>
#include <deque>

#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

namespace {

// Kahn topological order; empty result when the graph is cyclic.
std::vector<StateId> TopologicalOrder(const Graph& g) {
  std::vector<int> indegree(static_cast<std::size_t>(g.num_states), 0);
  for (const auto& arcs : g.arcs) {
    for (const GraphArc& a : arcs) ++indegree[static_cast<std::size_t>(a.dst)];
  }
  std::deque<StateId> ready;
  for (StateId q = 0; q < g.num_states; ++q) {
    if (indegree[static_cast<std::size_t>(q)] == 0) ready.push_back(q);
  }
  std::vector<StateId> order;
  order.reserve(static_cast<std::size_t>(g.num_states));
  while (!ready.empty()) {
    StateId q = ready.front();
    ready.pop_front();
    order.push_back(q);
    for (const GraphArc& a : g.arcs[static_cast<std::size_t>(q)]) {
      if (--indegree[static_cast<std::size_t>(a.dst)] == 0) ready.push_back(a.dst);
    }
  }
  if (order.size() != static_cast<std::size_t>(g.num_states)) order.clear();
  return order;
}

DistanceResult TopologicalDistance(const Graph& g) {
  auto order = TopologicalOrder(g);
  if (order.empty() && g.num_states > 0) {
    throw Error("shortest distance: topological queue on a cyclic graph");
  }
  std::vector<long double> d(static_cast<std::size_t>(g.num_states), 0.0L);
  d[static_cast<std::size_t>(g.initial)] = 1.0L;  // the empty path
  for (StateId q : order) {
    const long double dq = d[static_cast<std::size_t>(q)];
    if (dq == 0.0L) continue;
    for (const GraphArc& a : g.arcs[static_cast<std::size_t>(q)]) {
      d[static_cast<std::size_t>(a.dst)] += dq * a.weight;
    }
  }
  DistanceResult result;
  result.distance.assign(d.begin(), d.end());
  return result;
}

DistanceResult FifoDistance(const Graph& g, const QueueDiscipline& queue) {
  const std::size_t n = static_cast<std::size_t>(g.num_states);
  std::vector<long double> d(n, 0.0L);
  std::vector<long double> r(n, 0.0L);
  std::vector<char> queued(n, 0);
  std::deque<StateId> fifo;
  d[static_cast<std::size_t>(g.initial)] = 1.0L;
  r[static_cast<std::size_t>(g.initial)] = 1.0L;
  fifo.push_back(g.initial);
  queued[static_cast<std::size_t>(g.initial)] = 1;

  const long long pop_budget =
      static_cast<long long>(queue.max_sweeps) * std::max<StateId>(g.num_states, 1);
  long long pops = 0;
  while (!fifo.empty()) {
    if (++pops > pop_budget) {
      long double residual = 0.0L;
      for (long double rq : r) residual = std::max(residual, std::fabs((double)rq) + 0.0L);
      throw Error(StrCat("shortest distance: no convergence after ",
                         queue.max_sweeps, " sweeps (residual ",
                         static_cast<double>(residual), ")"));
    }
    StateId q = fifo.front();
    fifo.pop_front();
    queued[static_cast<std::size_t>(q)] = 0;
    const long double rq = r[static_cast<std::size_t>(q)];
    r[static_cast<std::size_t>(q)] = 0.0L;
    for (const GraphArc& a : g.arcs[static_cast<std::size_t>(q)]) {
      const long double delta = rq * a.weight;
      if (std::fabs(static_cast<double>(delta)) <= queue.convergence_delta) continue;
      d[static_cast<std::size_t>(a.dst)] += delta;
      r[static_cast<std::size_t>(a.dst)] += delta;
      if (!queued[static_cast<std::size_t>(a.dst)]) {
        queued[static_cast<std::size_t>(a.dst)] = 1;
        fifo.push_back(a.dst);
      }
    }
  }
  DistanceResult result;
  result.distance.assign(d.begin(), d.end());
  result.sweeps = static_cast<int>(pops / std::max<StateId>(g.num_states, 1)) + 1;
  double residual = 0.0;
  for (long double rq : r) residual = std::max(residual, std::fabs(static_cast<double>(rq)));
  result.max_residual = residual;
  return result;
}

}  // namespace

DistanceResult ShortestDistance(const Graph& g, const QueueDiscipline& queue,
                                Semiring semiring) {
  if (g.initial < 0 || g.initial >= g.num_states) {
    throw Error("shortest distance: initial state out of range");
  }
  if (semiring == Semiring::kPositiveReal) {
    for (const auto& arcs : g.arcs) {
      for (const GraphArc& a : arcs) {
        if (a.weight < 0.0) {
          throw Error("shortest distance: negative weight under the positive real semiring");
        }
      }
    }
  }
  DistanceResult result = queue.kind == QueueDiscipline::kTopological
                              ? TopologicalDistance(g)
                              : FifoDistance(g, queue);
  result.semiring = semiring;
  return result;
}

bool IsAcyclicGraph(const Graph& g) {
  return !TopologicalOrder(g).empty() || g.num_states == 0;
}

Graph GraphFromAutomaton(const Automaton& a) {
  Graph g;
  g.num_states = a.NumStates();
  g.initial = a.Initial();
  g.arcs.resize(static_cast<std::size_t>(a.NumStates()));
  for (StateId q = 0; q < a.NumStates(); ++q) {
    for (const Transition& t : a.Arcs(q)) {
      g.arcs[static_cast<std::size_t>(q)].push_back({t.weight, t.dst});
    }
  }
  return g;
}

}  // namespace sfst
