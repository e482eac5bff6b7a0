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
// Generalized single-source shortest distance over the sum-product algebra:
// d[q] is the sum over all paths from the initial state to q of the path
// weight products, the empty path contributing 1 at the initial state.
// Supports the positive real semiring (all weights >= 0) and the real
// semiring (mixed signs, as produced by negative compensation arcs).

#ifndef SFST_SHORTEST_DISTANCE_H_
#define SFST_SHORTEST_DISTANCE_H_

#include <vector>

#include <sfst/automaton.h>

namespace sfst {

enum class Semiring { kPositiveReal, kReal };

struct QueueDiscipline {
  enum Kind { kTopological, kFifo };
  Kind kind = kFifo;
  double convergence_delta = 1e-12;
  int max_sweeps = 10000;

  static QueueDiscipline Topological() { return {kTopological, 0.0, 0}; }
  static QueueDiscipline Fifo(double delta = 1e-12, int max_sweeps = 10000) {
    return {kFifo, delta, max_sweeps};
  }
};

struct GraphArc {
  double weight;
  StateId dst;
};

// Adjacency view consumed by the distance computation. Summation order is
// fixed (arc insertion order) for reproducibility.
struct Graph {
  StateId num_states = 0;
  StateId initial = 0;
  std::vector<std::vector<GraphArc>> arcs;
};

struct DistanceResult {
  std::vector<double> distance;
  Semiring semiring = Semiring::kPositiveReal;
  int sweeps = 0;          // fifo relaxation passes over the queue
  double max_residual = 0; // residual mass when fifo stops
};

// Throws on: topological discipline over a cyclic graph; negative weights
// under the positive real semiring; fifo non-convergence within max_sweeps
// (the message reports the residual).
DistanceResult ShortestDistance(const Graph& g, const QueueDiscipline& queue,
                                Semiring semiring);

bool IsAcyclicGraph(const Graph& g);

// All arcs, phi included, as plain weighted edges.
Graph GraphFromAutomaton(const Automaton& a);

}  // namespace sfst

#endif  // SFST_SHORTEST_DISTANCE_H_
