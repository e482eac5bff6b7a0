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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <sfst/shortest-distance.h>
#include <sfst/util.h>

#include "testing/random-automata.h"

using namespace sfst;
using sfst::testing::MakeAlphabet;
using sfst::testing::RandomAcyclicPhiTopology;
using sfst::testing::RandomStochasticWeights;
using sfst::testing::TestRng;

TEST_CASE("chain distances are path products") {
  Graph g{3, 0, {{{0.5, 1}}, {{0.5, 2}}, {}}};
  auto fifo = ShortestDistance(g, QueueDiscipline::Fifo(), Semiring::kPositiveReal);
  CHECK(fifo.distance[0] == doctest::Approx(1.0));
  CHECK(fifo.distance[1] == doctest::Approx(0.5));
  CHECK(fifo.distance[2] == doctest::Approx(0.25));
  auto topo = ShortestDistance(g, QueueDiscipline::Topological(),
                               Semiring::kPositiveReal);
  CHECK(topo.distance[2] == 0.25);
}

TEST_CASE("self loop sums the geometric series") {
  Graph g{2, 0, {{{0.5, 0}, {0.5, 1}}, {}}};
  auto d = ShortestDistance(g, QueueDiscipline::Fifo(), Semiring::kPositiveReal);
  CHECK(d.distance[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(d.distance[1] == doctest::Approx(1.0).epsilon(1e-10));

  // Brute-force truncation of the series.
  double total = 0.0, term = 1.0;
  for (int n = 0; n <= 60; ++n) {
    total += term;
    term *= 0.5;
  }
  CHECK(d.distance[0] == doctest::Approx(total).epsilon(1e-10));
}

TEST_CASE("parallel positive and negative paths cancel") {
  Graph g{3, 0, {{{0.25, 1}, {-0.25, 1}, {1.0, 2}}, {}, {}}};
  auto d = ShortestDistance(g, QueueDiscipline::Fifo(), Semiring::kReal);
  CHECK(d.distance[1] == doctest::Approx(0.0));
  CHECK_THROWS_AS(
      ShortestDistance(g, QueueDiscipline::Fifo(), Semiring::kPositiveReal),
      Error);
}

TEST_CASE("topological queue rejects cyclic graphs") {
  Graph g{2, 0, {{{0.5, 0}, {0.5, 1}}, {}}};
  CHECK_THROWS_WITH_AS(
      ShortestDistance(g, QueueDiscipline::Topological(), Semiring::kPositiveReal),
      doctest::Contains("cyclic"), Error);
}

TEST_CASE("fifo reports non-convergence with the residual") {
  // A weight-1 cycle never drains.
  Graph g{2, 0, {{{1.0, 0}, {0.5, 1}}, {}}};
  CHECK_THROWS_WITH_AS(
      ShortestDistance(g, QueueDiscipline::Fifo(1e-12, 50), Semiring::kPositiveReal),
      doctest::Contains("residual"), Error);
}

TEST_CASE("topological and fifo agree on random dags") {
  TestRng rng(11);
  for (int i = 0; i < 20; ++i) {
    Automaton s = RandomStochasticWeights(
        rng, RandomAcyclicPhiTopology(rng, 12, MakeAlphabet(3)));
    Graph g = GraphFromAutomaton(s);
    auto topo = ShortestDistance(g, QueueDiscipline::Topological(),
                                 Semiring::kPositiveReal);
    auto fifo = ShortestDistance(g, QueueDiscipline::Fifo(),
                                 Semiring::kPositiveReal);
    for (std::size_t q = 0; q < topo.distance.size(); ++q) {
      CHECK(std::fabs(topo.distance[q] - fifo.distance[q]) < 1e-12);
    }
  }
}

TEST_CASE("distances are linear in the weights of single-entry states") {
  Graph g{3, 0, {{{0.3, 1}}, {{0.4, 2}}, {}}};
  auto base = ShortestDistance(g, QueueDiscipline::Topological(),
                               Semiring::kPositiveReal);
  Graph scaled = g;
  scaled.arcs[1][0].weight *= 2.5;
  auto twice = ShortestDistance(scaled, QueueDiscipline::Topological(),
                                Semiring::kPositiveReal);
  CHECK(twice.distance[2] == doctest::Approx(2.5 * base.distance[2]));
}
