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

#include <sfst/counting.h>
#include <sfst/kl-minimization.h>
#include <sfst/sequence-model.h>
#include <sfst/text-io.h>
#include <sfst/util.h>

#include "testing/oracles.h"
#include "testing/random-automata.h"

using namespace sfst;
using sfst::testing::MakeAlphabet;
using sfst::testing::OracleCounts;
using sfst::testing::RandomAcyclicPhiTopology;
using sfst::testing::RandomStochasticWeights;
using sfst::testing::RandomSubDfa;
using sfst::testing::TestRng;

namespace {

Automaton GeometricSource(const std::shared_ptr<const SymbolTable>& table) {
  // a with probability 0.5, stop with probability 0.5.
  return ParseAutomaton("0 0 2 0.5\n0 1 1 0.5\n1\n", table);
}

void CheckCountsMatch(const Automaton& target, const ArcCounts& got,
                      const ArcCounts& want, double tol) {
  for (StateId q = 0; q < target.NumStates(); ++q) {
    for (std::size_t k = 0; k < target.Arcs(q).size(); ++k) {
      CHECK(std::fabs(got.At(q, k) - want.At(q, k)) <= tol);
    }
  }
}

}  // namespace

TEST_CASE("geometric source counted against itself") {
  auto table = MakeAlphabet(1);
  Automaton s = GeometricSource(table);
  CountTable counts = CountWfa(s, StripWeights(s));
  CHECK(counts.Get(s, 0, *table->Find("a")) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(counts.Get(s, 0, table->terminator_id()) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("a certain terminator gives a single count") {
  auto table = MakeAlphabet(1);
  Automaton s = ParseAutomaton("0 1 1 1\n1\n", table);
  Automaton a = ParseAutomaton("0 2 2 1\n0 1 1 1\n2 1 1 1\n1\n", table);
  CountTable counts = CountWfa(s, a);
  CHECK(counts.Get(a, 0, table->terminator_id()) == doctest::Approx(1.0));
  CHECK(counts.Get(a, 0, *table->Find("a")) == doctest::Approx(0.0));
}

TEST_CASE("plain counts match enumeration on random acyclic pairs") {
  TestRng rng(101);
  for (int i = 0; i < 20; ++i) {
    auto table = MakeAlphabet(3);
    Automaton a = RandomAcyclicPhiTopology(rng, 6, table, false);
    Automaton s = RandomStochasticWeights(rng, RandomSubDfa(rng, a));
    CountTable counts = CountWfa(s, a);
    CheckCountsMatch(a, counts, OracleCounts(s, a), 1e-9);
    // Initial-state counts carry at least the unit source mass.
    CHECK(counts.Total(a.Initial()) >= 1.0 - 1e-9);
  }
}

TEST_CASE("phi counts match enumeration, compensation and expansion agree") {
  TestRng rng(303);
  for (int i = 0; i < 25; ++i) {
    auto table = MakeAlphabet(3);
    Automaton a = RandomAcyclicPhiTopology(rng, 8, table);
    Automaton s = a.HasPhi() && rng.Chance(0.5)
                      ? RandomStochasticWeights(rng, a)
                      : RandomStochasticWeights(rng, RandomSubDfa(rng, ExpandPhi(a)));
    AggCountTable counts = CountPhi(s, a);
    CheckCountsMatch(a, counts, OracleCounts(s, a), 1e-9);
  }
}

TEST_CASE("phi-free targets reduce to plain counting") {
  TestRng rng(404);
  for (int i = 0; i < 10; ++i) {
    auto table = MakeAlphabet(3);
    Automaton a = RandomAcyclicPhiTopology(rng, 7, table, false);
    Automaton s = RandomStochasticWeights(rng, RandomSubDfa(rng, a));
    CountTable plain = CountWfa(s, a);
    AggCountTable agg = CountPhi(s, a);
    CheckCountsMatch(a, agg, plain, 1e-12);
  }
}

TEST_CASE("hand-built backoff chain: phi counts are expected backoff mass") {
  auto table = MakeAlphabet(2);
  // Target: q0 reads a, fails to q1; q1 reads a,b,$; source emits a, b, $
  // from one state.
  Automaton a = ParseAutomaton(
      "0 2 2 1\n0 1 0 1\n1 2 2 1\n1 2 3 1\n1 3 1 1\n2 3 1 1\n3\n", table);
  Automaton s = ParseAutomaton(
      "0 1 2 0.5\n0 2 3 0.3\n0 3 1 0.2\n1 3 1 1\n2 3 1 1\n3\n", table);
  AggCountTable counts = CountPhi(s, a);
  // b and $ are unreadable at q0, so the phi arc carries their mass.
  CHECK(counts.Get(a, 0, a.PhiLabel()) == doctest::Approx(0.5).epsilon(1e-9));
  CheckCountsMatch(a, counts, OracleCounts(s, a), 1e-9);
}

TEST_CASE("flow conservation holds at every state") {
  TestRng rng(505);
  for (int i = 0; i < 10; ++i) {
    auto table = MakeAlphabet(3);
    Automaton a = RandomAcyclicPhiTopology(rng, 8, table);
    Automaton s = RandomStochasticWeights(rng, a);
    AggCountTable counts = CountPhi(s, a);
    const SymbolId phi = a.PhiLabel();
    std::vector<double> inflow(a.NumStates(), 0.0);
    inflow[a.Initial()] += 1.0;
    for (StateId q = 0; q < a.NumStates(); ++q) {
      auto arcs = a.Arcs(q);
      for (std::size_t k = 0; k < arcs.size(); ++k) {
        inflow[arcs[k].dst] += counts.At(q, k);
      }
    }
    for (StateId q = 0; q < a.NumStates(); ++q) {
      if (q == a.Final()) {
        CHECK(inflow[q] == doctest::Approx(1.0).epsilon(1e-9));
        continue;
      }
      double outflow = 0.0;
      for (std::size_t k = 0; k < a.Arcs(q).size(); ++k) {
        outflow += counts.At(q, k);
      }
      CHECK(std::fabs(inflow[q] - outflow) < 1e-9);
    }
    (void)phi;
  }
}

TEST_CASE("counting detects coverage violations") {
  auto table = MakeAlphabet(2);
  Automaton s = ParseAutomaton("0 2 3 1\n2 1 1 1\n1\n", table);  // b$
  Automaton a = ParseAutomaton("0 2 2 1\n0 1 1 1\n2 1 1 1\n1\n", table);
  CHECK_THROWS_WITH_AS(CountWfa(s, a), doctest::Contains("coverage"), Error);
}

TEST_CASE("cyclic phi products go through the expansion route") {
  auto table = MakeAlphabet(2);
  // A cyclic stochastic phi-WFA (bigram-like): contexts loop back. The
  // failure weight is 0.4 / (1 - 0.5) = 0.8 so the extended sums are 1.
  Automaton s = ParseAutomaton(
      "0 2 2 0.6\n0 1 0 0.8\n1 2 2 0.5\n1 3 3 0.3\n1 4 1 0.2\n"
      "2 2 2 0.3\n2 3 3 0.5\n2 4 1 0.2\n3 2 2 0.6\n3 3 3 0.1\n3 4 1 0.3\n4\n",
      table);
  REQUIRE(IsStochastic(s, 1e-9));
  AggCountTable counts = CountPhi(s, StripWeights(s));
  // Sampled cross-check: large-N estimates approach the exact counts.
  WfaBackedModel model(s);
  SampledCounts sampled = CountSampled(model, StripWeights(s), 200000, 99);
  CHECK(sampled.rejected == 0);
  for (StateId q = 0; q < s.NumStates(); ++q) {
    for (std::size_t k = 0; k < s.Arcs(q).size(); ++k) {
      if (counts.At(q, k) < 0.02) continue;
      CHECK(sampled.counts.At(q, k) ==
            doctest::Approx(counts.At(q, k)).epsilon(0.05));
    }
  }
}

TEST_CASE("sampled counting on a certain model") {
  auto table = MakeAlphabet(1);
  Automaton s = ParseAutomaton("0 1 1 1\n1\n", table);
  WfaBackedModel model(s);
  SampledCounts sampled = CountSampled(model, s, 1, 7);
  CHECK(sampled.accepted == 1);
  CHECK(sampled.counts.Get(s, 0, table->terminator_id()) == doctest::Approx(1.0));
}

TEST_CASE("sampled counting approaches exact counts from two seeds") {
  auto table = MakeAlphabet(1);
  Automaton s = GeometricSource(table);
  Automaton topo = StripWeights(s);
  CountTable exact = CountWfa(s, topo);
  WfaBackedModel model(s);
  for (std::uint64_t seed : {11ULL, 222ULL}) {
    SampledCounts sampled = CountSampled(model, topo, 100000, seed);
    CHECK(sampled.rejected == 0);
    for (std::size_t k = 0; k < s.Arcs(0).size(); ++k) {
      CHECK(sampled.counts.At(0, k) ==
            doctest::Approx(exact.At(0, k)).epsilon(0.05));
    }
  }
}

TEST_CASE("sampled counting reports rejections") {
  auto table = MakeAlphabet(1);
  Automaton s = GeometricSource(table);
  // Target accepts only $ and a$: longer samples get rejected.
  Automaton a = ParseAutomaton("0 2 2 1\n0 1 1 1\n2 1 1 1\n1\n", table);
  WfaBackedModel model(s);
  SampledCounts sampled = CountSampled(model, a, 2000, 5);
  CHECK(sampled.rejected > 0);
  CHECK(sampled.accepted + sampled.rejected + sampled.truncated == 2000);
  CHECK(sampled.lost_mass > 0.0);
  CHECK_THROWS_AS(CountSampled(model, a, 0, 5), Error);
}

TEST_CASE("sampled error shrinks roughly with the sample rate") {
  auto table = MakeAlphabet(2);
  TestRng rng(606);
  Automaton a = RandomAcyclicPhiTopology(rng, 8, table);
  while (a.NumArcs() < 10) a = RandomAcyclicPhiTopology(rng, 8, table);
  Automaton s = RandomStochasticWeights(rng, a);
  AggCountTable exact = CountPhi(s, StripWeights(s));
  WfaBackedModel model(s);

  // RMS relative error over entries and a handful of fixed seeds; single
  // streams are too correlated across prefix sample sets to decay cleanly.
  auto rms_error = [&](std::int64_t n) {
    double sum = 0.0;
    int terms = 0;
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u, 6u}) {
      SampledCounts sampled = CountSampled(model, StripWeights(s), n, seed);
      for (StateId q = 0; q < s.NumStates(); ++q) {
        for (std::size_t k = 0; k < s.Arcs(q).size(); ++k) {
          if (exact.At(q, k) < 0.01) continue;
          const double rel =
              (sampled.counts.At(q, k) - exact.At(q, k)) / exact.At(q, k);
          sum += rel * rel;
          ++terms;
        }
      }
    }
    return std::sqrt(sum / terms);
  };
  const double coarse = rms_error(2000);
  const double fine = rms_error(128000);
  CHECK(fine < 0.5 * coarse);  // 64x the samples must shrink the error
}

TEST_CASE("counts serialize as a weighted automaton over the topology") {
  TestRng rng(707);
  auto table = MakeAlphabet(2);
  Automaton a = RandomAcyclicPhiTopology(rng, 6, table);
  Automaton s = RandomStochasticWeights(rng, a);
  AggCountTable counts = CountPhi(s, StripWeights(s));
  Automaton counts_fst = CountsToAutomaton(StripWeights(s), counts);
  ArcCounts back = CountsFromAutomaton(counts_fst);
  CheckCountsMatch(a, back, counts, 0.0);
  // Round trip through text keeps the values bit-exact.
  Automaton reparsed = ParseAutomaton(SerializeAutomaton(counts_fst), table);
  CHECK(SerializeAutomaton(reparsed) == SerializeAutomaton(counts_fst));
}
