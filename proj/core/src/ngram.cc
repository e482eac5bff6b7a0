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

#include <sfst/ngram.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <sfst/kl-minimization.h>
#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

namespace {

constexpr const char* kBosSymbol = "<s>";

using Gram = std::vector<SymbolId>;

Gram Suffix(const Gram& g) { return Gram(g.begin() + 1, g.end()); }

}  // namespace

NgramCounts CountNgrams(const Corpus& corpus, int order,
                        const SymbolTable& symbols) {
  if (order < 1) throw Error("ngram count: order must be at least 1");
  if (corpus.sentences.empty()) throw Error("ngram count: empty corpus");
  const SymbolId terminator = symbols.terminator_id();
  NgramCounts counts;
  counts.order = order;
  for (const auto& sentence : corpus.sentences) {
    Gram padded;
    padded.reserve(sentence.size() + 2);
    if (order > 1) padded.push_back(kBosMarker);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    padded.push_back(terminator);
    const int n = static_cast<int>(padded.size());
    for (int j = 1; j <= order; ++j) {
      for (int i = 0; i + j <= n; ++i) {
        counts.grams[Gram(padded.begin() + i, padded.begin() + i + j)] += 1;
      }
    }
  }
  return counts;
}

void WriteNgramCounts(const NgramCounts& counts, const SymbolTable& symbols,
                      std::ostream& out) {
  std::vector<const std::pair<const Gram, std::int64_t>*> rows;
  rows.reserve(counts.grams.size());
  for (const auto& entry : counts.grams) rows.push_back(&entry);
  std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    if (a->first.size() != b->first.size()) {
      return a->first.size() < b->first.size();
    }
    return a->first < b->first;
  });
  for (const auto* row : rows) {
    for (SymbolId x : row->first) {
      if (x == kBosMarker) {
        out << kBosSymbol << ' ';
      } else {
        const std::string* name = symbols.Find(x);
        SFST_CHECK(name != nullptr, "gram symbol missing from table");
        out << *name << ' ';
      }
    }
    out << row->second << '\n';
  }
}

std::pair<NgramCounts, std::shared_ptr<const SymbolTable>> ReadNgramCounts(
    std::istream& in, SymbolId phi_id) {
  struct Row {
    std::vector<std::string> gram;
    std::int64_t count;
  };
  std::vector<Row> rows;
  std::set<std::string> vocab;
  std::string line;
  int lineno = 0;
  int order = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() < 2) {
      throw Error(StrCat("ngram counts: expected 'symbols... count' at line ",
                         lineno));
    }
    Row row;
    try {
      row.count = std::stoll(tokens.back());
    } catch (const std::exception&) {
      throw Error(StrCat("ngram counts: bad count at line ", lineno));
    }
    tokens.pop_back();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i] == kBosSymbol) {
        if (i != 0) {
          throw Error(StrCat("ngram counts: '<s>' not in front position at line ",
                             lineno));
        }
      } else if (tokens[i] != SymbolTable::kTerminatorSymbol) {
        vocab.insert(tokens[i]);
      }
    }
    row.gram = std::move(tokens);
    order = std::max(order, static_cast<int>(row.gram.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error("ngram counts: empty file");

  auto table = std::make_shared<SymbolTable>(phi_id);
  table->AddSymbol("<phi>", phi_id);
  table->AddSymbol(SymbolTable::kTerminatorSymbol);
  for (const std::string& w : vocab) table->AddSymbol(w);

  NgramCounts counts;
  counts.order = order;
  for (const Row& row : rows) {
    Gram gram;
    for (const std::string& w : row.gram) {
      gram.push_back(w == kBosSymbol ? kBosMarker : *table->Find(w));
    }
    counts.grams[gram] += row.count;
  }
  return {std::move(counts), std::move(table)};
}

namespace {

// Shared k-gram skeleton: history states, their arcs and failure targets.
struct KgramSkeleton {
  std::map<Gram, StateId> state_of;
  std::vector<Gram> history;    // per state
  StateId initial = 0;
  StateId final = 0;
  StateId unigram = 0;
  // Arcs as (label -> (dst, gram count)); terminator arcs point to final.
  std::vector<std::map<SymbolId, std::pair<StateId, std::int64_t>>> arcs;
  std::vector<StateId> phi_target;  // kNoState at the unigram state
};

KgramSkeleton BuildSkeleton(const NgramCounts& counts,
                            const SymbolTable& symbols) {
  const SymbolId terminator = symbols.terminator_id();
  const int max_hist = counts.order - 1;

  KgramSkeleton sk;
  auto intern = [&](const Gram& h) {
    auto [it, inserted] = sk.state_of.emplace(
        h, static_cast<StateId>(sk.history.size()));
    if (inserted) sk.history.push_back(h);
    return it->second;
  };
  sk.unigram = intern({});
  for (const auto& [gram, count] : counts.grams) {
    if (static_cast<int>(gram.size()) > max_hist) continue;
    if (gram.back() == terminator) continue;  // nothing follows the end
    intern(gram);
  }
  const StateId num_history = static_cast<StateId>(sk.history.size());
  sk.final = num_history;
  sk.initial = counts.order > 1 ? sk.state_of.at({kBosMarker}) : sk.unigram;

  sk.arcs.resize(static_cast<std::size_t>(num_history));
  sk.phi_target.assign(static_cast<std::size_t>(num_history), kNoState);
  for (StateId q = 0; q < num_history; ++q) {
    const Gram& h = sk.history[static_cast<std::size_t>(q)];
    if (!h.empty()) {
      sk.phi_target[static_cast<std::size_t>(q)] = sk.state_of.at(Suffix(h));
    }
  }

  // Continuations observed in each context.
  for (const auto& [gram, count] : counts.grams) {
    if (gram.size() < 2 && counts.order > 1) {
      // Unigram continuations of the empty context are handled below so the
      // unigram state covers the full vocabulary.
      continue;
    }
    Gram h(gram.begin(), gram.end() - 1);
    const SymbolId x = gram.back();
    if (!h.empty() && h.back() == terminator) continue;
    if (x == kBosMarker) continue;
    auto it = sk.state_of.find(h);
    if (it == sk.state_of.end()) continue;  // longer than max history
    const StateId q = it->second;
    StateId dst;
    if (x == terminator) {
      dst = sk.final;
    } else {
      Gram next = h;
      next.push_back(x);
      while (static_cast<int>(next.size()) > max_hist ||
             sk.state_of.find(next) == sk.state_of.end()) {
        SFST_CHECK(!next.empty(), "kgram: no destination state");
        next = Suffix(next);
      }
      dst = sk.state_of.at(next);
    }
    sk.arcs[static_cast<std::size_t>(q)][x] = {dst, count};
  }

  // The unigram state reads everything: seen symbols with their counts,
  // unseen vocabulary with count 0 (keeping the language equal to
  // Sigma*-terminated strings).
  for (SymbolId x : symbols.Alphabet()) {
    auto& row = sk.arcs[static_cast<std::size_t>(sk.unigram)];
    if (row.count(x)) continue;
    std::int64_t count = 0;
    auto it = counts.grams.find(Gram{x});
    if (it != counts.grams.end()) count = it->second;
    StateId dst;
    if (x == terminator) {
      dst = sk.final;
    } else {
      auto state_it = sk.state_of.find(Gram{x});
      dst = state_it == sk.state_of.end() ? sk.unigram : state_it->second;
    }
    row[x] = {dst, count};
  }
  return sk;
}

// Drops failure arcs that can never be followed: every label readable at
// the target is already readable at the source, so each deeper read is
// shadowed. Processed targets-first so cascades settle in one pass.
void DropDeadPhiArcs(const KgramSkeleton& sk, std::vector<StateId>* phi_target) {
  const StateId n = static_cast<StateId>(sk.arcs.size());
  std::vector<int> depth(static_cast<std::size_t>(n), -1);
  auto phi_depth = [&](StateId q, auto&& self) -> int {
    if (depth[static_cast<std::size_t>(q)] >= 0) return depth[static_cast<std::size_t>(q)];
    StateId t = (*phi_target)[static_cast<std::size_t>(q)];
    int d = t == kNoState ? 0 : 1 + self(t, self);
    depth[static_cast<std::size_t>(q)] = d;
    return d;
  };
  std::vector<StateId> order;
  for (StateId q = 0; q < n; ++q) {
    phi_depth(q, phi_depth);
    order.push_back(q);
  }
  std::sort(order.begin(), order.end(), [&](StateId a, StateId b) {
    return depth[static_cast<std::size_t>(a)] < depth[static_cast<std::size_t>(b)];
  });
  for (StateId q : order) {
    StateId t = (*phi_target)[static_cast<std::size_t>(q)];
    if (t == kNoState) continue;
    if ((*phi_target)[static_cast<std::size_t>(t)] != kNoState) continue;
    if (sk.arcs[static_cast<std::size_t>(q)].size() ==
        sk.arcs[static_cast<std::size_t>(t)].size()) {
      bool equal = true;
      for (const auto& [x, _] : sk.arcs[static_cast<std::size_t>(q)]) {
        if (!sk.arcs[static_cast<std::size_t>(t)].count(x)) {
          equal = false;
          break;
        }
      }
      if (equal) (*phi_target)[static_cast<std::size_t>(q)] = kNoState;
    }
  }
}

}  // namespace

Automaton BuildKgramTopology(const NgramCounts& counts,
                             std::shared_ptr<const SymbolTable> symbols) {
  KgramSkeleton sk = BuildSkeleton(counts, *symbols);
  std::vector<StateId> phi_target = sk.phi_target;
  DropDeadPhiArcs(sk, &phi_target);

  const SymbolId phi = symbols->phi_id();
  std::vector<std::vector<Transition>> arcs(sk.arcs.size() + 1);
  for (StateId q = 0; q < static_cast<StateId>(sk.arcs.size()); ++q) {
    for (const auto& [x, dst_count] : sk.arcs[static_cast<std::size_t>(q)]) {
      arcs[static_cast<std::size_t>(q)].push_back({x, 1.0, dst_count.first});
    }
    if (phi_target[static_cast<std::size_t>(q)] != kNoState) {
      arcs[static_cast<std::size_t>(q)].push_back(
          {phi, 1.0, phi_target[static_cast<std::size_t>(q)]});
    }
  }
  Automaton topo(std::move(symbols), std::move(arcs), sk.initial, sk.final);
  BackoffReport report = CheckBackoffComplete(topo);
  SFST_CHECK(report.ok(), "kgram topology not backoff-complete: ",
             report.ok() ? "" : report.violations.front().Describe(topo.Symbols()));
  return Trim(topo);
}

namespace {

// Good-Turing discount ratios d_r for r = 1..cutoff of one gram order.
// Invalid ratios (degenerate count-of-count statistics) fall back to 1.
std::vector<double> GoodTuringDiscounts(
    const std::map<std::int64_t, std::int64_t>& count_of_counts, int cutoff,
    bool* degenerate) {
  std::vector<double> d(static_cast<std::size_t>(cutoff) + 1, 1.0);
  auto n_of = [&](std::int64_t r) -> double {
    auto it = count_of_counts.find(r);
    return it == count_of_counts.end() ? 0.0
                                       : static_cast<double>(it->second);
  };
  const double n1 = n_of(1);
  const double nk1 = n_of(cutoff + 1);
  if (n1 <= 0.0) {
    *degenerate = true;
    return d;
  }
  const double big_ratio =
      static_cast<double>(cutoff + 1) * nk1 / n1;  // (k+1) n_{k+1} / n_1
  if (big_ratio >= 1.0) {
    *degenerate = true;
    return d;
  }
  bool any = false;
  for (int r = 1; r <= cutoff; ++r) {
    const double nr = n_of(r);
    const double nr1 = n_of(r + 1);
    if (nr <= 0.0) continue;
    const double r_star = static_cast<double>(r + 1) * nr1 / nr;
    const double dr =
        (r_star / static_cast<double>(r) - big_ratio) / (1.0 - big_ratio);
    if (dr > 0.0 && dr <= 1.0) {
      d[static_cast<std::size_t>(r)] = dr;
      any = true;
    }
  }
  if (!any) *degenerate = true;
  return d;
}

}  // namespace

Automaton KatzModel(const NgramCounts& counts,
                    std::shared_ptr<const SymbolTable> symbols,
                    const KatzConfig& config) {
  Automaton topo = BuildKgramTopology(counts, symbols);
  const SymbolId phi = topo.PhiLabel();

  // Recover each state's history gram by walking the topology from the
  // initial context; arcs extend histories deterministically.
  KgramSkeleton sk = BuildSkeleton(counts, *symbols);

  // Count-of-counts per order, over all grams.
  std::vector<std::map<std::int64_t, std::int64_t>> coc(
      static_cast<std::size_t>(counts.order) + 1);
  for (const auto& [gram, count] : counts.grams) {
    coc[gram.size()][count] += 1;
  }
  std::vector<std::vector<double>> discounts;
  discounts.push_back({});
  for (int j = 1; j <= counts.order; ++j) {
    bool degenerate = false;
    discounts.push_back(GoodTuringDiscounts(coc[static_cast<std::size_t>(j)],
                                            config.discount_cutoff,
                                            &degenerate));
    if (degenerate) {
      std::cerr << "warning: degenerate Good-Turing statistics for "
                << j << "-grams, using relative frequencies\n";
    }
  }

  // Map topology states back to skeleton histories via a parallel walk.
  std::vector<Gram> history(static_cast<std::size_t>(topo.NumStates()));
  std::vector<char> seen(static_cast<std::size_t>(topo.NumStates()), 0);
  std::vector<StateId> stack{topo.Initial()};
  history[static_cast<std::size_t>(topo.Initial())] =
      sk.history[static_cast<std::size_t>(sk.initial)];
  seen[static_cast<std::size_t>(topo.Initial())] = 1;
  std::vector<StateId> topo_of_sk(sk.history.size(), kNoState);
  topo_of_sk[static_cast<std::size_t>(sk.initial)] = topo.Initial();
  while (!stack.empty()) {
    StateId q = stack.back();
    stack.pop_back();
    const Gram& h = history[static_cast<std::size_t>(q)];
    const StateId sq = sk.state_of.at(h);
    topo_of_sk[static_cast<std::size_t>(sq)] = q;
    for (const Transition& t : topo.Arcs(q)) {
      if (t.dst == topo.Final() || seen[static_cast<std::size_t>(t.dst)]) continue;
      Gram next;
      if (t.label == phi) {
        next = Suffix(h);
      } else {
        next = sk.history[static_cast<std::size_t>(
            sk.arcs[static_cast<std::size_t>(sq)].at(t.label).first)];
      }
      history[static_cast<std::size_t>(t.dst)] = next;
      seen[static_cast<std::size_t>(t.dst)] = 1;
      stack.push_back(t.dst);
    }
  }

  // Per-state companion distributions from discounted relative frequencies.
  std::vector<std::vector<double>> y(static_cast<std::size_t>(topo.NumStates()));
  for (StateId q = 0; q < topo.NumStates(); ++q) {
    if (q == topo.Final()) continue;
    auto arcs = topo.Arcs(q);
    auto& row = y[static_cast<std::size_t>(q)];
    row.assign(arcs.size(), 0.0);
    const Gram& h = history[static_cast<std::size_t>(q)];
    const StateId sq = sk.state_of.at(h);
    const auto& sk_row = sk.arcs[static_cast<std::size_t>(sq)];
    const int gram_order = static_cast<int>(h.size()) + 1;
    const auto& d = discounts[static_cast<std::size_t>(gram_order)];

    long double context_total = 0.0L;
    for (const auto& [x, dst_count] : sk_row) context_total += dst_count.second;

    long double seen_mass = 0.0L;
    int unseen = 0;
    int phi_index = -1;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (arcs[k].label == phi) {
        phi_index = static_cast<int>(k);
        continue;
      }
      const std::int64_t count = sk_row.at(arcs[k].label).second;
      if (count <= 0) {
        ++unseen;
        continue;
      }
      double dr = 1.0;
      if (count <= config.discount_cutoff) {
        dr = d[static_cast<std::size_t>(count)];
      }
      row[k] = dr * static_cast<double>(count) /
               static_cast<double>(context_total);
      seen_mass += row[k];
    }
    double leftover = static_cast<double>(1.0L - seen_mass);
    if (leftover < 0.0) leftover = 0.0;
    if (phi_index >= 0) {
      // Unseen labels cannot occur at backoff states (arcs are observed
      // grams), so the leftover is exactly the backoff mass.
      row[static_cast<std::size_t>(phi_index)] = leftover;
    } else if (unseen > 0) {
      const double share = leftover / static_cast<double>(unseen);
      for (std::size_t k = 0; k < arcs.size(); ++k) {
        if (row[k] == 0.0 && sk_row.at(arcs[k].label).second <= 0) row[k] = share;
      }
    } else if (leftover > 0.0) {
      // Nothing to give the leftover to; renormalize the seen mass.
      for (double& v : row) v /= static_cast<double>(seen_mass);
    }
  }
  return AssignFailureWeights(y, topo);
}

Automaton ThresholdPruneTopology(const Automaton& topology,
                                 const ArcCounts& counts, double theta) {
  const SymbolId phi = topology.PhiLabel();
  const StateId n = topology.NumStates();

  // Backers of each state, and phi depths; sources are processed before
  // their backoff targets so removals can cascade downward.
  std::vector<std::vector<StateId>> backers(static_cast<std::size_t>(n));
  std::vector<int> depth(static_cast<std::size_t>(n), -1);
  auto phi_depth = [&](StateId q, auto&& self) -> int {
    if (depth[static_cast<std::size_t>(q)] >= 0) return depth[static_cast<std::size_t>(q)];
    const Transition* p = topology.PhiArc(q);
    int d = p == nullptr ? 0 : 1 + self(p->dst, self);
    depth[static_cast<std::size_t>(q)] = d;
    return d;
  };
  for (StateId q = 0; q < n; ++q) {
    phi_depth(q, phi_depth);
    if (const Transition* p = topology.PhiArc(q)) {
      backers[static_cast<std::size_t>(p->dst)].push_back(q);
    }
  }
  std::vector<StateId> order;
  for (StateId q = 0; q < n; ++q) order.push_back(q);
  std::sort(order.begin(), order.end(), [&](StateId a, StateId b) {
    return depth[static_cast<std::size_t>(a)] > depth[static_cast<std::size_t>(b)];
  });

  std::vector<std::vector<char>> removed(static_cast<std::size_t>(n));
  for (StateId q = 0; q < n; ++q) {
    removed[static_cast<std::size_t>(q)].assign(topology.Arcs(q).size(), 0);
  }
  auto arc_removed = [&](StateId q, SymbolId label) {
    auto arcs = topology.Arcs(q);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (arcs[k].label == label) return removed[static_cast<std::size_t>(q)][k] != 0;
    }
    return true;  // absent counts as removed
  };
  for (StateId q : order) {
    if (topology.PhiArc(q) == nullptr) continue;  // backstop states keep all
    auto arcs = topology.Arcs(q);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      if (arcs[k].label == phi) continue;
      if (counts.At(q, k) >= theta) continue;
      bool blocked = false;
      for (StateId b : backers[static_cast<std::size_t>(q)]) {
        if (!arc_removed(b, arcs[k].label)) {
          blocked = true;
          break;
        }
      }
      if (!blocked) removed[static_cast<std::size_t>(q)][k] = 1;
    }
  }

  std::vector<std::vector<Transition>> arcs(static_cast<std::size_t>(n));
  for (StateId q = 0; q < n; ++q) {
    auto row = topology.Arcs(q);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!removed[static_cast<std::size_t>(q)][k]) {
        arcs[static_cast<std::size_t>(q)].push_back(
            {row[k].label, 1.0, row[k].dst});
      }
    }
  }
  Automaton pruned = Trim(Automaton(topology.SymbolsPtr(), std::move(arcs),
                                    topology.Initial(), topology.Final()));
  BackoffReport report = CheckBackoffComplete(pruned);
  if (!report.ok()) {
    throw InternalError(StrCat("pruning broke backoff-completeness: ",
                               report.violations.front().Describe(pruned.Symbols())));
  }
  return pruned;
}

}  // namespace sfst
