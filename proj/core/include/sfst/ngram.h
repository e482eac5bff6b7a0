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
// k-gram backoff topologies and Katz-smoothed models from corpora, plus
// count-threshold pruning of backoff-complete topologies.

#ifndef SFST_NGRAM_H_
#define SFST_NGRAM_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include <sfst/automaton.h>
#include <sfst/counting.h>
#include <sfst/text-io.h>

namespace sfst {

// Sentence-start marker inside history grams; never a real symbol id.
constexpr SymbolId kBosMarker = -1;

// Counts of every j-gram window, 1 <= j <= order, over sentences padded as
// <s> x1 ... xn $. Grams are symbol-id sequences; kBosMarker appears only
// in front position.
struct NgramCounts {
  int order = 0;
  std::map<std::vector<SymbolId>, std::int64_t> grams;
};

NgramCounts CountNgrams(const Corpus& corpus, int order,
                        const SymbolTable& symbols);

// Text format: one gram per line, symbols then the count, sorted by
// (length, symbols). "<s>" renders the start marker.
void WriteNgramCounts(const NgramCounts& counts, const SymbolTable& symbols,
                      std::ostream& out);
// Rebuilds the counts and a deterministic symbol table ("$" = 1, vocabulary
// sorted lexicographically from id 2).
std::pair<NgramCounts, std::shared_ptr<const SymbolTable>> ReadNgramCounts(
    std::istream& in, SymbolId phi_id = 0);

// The unweighted backoff-complete k-gram topology: states are the observed
// histories up to length order-1 plus the start and unigram contexts, each
// history failing to its suffix. The unigram state reads the whole
// vocabulary, so every terminated string is accepted through backoff.
// Failure arcs that could never be followed (their source already reads
// everything their target does) are dropped to keep strict containment.
Automaton BuildKgramTopology(const NgramCounts& counts,
                             std::shared_ptr<const SymbolTable> symbols);

struct KatzConfig {
  // Grams with counts above the cutoff are not discounted.
  int discount_cutoff = 5;
};

// Good-Turing-discounted Katz model on the k-gram topology. Falls back to
// plain relative frequencies (with a warning) for orders whose
// count-of-count statistics are degenerate.
Automaton KatzModel(const NgramCounts& counts,
                    std::shared_ptr<const SymbolTable> symbols,
                    const KatzConfig& config = {});

// Removes sigma arcs with C(x,q) < theta wherever removal preserves
// backoff-completeness; arcs at states without a failure arc (the backstop
// contexts) are never removed. The result is trimmed.
Automaton ThresholdPruneTopology(const Automaton& topology,
                                 const ArcCounts& counts, double theta);

}  // namespace sfst

#endif  // SFST_NGRAM_H_
