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
// Text formats. Automata are one record per line:
//   arc:   src dst label weight     (weight omitted means 1.0)
//   final: state                    (exactly one line, marks f)
// The source state of the first arc line is the initial state. Serialization
// is canonical: states in BFS order from the initial state, arcs sorted by
// label id, weights printed with 17 significant digits.
//
// Corpus files hold one sentence per line, whitespace-separated symbols; the
// terminator is implicit and must not appear in the text.

#ifndef SFST_TEXT_IO_H_
#define SFST_TEXT_IO_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <sfst/automaton.h>
#include <sfst/symbol-table.h>

namespace sfst {

Automaton ParseAutomaton(std::istream& in,
                         std::shared_ptr<const SymbolTable> symbols);
Automaton ParseAutomaton(const std::string& text,
                         std::shared_ptr<const SymbolTable> symbols);

void SerializeAutomaton(const Automaton& a, std::ostream& out);
std::string SerializeAutomaton(const Automaton& a);

// Scans an automaton file for the label ids it uses and builds a table
// covering them, with "$" at id 1 and "<phi>" at the phi id. Used by the
// CLI when no symbol table file is supplied.
std::shared_ptr<const SymbolTable> SynthesizeTableForText(
    const std::string& text, SymbolId phi_id);

struct Corpus {
  // Sentences as symbol ids, without the terminator.
  std::vector<std::vector<SymbolId>> sentences;
  std::int64_t oov_count = 0;
};

// Unknown symbols are an error unless `unk_symbol` names a table entry to
// map them to.
Corpus LoadCorpus(std::istream& in, const SymbolTable& symbols,
                  const std::optional<std::string>& unk_symbol = std::nullopt);

// Locale-independent shortest-17-digit float formatting used everywhere a
// weight is printed.
std::string FormatWeight(double w);

}  // namespace sfst

#endif  // SFST_TEXT_IO_H_
