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

#include <sfst/text-io.h>

#include <charconv>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

std::string FormatWeight(double w) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), w,
                           std::chars_format::general, 17);
  SFST_CHECK(res.ec == std::errc(), "weight formatting failed");
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> SplitTokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ls(line);
  std::string tok;
  while (ls >> tok) tokens.push_back(tok);
  return tokens;
}

long long ParseInt(const std::string& tok, int lineno, const char* what) {
  long long value = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error(StrCat("automaton: bad ", what, " '", tok, "' at line ", lineno));
  }
  return value;
}

double ParseWeight(const std::string& tok, int lineno) {
  double value = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error(StrCat("automaton: bad weight '", tok, "' at line ", lineno));
  }
  return value;
}

}  // namespace

Automaton ParseAutomaton(std::istream& in,
                         std::shared_ptr<const SymbolTable> symbols) {
  struct RawArc {
    StateId src, dst;
    SymbolId label;
    double weight;
  };
  std::vector<RawArc> raw;
  std::unordered_map<long long, StateId> compact;
  auto intern = [&](long long user_id) {
    return compact.emplace(user_id, static_cast<StateId>(compact.size()))
        .first->second;
  };

  std::optional<StateId> final;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tokens = SplitTokens(line);
    if (tokens.empty()) continue;
    if (tokens.size() == 1) {
      if (final.has_value()) {
        throw Error(StrCat("automaton: multiple final states at line ", lineno));
      }
      final = intern(ParseInt(tokens[0], lineno, "state"));
      continue;
    }
    if (tokens.size() < 3 || tokens.size() > 4) {
      throw Error(StrCat("automaton: expected 'src dst label [weight]' at line ",
                         lineno));
    }
    RawArc arc;
    arc.src = intern(ParseInt(tokens[0], lineno, "state"));
    arc.dst = intern(ParseInt(tokens[1], lineno, "state"));
    arc.label = static_cast<SymbolId>(ParseInt(tokens[2], lineno, "label"));
    arc.weight = tokens.size() == 4 ? ParseWeight(tokens[3], lineno) : 1.0;
    raw.push_back(arc);
  }
  if (raw.empty()) throw Error("automaton: no transitions");
  if (!final.has_value()) throw Error("automaton: no final state line");

  std::vector<std::vector<Transition>> arcs(compact.size());
  for (const RawArc& r : raw) {
    arcs[static_cast<std::size_t>(r.src)].push_back({r.label, r.weight, r.dst});
  }
  return Automaton(std::move(symbols), std::move(arcs), raw[0].src, *final);
}

Automaton ParseAutomaton(const std::string& text,
                         std::shared_ptr<const SymbolTable> symbols) {
  std::istringstream in(text);
  return ParseAutomaton(in, std::move(symbols));
}

void SerializeAutomaton(const Automaton& a, std::ostream& out) {
  const StateId n = a.NumStates();
  std::vector<StateId> order(static_cast<std::size_t>(n), kNoState);
  StateId next = 0;
  std::deque<StateId> queue;
  order[static_cast<std::size_t>(a.Initial())] = next++;
  queue.push_back(a.Initial());
  std::vector<StateId> bfs;
  while (!queue.empty()) {
    StateId q = queue.front();
    queue.pop_front();
    bfs.push_back(q);
    for (const Transition& t : a.Arcs(q)) {
      if (order[static_cast<std::size_t>(t.dst)] == kNoState) {
        order[static_cast<std::size_t>(t.dst)] = next++;
        queue.push_back(t.dst);
      }
    }
  }
  // States unreachable from the initial state follow in original order.
  for (StateId q = 0; q < n; ++q) {
    if (order[static_cast<std::size_t>(q)] == kNoState) {
      order[static_cast<std::size_t>(q)] = next++;
      bfs.push_back(q);
    }
  }
  for (StateId q : bfs) {
    for (const Transition& t : a.Arcs(q)) {
      out << order[static_cast<std::size_t>(q)] << ' '
          << order[static_cast<std::size_t>(t.dst)] << ' ' << t.label << ' '
          << FormatWeight(t.weight) << '\n';
    }
  }
  out << order[static_cast<std::size_t>(a.Final())] << '\n';
}

std::string SerializeAutomaton(const Automaton& a) {
  std::ostringstream os;
  SerializeAutomaton(a, os);
  return os.str();
}

std::shared_ptr<const SymbolTable> SynthesizeTableForText(
    const std::string& text, SymbolId phi_id) {
  auto table = std::make_shared<SymbolTable>(phi_id);
  table->AddSymbol("<phi>", phi_id);
  SymbolId terminator = phi_id == 1 ? 2 : 1;
  table->AddSymbol(SymbolTable::kTerminatorSymbol, terminator);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = SplitTokens(line);
    if (tokens.size() < 3) continue;
    long long label = 0;
    auto res = std::from_chars(tokens[2].data(),
                               tokens[2].data() + tokens[2].size(), label);
    if (res.ec != std::errc()) continue;
    SymbolId id = static_cast<SymbolId>(label);
    if (id != phi_id && !table->HasId(id)) {
      table->AddSymbol(StrCat("sym", id), id);
    }
  }
  return table;
}

Corpus LoadCorpus(std::istream& in, const SymbolTable& symbols,
                  const std::optional<std::string>& unk_symbol) {
  std::optional<SymbolId> unk_id;
  if (unk_symbol.has_value()) {
    unk_id = symbols.Find(*unk_symbol);
    if (!unk_id) {
      throw Error(StrCat("corpus: unk symbol '", *unk_symbol,
                         "' not in symbol table"));
    }
  }
  const SymbolId terminator = symbols.terminator_id();
  Corpus corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<SymbolId> sentence;
    for (const std::string& tok : SplitTokens(line)) {
      auto id = symbols.Find(tok);
      if (id && *id == symbols.phi_id()) {
        throw Error(StrCat("corpus: phi symbol inside sentence at line ", lineno));
      }
      if (id && *id == terminator) {
        throw Error(StrCat("corpus: terminator is implicit, found '", tok,
                           "' at line ", lineno));
      }
      if (!id) {
        if (!unk_id) {
          throw Error(StrCat("corpus: unknown symbol '", tok, "' at line ",
                             lineno));
        }
        ++corpus.oov_count;
        id = unk_id;
      }
      sentence.push_back(*id);
    }
    corpus.sentences.push_back(std::move(sentence));
  }
  return corpus;
}

}  // namespace sfst
