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

#include <sfst/symbol-table.h>

#include <istream>
#include <ostream>
#include <sstream>

#include <sfst/util.h>

namespace sfst {

using internal::StrCat;

SymbolId SymbolTable::AddSymbol(const std::string& symbol) {
  auto it = symbol_to_id_.find(symbol);
  if (it != symbol_to_id_.end()) return it->second;
  SymbolId id = 0;
  if (!id_to_symbol_.empty()) id = id_to_symbol_.rbegin()->first + 1;
  while (id == phi_id_ || HasId(id)) ++id;
  return AddSymbol(symbol, id);
}

SymbolId SymbolTable::AddSymbol(const std::string& symbol, SymbolId id) {
  if (id < 0) throw Error(StrCat("symbol table: negative id for '", symbol, "'"));
  auto it = symbol_to_id_.find(symbol);
  if (it != symbol_to_id_.end()) {
    if (it->second != id) {
      throw Error(StrCat("symbol table: '", symbol, "' already mapped to ",
                         it->second, ", cannot remap to ", id));
    }
    return id;
  }
  if (HasId(id)) {
    throw Error(StrCat("symbol table: id ", id, " already taken by '",
                       id_to_symbol_.at(id), "'"));
  }
  if (symbol == kTerminatorSymbol && id == phi_id_) {
    throw Error("symbol table: terminator cannot share the phi id");
  }
  id_to_symbol_.emplace(id, symbol);
  symbol_to_id_.emplace(symbol, id);
  return id;
}

std::optional<SymbolId> SymbolTable::Find(std::string_view symbol) const {
  auto it = symbol_to_id_.find(std::string(symbol));
  if (it == symbol_to_id_.end()) return std::nullopt;
  return it->second;
}

const std::string* SymbolTable::Find(SymbolId id) const {
  auto it = id_to_symbol_.find(id);
  if (it == id_to_symbol_.end()) return nullptr;
  return &it->second;
}

SymbolId SymbolTable::terminator_id() const {
  auto id = Find(kTerminatorSymbol);
  if (!id) throw Error("symbol table: no terminator symbol \"$\"");
  return *id;
}

std::vector<SymbolId> SymbolTable::Alphabet() const {
  std::vector<SymbolId> out;
  out.reserve(id_to_symbol_.size());
  for (const auto& [id, sym] : id_to_symbol_) {
    if (id != phi_id_) out.push_back(id);
  }
  return out;
}

bool SymbolTable::operator==(const SymbolTable& other) const {
  return phi_id_ == other.phi_id_ && id_to_symbol_ == other.id_to_symbol_;
}

SymbolTable SymbolTable::Read(std::istream& in, SymbolId phi_id) {
  SymbolTable table(phi_id);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string symbol;
    long long id;
    if (!(ls >> symbol)) continue;  // blank line
    if (!(ls >> id)) {
      throw Error(StrCat("symbol table: missing id at line ", lineno));
    }
    std::string extra;
    if (ls >> extra) {
      throw Error(StrCat("symbol table: trailing tokens at line ", lineno));
    }
    table.AddSymbol(symbol, static_cast<SymbolId>(id));
  }
  return table;
}

void SymbolTable::Write(std::ostream& out) const {
  for (const auto& [id, sym] : id_to_symbol_) {
    out << sym << ' ' << id << '\n';
  }
}

std::shared_ptr<const SymbolTable> SymbolTable::Make(
    const std::vector<std::string>& symbols, SymbolId phi_id) {
  auto table = std::make_shared<SymbolTable>(phi_id);
  table->AddSymbol("<phi>", phi_id);
  table->AddSymbol(kTerminatorSymbol);
  for (const auto& s : symbols) table->AddSymbol(s);
  return table;
}

}  // namespace sfst
