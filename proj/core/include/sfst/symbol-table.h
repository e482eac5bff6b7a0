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
// Bidirectional symbol <-> id map. Id 0 is reserved for the failure label
// phi by default; the terminator symbol is the literal "$".

#ifndef SFST_SYMBOL_TABLE_H_
#define SFST_SYMBOL_TABLE_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sfst {

using SymbolId = std::int32_t;

class SymbolTable {
 public:
  static constexpr const char* kTerminatorSymbol = "$";

  explicit SymbolTable(SymbolId phi_id = 0) : phi_id_(phi_id) {}

  // Adds a symbol with the next free id (never the phi id). Re-adding an
  // existing symbol returns its id.
  SymbolId AddSymbol(const std::string& symbol);
  SymbolId AddSymbol(const std::string& symbol, SymbolId id);

  std::optional<SymbolId> Find(std::string_view symbol) const;
  // Returns nullptr for unknown ids.
  const std::string* Find(SymbolId id) const;
  bool HasId(SymbolId id) const { return id_to_symbol_.count(id) > 0; }

  SymbolId phi_id() const { return phi_id_; }
  bool HasTerminator() const { return Find(kTerminatorSymbol).has_value(); }
  // The id of "$"; throws if absent.
  SymbolId terminator_id() const;

  std::size_t NumSymbols() const { return id_to_symbol_.size(); }
  // Id-ordered (symbol, id) view for serialization and iteration.
  const std::map<SymbolId, std::string>& Entries() const {
    return id_to_symbol_;
  }
  // All ids except phi, ascending. The alphabet Sigma, terminator included.
  std::vector<SymbolId> Alphabet() const;

  bool operator==(const SymbolTable& other) const;

  // File format: one "symbol id" pair per line.
  static SymbolTable Read(std::istream& in, SymbolId phi_id = 0);
  void Write(std::ostream& out) const;

  // Builds a table with "<phi>" at phi_id, "$" next, then the given symbols
  // in order. Convenience for tests and synthesized tables.
  static std::shared_ptr<const SymbolTable> Make(
      const std::vector<std::string>& symbols, SymbolId phi_id = 0);

 private:
  SymbolId phi_id_;
  std::map<SymbolId, std::string> id_to_symbol_;
  std::unordered_map<std::string, SymbolId> symbol_to_id_;
};

}  // namespace sfst

#endif  // SFST_SYMBOL_TABLE_H_
