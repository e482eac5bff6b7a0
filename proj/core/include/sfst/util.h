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
// Error types and small string helpers shared across the library.

#ifndef SFST_UTIL_H_
#define SFST_UTIL_H_

#include <sstream>
#include <stdexcept>
#include <string>

namespace sfst {

// Data error: malformed input, violated precondition, failed convergence.
// The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A broken internal invariant; indicates a bug rather than bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

namespace internal {

template <typename... Args>
std::string StrCat(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

}  // namespace internal
}  // namespace sfst

#define SFST_CHECK(cond, ...)                                      \
  do {                                                             \
    if (!(cond)) {                                                 \
      throw ::sfst::InternalError(::sfst::internal::StrCat(        \
          "internal check failed (", #cond, "): ", __VA_ARGS__));  \
    }                                                              \
  } while (0)

#endif  // SFST_UTIL_H_
