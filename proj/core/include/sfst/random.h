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
// Counter-mode SplitMix64: output i of a stream is mix(key + i * gamma).
// The algorithm is fixed so seeds reproduce bit-identical samples on every
// platform, and streams derived from (seed, index) are independent, which
// makes sharded sampling order-insensitive.

#ifndef SFST_RANDOM_H_
#define SFST_RANDOM_H_

#include <cstdint>

namespace sfst {

std::uint64_t SplitMix64(std::uint64_t x);

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // The stream for one sample of a seeded batch.
  static CounterRng ForSample(std::uint64_t seed, std::uint64_t sample_index);

  std::uint64_t NextUint64();
  // Uniform in [0, 1) with 53 random mantissa bits.
  double NextUnit();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sfst

#endif  // SFST_RANDOM_H_
