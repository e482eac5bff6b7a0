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

#include <sfst/random.h>

namespace sfst {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng CounterRng::ForSample(std::uint64_t seed, std::uint64_t sample_index) {
  return CounterRng(SplitMix64(SplitMix64(seed) ^ sample_index));
}

std::uint64_t CounterRng::NextUint64() {
  return SplitMix64(key_ + counter_++ * kGolden);
}

double CounterRng::NextUnit() {
  return static_cast<double>(NextUint64() >> 11) * 0x1.0p-53;
}

}  // namespace sfst
