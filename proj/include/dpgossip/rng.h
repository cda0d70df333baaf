//
// Copyright 2026 The dpgossip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPGOSSIP_RNG_H_
#define DPGOSSIP_RNG_H_

#include <cstdint>
#include <random>

namespace dpgossip {

// Tags distinguishing the independent random streams used in a run.
enum class StreamPurpose : uint64_t {
  kBatch = 0x62617463,
  kNoise = 0x6e6f6973,
  kInit = 0x696e6974,
  kPartition = 0x70617274,
  kData = 0x64617461,
  kOracle = 0x6f72636c,
};

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the stream identified by (master_seed, node, t, purpose). Every
// stochastic draw in a run goes through a stream derived here, so results do
// not depend on the order in which nodes are evaluated.
inline uint64_t DeriveSeed(uint64_t master_seed, uint64_t node, uint64_t t,
                           StreamPurpose purpose) {
  uint64_t h = SplitMix64(master_seed);
  h = SplitMix64(h ^ node);
  h = SplitMix64(h ^ t);
  h = SplitMix64(h ^ static_cast<uint64_t>(purpose));
  return h;
}

inline std::mt19937_64 DeriveStream(uint64_t master_seed, uint64_t node,
                                    uint64_t t, StreamPurpose purpose) {
  return std::mt19937_64(DeriveSeed(master_seed, node, t, purpose));
}

}  // namespace dpgossip

#endif  // DPGOSSIP_RNG_H_
