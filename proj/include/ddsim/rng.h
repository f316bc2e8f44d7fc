// Copyright 2026 The ddsim Authors
//
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

#pragma once

#include <cstdint>
#include <random>

namespace ddsim {

/// SplitMix64 finalizer. Used to derive statistically independent seeds from
/// a (master seed, stream index) pair.
constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded generator with a platform-independent output stream.
///
/// Only raw 64-bit words of std::mt19937_64 are consumed (the engine itself is
/// fully specified by the standard); the std distributions are avoided because
/// their output is implementation-defined.
class Rng {
   public:
    explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {
    }

    /// Generator for stream `stream` of `master_seed`. Depends only on the pair,
    /// so per-run generators are independent of scheduling.
    static Rng derive(uint64_t master_seed, uint64_t stream) {
        return Rng(splitmix64(master_seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    }

    uint64_t next_u64() {
        return engine_();
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi].
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

   private:
    std::mt19937_64 engine_;
};

}  // namespace ddsim
