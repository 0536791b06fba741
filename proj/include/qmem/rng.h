// Copyright 2026 The qmem Authors
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

#ifndef QMEM_RNG_H
#define QMEM_RNG_H

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace qmem {

/// Every random draw in the toolkit comes from one of these engines. The
/// engine algorithm is fixed by the C++ standard, and the distributions below
/// are implemented here (not with <random>'s distributions, whose outputs are
/// implementation defined), so a seed reproduces the same bits everywhere.
using Rng = std::mt19937_64;

/// Purpose tags for derived streams. Keeping purposes in separate streams
/// means that skipping one kind of draw never shifts another.
enum class Stream : uint64_t {
    SEQUENCE = 1,
    RECOVERY = 2,
    NOISE = 3,
    INJECTION = 4,
    MEASUREMENT = 5,
    BOOTSTRAP = 6,
};

/// SplitMix64 finalizer.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministically derives a child seed from a parent seed and a path of
/// counters, e.g. derive_seed(master, {m, sequence_index, shot}).
uint64_t derive_seed(uint64_t parent, std::initializer_list<uint64_t> path);

/// Engine seeded from a 64-bit seed through std::seed_seq.
Rng make_rng(uint64_t seed);

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng &rng, double p) {
    return p > 0 && uniform01(rng) < p;
}

/// Uniform integer in [0, n).
uint64_t uniform_index(Rng &rng, uint64_t n);

/// Fills `out` with independent standard normal deviates.
void fill_standard_normal(Rng &rng, std::span<double> out);

double standard_normal(Rng &rng);

}  // namespace qmem

#endif
