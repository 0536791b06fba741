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

#include "qmem/rng.h"

#include <cmath>

namespace qmem {

uint64_t derive_seed(uint64_t parent, std::initializer_list<uint64_t> path) {
    uint64_t h = mix64(parent ^ 0x6A09E667F3BCC909ULL);
    for (uint64_t p : path) {
        h = mix64(h ^ mix64(p + 0x3C6EF372FE94F82BULL));
    }
    return h;
}

Rng make_rng(uint64_t seed) {
    std::seed_seq seq{
        static_cast<uint32_t>(seed),
        static_cast<uint32_t>(seed >> 32),
    };
    return Rng(seq);
}

uint64_t uniform_index(Rng &rng, uint64_t n) {
    // Rejection sampling keeps the result exactly uniform.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    while (true) {
        uint64_t r = rng();
        if (r < limit) {
            return r % n;
        }
    }
}

void fill_standard_normal(Rng &rng, std::span<double> out) {
    // Marsaglia polar method.
    size_t n = out.size();
    size_t k = 0;
    while (k < n) {
        double u, v, s;
        do {
            u = 2.0 * uniform01(rng) - 1.0;
            v = 2.0 * uniform01(rng) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        out[k++] = u * f;
        if (k < n) {
            out[k++] = v * f;
        }
    }
}

double standard_normal(Rng &rng) {
    double v;
    fill_standard_normal(rng, std::span<double>(&v, 1));
    return v;
}

}  // namespace qmem
