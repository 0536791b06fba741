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

#ifndef QMEM_CLIFFORD_H
#define QMEM_CLIFFORD_H

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qmem/sim_core.h"

namespace qmem {

enum class GateSet : uint8_t {
    FOUR_GENERATOR = 0,    // {+X, -X, +Y, -Y} pi/2 rotations.
    TWO_GENERATOR_BB1 = 1, // {+X, +Y} pi/2 rotations, each BB1 protected.
};

std::string_view gate_set_name(GateSet g);
GateSet parse_gate_set(std::string_view name);

/// A pi/2 generator. Words are strings over "XYxy" (lower case = negative
/// axis) read in time order: "XY" applies X_{pi/2} first.
Pulse generator_pulse(char g, double duration = 0.0, double amplitude_scale = 1.0);
Mat2 word_unitary(std::string_view word);

enum class BasisState : uint8_t {
    DOWN = 0,
    UP = 1,
};

struct CliffordElement {
    uint8_t index;
    Mat2 unitary;
    std::string word_4gen;
    std::string word_2gen;

    const std::string &word(GateSet g) const {
        return g == GateSet::FOUR_GENERATOR ? word_4gen : word_2gen;
    }
};

/// The 24-element single-qubit Clifford group modulo phase. Built once and
/// immutable afterwards.
class CliffordGroup {
   public:
    static constexpr size_t SIZE = 24;
    static constexpr uint8_t IDENTITY = 0;

    static const CliffordGroup &instance();

    const CliffordElement &operator[](size_t k) const {
        return elements_[k];
    }
    const std::array<CliffordElement, SIZE> &elements() const {
        return elements_;
    }

    /// Element equal to b * a (a applied first).
    uint8_t compose(uint8_t a, uint8_t b) const {
        return table_[a][b];
    }
    uint8_t inverse(uint8_t a) const {
        return inverse_[a];
    }

    /// Index of the element matching `u` up to global phase. Throws
    /// std::invalid_argument when `u` is not a Clifford.
    uint8_t find(const Mat2 &u, double tol = 1e-9) const;

    /// The 4 elements G with G * net |up> = |target> up to phase, in index order.
    const std::array<uint8_t, 4> &recovery_candidates(uint8_t net, BasisState target) const {
        return recovery_[net][static_cast<size_t>(target)];
    }

    double mean_word_length(GateSet g) const;

    /// Deterministic JSON document describing elements, words, and the table.
    std::string to_json() const;

   private:
    CliffordGroup();

    std::array<CliffordElement, SIZE> elements_;
    std::array<std::array<uint8_t, SIZE>, SIZE> table_;
    std::array<uint8_t, SIZE> inverse_;
    std::array<std::array<std::array<uint8_t, 4>, 2>, SIZE> recovery_;
};

/// Returns the 24 elements in index order.
std::vector<CliffordElement> enumerate_group();

/// Element whose unitary equals b * a (a applied first).
const CliffordElement &compose(const CliffordElement &a, const CliffordElement &b);
const CliffordElement &inverse(const CliffordElement &a);

/// Uniformly chooses one of the four Cliffords that map net|up> onto |target>.
const CliffordElement &recovery_gate(const CliffordElement &net, BasisState target, Rng &rng);

/// Wimperis BB1: [p, pi_(phi+phi1), 2pi_(phi+3 phi1), pi_(phi+phi1)] with
/// phi1 = arccos(-theta/(4 pi)) measured from p's own axis. Only pi/2 pulses
/// are accepted. Durations scale with rotation angle.
std::vector<Pulse> bb1_expand(const Pulse &p);

/// Physical pulse program for a Clifford in the given gate set.
std::vector<Pulse> clifford_pulses(
    uint8_t element, GateSet g, double pi2_duration = 0.0, double amplitude_scale = 1.0);

/// Shortest-word length of each element by breadth-first search over the
/// generators of `g` (indexed like CliffordGroup).
std::array<int, CliffordGroup::SIZE> minimal_word_lengths(GateSet g);

}  // namespace qmem

#endif
