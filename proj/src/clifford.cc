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

#include "qmem/clifford.h"

#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace qmem {

namespace {

constexpr double PI = std::numbers::pi;

// Coset representatives of the Clifford group modulo the Pauli group. The
// element with index 4*s + p has canonical unitary PAULI[p] * REP(s).
constexpr std::array<std::string_view, 6> REPS_4GEN{"", "X", "Y", "XY", "YX", "xYX"};
constexpr std::array<std::string_view, 6> REPS_2GEN{"", "X", "Y", "XY", "YX", "XYX"};
constexpr std::array<std::string_view, 4> PAULI_WORDS{"", "XX", "YY", "XXYY"};

// With only positive generators a product decomposition averages 84/24; this
// six-pulse word for Z_pi raises the two-generator average to 86/24.
constexpr std::string_view Z_PI_2GEN = "XXXYYX";

const std::array<Mat2, 4> &pauli_matrices() {
    static const std::array<Mat2, 4> m{Mat2::identity(), kPauliX, kPauliY, kPauliZ};
    return m;
}

}  // namespace

std::string_view gate_set_name(GateSet g) {
    return g == GateSet::FOUR_GENERATOR ? "four-generator" : "two-generator-bb1";
}

GateSet parse_gate_set(std::string_view name) {
    if (name == "four-generator" || name == "4gen") {
        return GateSet::FOUR_GENERATOR;
    }
    if (name == "two-generator-bb1" || name == "2gen-bb1" || name == "2gen") {
        return GateSet::TWO_GENERATOR_BB1;
    }
    throw std::invalid_argument("unknown gate set '" + std::string(name) + "'");
}

Pulse generator_pulse(char g, double duration, double amplitude_scale) {
    double phase;
    switch (g) {
        case 'X':
            phase = 0;
            break;
        case 'Y':
            phase = PI / 2;
            break;
        case 'x':
            phase = PI;
            break;
        case 'y':
            phase = 3 * PI / 2;
            break;
        default:
            throw std::invalid_argument(std::string("unknown generator '") + g + "'");
    }
    return Pulse{PI / 2, phase, duration, amplitude_scale};
}

Mat2 word_unitary(std::string_view word) {
    Mat2 u = Mat2::identity();
    for (char g : word) {
        u = generator_pulse(g).unitary() * u;
    }
    return u;
}

CliffordGroup::CliffordGroup() {
    const auto &paulis = pauli_matrices();
    for (size_t s = 0; s < REPS_4GEN.size(); s++) {
        Mat2 rep = word_unitary(REPS_4GEN[s]);
        for (size_t p = 0; p < 4; p++) {
            auto &e = elements_[4 * s + p];
            e.index = static_cast<uint8_t>(4 * s + p);
            e.unitary = paulis[p] * rep;
        }
    }
    for (size_t i = 0; i < SIZE; i++) {
        for (size_t j = 0; j < i; j++) {
            if (equal_up_to_phase(elements_[i].unitary, elements_[j].unitary)) {
                throw std::logic_error("Clifford representatives are not distinct");
            }
        }
    }

    auto assign = [&](const auto &reps, std::string CliffordElement::*field) {
        std::array<bool, SIZE> seen{};
        for (auto rep : reps) {
            for (auto pw : PAULI_WORDS) {
                std::string w = std::string(rep) + std::string(pw);
                uint8_t k = find(word_unitary(w));
                if (seen[k]) {
                    throw std::logic_error("decomposition table does not cover the group");
                }
                seen[k] = true;
                elements_[k].*field = w;
            }
        }
    };
    assign(REPS_4GEN, &CliffordElement::word_4gen);
    assign(REPS_2GEN, &CliffordElement::word_2gen);
    uint8_t z = find(kPauliZ);
    if (find(word_unitary(Z_PI_2GEN)) != z) {
        throw std::logic_error("Z_pi word does not implement Z");
    }
    elements_[z].word_2gen = std::string(Z_PI_2GEN);

    for (size_t a = 0; a < SIZE; a++) {
        for (size_t b = 0; b < SIZE; b++) {
            table_[a][b] = find(elements_[b].unitary * elements_[a].unitary);
            if (table_[a][b] == IDENTITY) {
                inverse_[a] = static_cast<uint8_t>(b);
            }
        }
    }

    for (size_t net = 0; net < SIZE; net++) {
        QubitState s = elements_[net].unitary * QubitState::up();
        std::array<size_t, 2> n{0, 0};
        for (size_t g = 0; g < SIZE; g++) {
            QubitState f = elements_[g].unitary * s;
            size_t t = f.prob_up() > 0.5 ? 1 : 0;
            if (std::abs(f.prob_up() - 0.5) < 0.49) {
                continue;
            }
            if (n[t] >= 4) {
                throw std::logic_error("too many recovery candidates");
            }
            recovery_[net][t][n[t]++] = static_cast<uint8_t>(g);
        }
        if (n[0] != 4 || n[1] != 4) {
            throw std::logic_error("expected 4 recovery candidates per target");
        }
    }
}

const CliffordGroup &CliffordGroup::instance() {
    static const CliffordGroup group;
    return group;
}

uint8_t CliffordGroup::find(const Mat2 &u, double tol) const {
    for (size_t k = 0; k < SIZE; k++) {
        if (equal_up_to_phase(elements_[k].unitary, u, tol)) {
            return static_cast<uint8_t>(k);
        }
    }
    throw std::invalid_argument("unitary is not a single-qubit Clifford");
}

double CliffordGroup::mean_word_length(GateSet g) const {
    size_t total = 0;
    for (const auto &e : elements_) {
        total += e.word(g).size();
    }
    return static_cast<double>(total) / SIZE;
}

std::string CliffordGroup::to_json() const {
    nlohmann::ordered_json doc;
    doc["schema"] = "qmem.clifford_group/1";
    doc["word_convention"] = "time order; X=+X_pi/2, Y=+Y_pi/2, x=-X_pi/2, y=-Y_pi/2";
    auto &els = doc["elements"];
    els = nlohmann::ordered_json::array();
    for (const auto &e : elements_) {
        nlohmann::ordered_json j;
        j["index"] = e.index;
        auto cell = [](cdouble z) {
            return nlohmann::ordered_json::array({z.real(), z.imag()});
        };
        j["unitary"] = {cell(e.unitary.a), cell(e.unitary.b), cell(e.unitary.c), cell(e.unitary.d)};
        j["word_4gen"] = e.word_4gen;
        j["word_2gen"] = e.word_2gen;
        j["inverse"] = inverse_[e.index];
        els.push_back(j);
    }
    doc["mean_length_4gen"] = mean_word_length(GateSet::FOUR_GENERATOR);
    doc["mean_length_2gen"] = mean_word_length(GateSet::TWO_GENERATOR_BB1);
    auto &tab = doc["compose"];
    tab = nlohmann::ordered_json::array();
    for (const auto &row : table_) {
        tab.push_back(row);
    }
    return doc.dump(2);
}

std::vector<CliffordElement> enumerate_group() {
    const auto &els = CliffordGroup::instance().elements();
    return {els.begin(), els.end()};
}

const CliffordElement &compose(const CliffordElement &a, const CliffordElement &b) {
    const auto &g = CliffordGroup::instance();
    return g[g.compose(a.index, b.index)];
}

const CliffordElement &inverse(const CliffordElement &a) {
    const auto &g = CliffordGroup::instance();
    return g[g.inverse(a.index)];
}

const CliffordElement &recovery_gate(const CliffordElement &net, BasisState target, Rng &rng) {
    const auto &g = CliffordGroup::instance();
    const auto &c = g.recovery_candidates(net.index, target);
    return g[c[uniform_index(rng, c.size())]];
}

std::vector<Pulse> bb1_expand(const Pulse &p) {
    if (std::abs(p.angle - PI / 2) > 1e-12) {
        throw std::invalid_argument("bb1_expand only protects pi/2 pulses");
    }
    double phi1 = std::acos(-p.angle / (4 * PI));
    double phi = p.axis_phase;
    double d = p.duration;
    double s = p.amplitude_scale;
    return {
        p,
        Pulse{PI, phi + phi1, 2 * d, s},
        Pulse{2 * PI, phi + 3 * phi1, 4 * d, s},
        Pulse{PI, phi + phi1, 2 * d, s},
    };
}

std::vector<Pulse> clifford_pulses(uint8_t element, GateSet g, double pi2_duration, double amplitude_scale) {
    const auto &e = CliffordGroup::instance()[element];
    std::vector<Pulse> out;
    for (char c : e.word(g)) {
        Pulse p = generator_pulse(c, pi2_duration, amplitude_scale);
        if (g == GateSet::TWO_GENERATOR_BB1) {
            for (const auto &q : bb1_expand(p)) {
                out.push_back(q);
            }
        } else {
            out.push_back(p);
        }
    }
    return out;
}

std::array<int, CliffordGroup::SIZE> minimal_word_lengths(GateSet g) {
    const auto &group = CliffordGroup::instance();
    std::string_view gens = g == GateSet::FOUR_GENERATOR ? "XYxy" : "XY";
    std::array<int, CliffordGroup::SIZE> dist;
    dist.fill(-1);
    dist[CliffordGroup::IDENTITY] = 0;
    std::deque<uint8_t> queue{CliffordGroup::IDENTITY};
    std::vector<uint8_t> gen_idx;
    for (char c : gens) {
        gen_idx.push_back(group.find(generator_pulse(c).unitary()));
    }
    while (!queue.empty()) {
        uint8_t u = queue.front();
        queue.pop_front();
        for (uint8_t gi : gen_idx) {
            uint8_t v = group.compose(u, gi);
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

}  // namespace qmem
