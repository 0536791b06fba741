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

#include "qmem/sim_core.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qmem {

Mat2 rotation_unitary(double angle, double axis_phase) {
    double c = std::cos(0.5 * angle);
    double s = std::sin(0.5 * angle);
    cdouble e = std::polar(1.0, axis_phase);
    cdouble mi_s(0.0, -s);
    return {c, mi_s * std::conj(e), mi_s * e, c};
}

Mat2 z_phase_unitary(double delta_phi) {
    return {1.0, 0.0, 0.0, std::polar(1.0, delta_phi)};
}

bool equal_up_to_phase(const Mat2 &a, const Mat2 &b, double tol) {
    return std::abs(std::abs((a.adjoint() * b).trace()) - 2.0) < tol;
}

double average_gate_infidelity(const Mat2 &actual, const Mat2 &ideal) {
    double t = std::norm((ideal.adjoint() * actual).trace());
    return 1.0 - (t + 2.0) / 6.0;
}

void Pulse::validate() const {
    constexpr double four_pi = 4 * std::numbers::pi;
    if (!(angle > -four_pi && angle <= four_pi)) {
        throw std::invalid_argument("pulse angle must lie in (-4pi, 4pi], got " + std::to_string(angle));
    }
    if (!(duration >= 0)) {
        throw std::invalid_argument("pulse duration must be non-negative");
    }
    if (!(amplitude_scale > 0)) {
        throw std::invalid_argument("pulse amplitude_scale must be positive");
    }
}

QubitState apply_pulse(const QubitState &state, const Pulse &pulse) {
    return pulse.unitary() * state;
}

QubitState apply_z_phase(const QubitState &state, double delta_phi) {
    return {state.amp_down, state.amp_up * std::polar(1.0, delta_phi)};
}

void SpamModel::validate() const {
    if (!(eps_down >= 0 && eps_down < 0.5) || !(eps_up >= 0 && eps_up < 0.5)) {
        throw std::invalid_argument("SPAM error probabilities must lie in [0, 0.5)");
    }
}

Outcome measure(const QubitState &state, const SpamModel &spam, Rng &rng) {
    double p_up = state.prob_up() / state.norm_sq();
    Outcome ideal = uniform01(rng) < p_up ? Outcome::UP : Outcome::DOWN;
    double flip_p = ideal == Outcome::UP ? spam.eps_up : spam.eps_down;
    double u = uniform01(rng);
    return u < flip_p ? flip(ideal) : ideal;
}

}  // namespace qmem
