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

#ifndef QMEM_SIM_CORE_H
#define QMEM_SIM_CORE_H

#include <complex>
#include <cstdint>

#include "qmem/rng.h"

namespace qmem {

using cdouble = std::complex<double>;

/// Pure single-qubit state. Amplitudes are ordered (|down>, |up>); global
/// phase is never normalized and never compared.
struct QubitState {
    cdouble amp_down{0.0};
    cdouble amp_up{1.0};

    static QubitState up() {
        return {0.0, 1.0};
    }
    static QubitState down() {
        return {1.0, 0.0};
    }

    double prob_up() const {
        return std::norm(amp_up);
    }
    double prob_down() const {
        return std::norm(amp_down);
    }
    double norm_sq() const {
        return std::norm(amp_down) + std::norm(amp_up);
    }
};

/// 2x2 complex matrix in row-major order, acting on (amp_down, amp_up).
struct Mat2 {
    cdouble a, b, c, d;

    static Mat2 identity() {
        return {1.0, 0.0, 0.0, 1.0};
    }

    Mat2 operator*(const Mat2 &o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    QubitState operator*(const QubitState &s) const {
        return {a * s.amp_down + b * s.amp_up, c * s.amp_down + d * s.amp_up};
    }
    Mat2 adjoint() const {
        return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)};
    }
    cdouble trace() const {
        return a + d;
    }
    cdouble det() const {
        return a * d - b * c;
    }
};

inline const Mat2 kPauliX{0.0, 1.0, 1.0, 0.0};
inline const Mat2 kPauliY{0.0, cdouble(0, -1), cdouble(0, 1), 0.0};
inline const Mat2 kPauliZ{-1.0, 0.0, 0.0, 1.0};

/// R_phi(theta) = exp[-i (theta/2)(cos(phi) X + sin(phi) Y)].
Mat2 rotation_unitary(double angle, double axis_phase);

/// Relative phase delta_phi accrued by |up> with respect to |down>.
Mat2 z_phase_unitary(double delta_phi);

/// True when |tr(A^dag B)| = 2 within tol, i.e. A and B agree up to global phase.
bool equal_up_to_phase(const Mat2 &a, const Mat2 &b, double tol = 1e-9);

/// Average gate infidelity 1 - (|tr(U^dag V)|^2 + 2) / 6 between two unitaries.
double average_gate_infidelity(const Mat2 &actual, const Mat2 &ideal);

/// One physical rotation. The realized angle is angle * amplitude_scale.
struct Pulse {
    double angle = 0.0;
    double axis_phase = 0.0;
    double duration = 0.0;
    double amplitude_scale = 1.0;

    double effective_angle() const {
        return angle * amplitude_scale;
    }
    Mat2 unitary() const {
        return rotation_unitary(effective_angle(), axis_phase);
    }
    /// Throws std::invalid_argument when the angle, duration or scale is out of range.
    void validate() const;
};

QubitState apply_pulse(const QubitState &state, const Pulse &pulse);
QubitState apply_z_phase(const QubitState &state, double delta_phi);

/// Readout errors: eps_down is the probability of reporting "up" for a
/// prepared |down>, eps_up the probability of reporting "down" for |up>.
struct SpamModel {
    double eps_down = 0.0;
    double eps_up = 0.0;

    double eps_spam() const {
        return 0.5 * (eps_down + eps_up);
    }
    void validate() const;
};

enum class Outcome : uint8_t {
    DOWN = 0,
    UP = 1,
};

inline Outcome flip(Outcome o) {
    return o == Outcome::UP ? Outcome::DOWN : Outcome::UP;
}

/// Projective Z measurement with Born probabilities, followed by a readout
/// flip drawn from `spam`. Consumes exactly two uniforms from `rng`.
Outcome measure(const QubitState &state, const SpamModel &spam, Rng &rng);

}  // namespace qmem

#endif
