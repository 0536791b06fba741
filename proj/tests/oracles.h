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

// Reference implementations used by the tests. They share no code with the
// library: matrices are plain arrays and every formula is written out.

#ifndef QMEM_TESTS_ORACLES_H
#define QMEM_TESTS_ORACLES_H

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using C = std::complex<double>;
using M = std::array<C, 4>;  // row major, basis (down, up)
using V = std::array<C, 2>;

constexpr double pi = std::numbers::pi;

inline M mul(const M &x, const M &y) {
    return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
            x[2] * y[1] + x[3] * y[3]};
}

inline V apply(const M &x, const V &v) {
    return {x[0] * v[0] + x[1] * v[1], x[2] * v[0] + x[3] * v[1]};
}

// exp(-i theta/2 (cos phi X + sin phi Y)) written from the Pauli expansion.
inline M rot(double theta, double phi) {
    double c = std::cos(theta / 2), s = std::sin(theta / 2);
    C nx = std::cos(phi), ny = std::sin(phi);
    C i(0, 1);
    // X = [[0,1],[1,0]], Y = [[0,-i],[i,0]]
    C off_01 = nx * 1.0 + ny * (-i);
    C off_10 = nx * 1.0 + ny * i;
    return {c, -i * s * off_01, -i * s * off_10, c};
}

inline M zphase(double phi) {
    return {1.0, 0.0, 0.0, std::exp(C(0, phi))};
}

inline double p_up(const V &v) {
    return std::norm(v[1]);
}

inline double p_down(const V &v) {
    return std::norm(v[0]);
}

// |tr(A^dag B)|, which is 2 for equal-up-to-phase unitaries.
inline double overlap(const M &a, const M &b) {
    C t = std::conj(a[0]) * b[0] + std::conj(a[2]) * b[2] + std::conj(a[1]) * b[1] + std::conj(a[3]) * b[3];
    return std::abs(t);
}

inline double gate_infidelity(const M &a, const M &b) {
    double o = overlap(a, b);
    return 1 - (o * o + 2) / 6;
}

// Same quantity without cancellation: for W = A^dag B, (2/3) s^2 where
// 2 s^2 is the squared Frobenius norm of the traceless part of W.
inline double gate_infidelity_precise(const M &a, const M &b) {
    M ad{std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
    M w = mul(ad, b);
    C half = (w[0] + w[3]) / 2.0;
    double f = std::norm(w[0] - half) + std::norm(w[3] - half) + std::norm(w[1]) + std::norm(w[2]);
    return f / 3;
}

// Closed-form memory error (pi/3)(S_W tau/2 + S_P tau^2 ln(0.4/(f_c tau))) + (2/3) sin^2(pi tau df).
inline double memory_error(double s_w, double s_p, double f_c, double df, double tau) {
    double pink = 0.4 / (f_c * tau) > 1 ? s_p * tau * tau * std::log(0.4 / (f_c * tau)) : 0.0;
    double s = std::sin(pi * tau * df);
    return pi / 3 * (s_w * tau / 2 + pink) + 2.0 / 3.0 * s * s;
}

// Clock-transition shift 0.5 * 2.42e-3 Hz/mG^2 * dB^2.
inline double clock_shift(double db_mg) {
    return 0.5 * 2.42e-3 * db_mg * db_mg;
}

// Binomial standard error of a frequency.
inline double binomial_sigma(double p, double n) {
    return std::sqrt(std::max(p * (1 - p), 1e-12) / n);
}

}  // namespace oracle

#endif
