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

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.h"
#include "qmem/sim_core.h"

namespace qmem {
namespace {

using oracle::pi;

oracle::M to_oracle(const Mat2 &m) {
    return {m.a, m.b, m.c, m.d};
}

TEST(Rotation, ZeroAngleIsIdentity) {
    for (double phi : {0.0, 0.3, pi / 2, 2.0}) {
        Mat2 u = rotation_unitary(0.0, phi);
        EXPECT_NEAR(std::abs(u.a - 1.0), 0, 1e-15);
        EXPECT_NEAR(std::abs(u.b), 0, 1e-15);
        EXPECT_NEAR(std::abs(u.c), 0, 1e-15);
        EXPECT_NEAR(std::abs(u.d - 1.0), 0, 1e-15);
    }
}

TEST(Rotation, MatchesPauliExpansion) {
    for (double theta : {0.1, pi / 2, pi, 2.5, 2 * pi}) {
        for (double phi : {0.0, pi / 2, -pi / 2, 1.1}) {
            auto got = to_oracle(rotation_unitary(theta, phi));
            auto want = oracle::rot(theta, phi);
            for (int i = 0; i < 4; ++i) {
                EXPECT_NEAR(std::abs(got[i] - want[i]), 0, 1e-14) << theta << " " << phi;
            }
        }
    }
}

TEST(ApplyPulse, PiPulseInvertsPopulation) {
    QubitState s = apply_pulse(QubitState::up(), Pulse{pi, 0.0, 0.0, 1.0});
    EXPECT_NEAR(s.prob_down(), 1.0, 1e-15);
}

TEST(ApplyPulse, TwoHalfPulsesInvert) {
    Pulse p{pi / 2, 0.0, 0.0, 1.0};
    QubitState s = apply_pulse(apply_pulse(QubitState::up(), p), p);
    auto v = oracle::apply(oracle::rot(pi / 2, 0), oracle::apply(oracle::rot(pi / 2, 0), {0.0, 1.0}));
    EXPECT_NEAR(s.prob_down(), oracle::p_down(v), 1e-14);
    EXPECT_NEAR(s.prob_down(), 1.0, 1e-14);
}

TEST(ApplyPulse, HalfPulseGivesEquator) {
    QubitState s = apply_pulse(QubitState::up(), Pulse{pi / 2, 0.0, 0.0, 1.0});
    EXPECT_NEAR(s.prob_up(), 0.5, 1e-15);
}

TEST(ApplyPulse, AmplitudeErrorMatchesMatrixOracle) {
    QubitState s = apply_pulse(QubitState::up(), Pulse{pi / 2, 0.0, 0.0, 1.02});
    s = apply_pulse(s, Pulse{pi / 2, 0.0, 0.0, 1.0});
    auto v = oracle::apply(oracle::rot(pi / 2, 0), oracle::apply(oracle::rot(1.02 * pi / 2, 0), {0.0, 1.0}));
    EXPECT_NEAR(s.prob_down(), oracle::p_down(v), 1e-14);
    // Total angle 1.01 pi about one axis.
    double half = 1.01 * pi / 2;
    EXPECT_NEAR(s.prob_down(), std::sin(half) * std::sin(half), 1e-14);
}

TEST(ApplyPulse, FullTurnReturnsState) {
    QubitState s{cdouble(0.6, 0.0), cdouble(0.0, 0.8)};
    for (double phi : {0.0, 0.7, 2.0}) {
        QubitState t = apply_pulse(s, Pulse{2 * pi, phi, 0.0, 1.0});
        EXPECT_NEAR(std::abs(std::conj(s.amp_down) * t.amp_down + std::conj(s.amp_up) * t.amp_up), 1.0, 1e-14);
    }
}

TEST(ZPhase, PoleInsensitive) {
    for (double d : {0.1, 1.0, pi}) {
        EXPECT_NEAR(apply_z_phase(QubitState::up(), d).prob_up(), 1.0, 1e-15);
    }
}

TEST(ZPhase, RamseyFringe) {
    // Open with X_{pi/2}, accrue delta_phi, close with X_{pi/2}: P(down) = cos^2(delta_phi / 2).
    Pulse p{pi / 2, 0.0, 0.0, 1.0};
    for (double d : {0.0, pi / 3, pi}) {
        QubitState s = apply_pulse(apply_z_phase(apply_pulse(QubitState::up(), p), d), p);
        auto v = oracle::apply(oracle::rot(pi / 2, 0),
                               oracle::apply(oracle::zphase(d), oracle::apply(oracle::rot(pi / 2, 0), {0.0, 1.0})));
        EXPECT_NEAR(s.prob_down(), oracle::p_down(v), 1e-14);
        EXPECT_NEAR(s.prob_down(), std::cos(d / 2) * std::cos(d / 2), 1e-14);
    }
}

TEST(ZPhase, CommutesAndAddsLinearly) {
    QubitState s{cdouble(0.6, 0.1), cdouble(0.2, std::sqrt(1 - 0.36 - 0.01 - 0.04))};
    QubitState a = apply_z_phase(apply_z_phase(s, 0.3), 1.1);
    QubitState b = apply_z_phase(apply_z_phase(s, 1.1), 0.3);
    QubitState c = apply_z_phase(s, 1.4);
    EXPECT_NEAR(std::abs(a.amp_up - b.amp_up), 0, 1e-15);
    EXPECT_NEAR(std::abs(a.amp_up - c.amp_up), 0, 1e-14);
    EXPECT_NEAR(std::abs(a.amp_down - c.amp_down), 0, 1e-15);
}

TEST(Properties, NormPreservedOverManyOperations) {
    Rng rng = make_rng(42);
    QubitState s = QubitState::up();
    for (int i = 0; i < 100000; ++i) {
        if (i % 2 == 0) {
            s = apply_pulse(s, Pulse{uniform01(rng) * 2 * pi, uniform01(rng) * 2 * pi, 0.0, 1.0});
        } else {
            s = apply_z_phase(s, uniform01(rng) * 2 * pi);
        }
    }
    EXPECT_NEAR(s.norm_sq(), 1.0, 1e-10);
}

TEST(Properties, SameAxisRotationsCompose) {
    Rng rng = make_rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        double t1 = (uniform01(rng) - 0.5) * 4 * pi;
        double t2 = (uniform01(rng) - 0.5) * 4 * pi;
        double phi = uniform01(rng) * 2 * pi;
        QubitState s{cdouble(uniform01(rng), uniform01(rng)), cdouble(uniform01(rng), uniform01(rng))};
        double n = std::sqrt(s.norm_sq());
        s.amp_down /= n;
        s.amp_up /= n;
        QubitState a = apply_pulse(apply_pulse(s, Pulse{t1, phi, 0, 1}), Pulse{t2, phi, 0, 1});
        QubitState b = rotation_unitary(t1 + t2, phi) * s;
        EXPECT_NEAR(std::abs(std::conj(a.amp_down) * b.amp_down + std::conj(a.amp_up) * b.amp_up), 1.0, 1e-10);
    }
}

TEST(PhaseEquality, IgnoresGlobalPhase) {
    Mat2 u = rotation_unitary(0.7, 0.2);
    cdouble ph = std::exp(cdouble(0, 1.3));
    Mat2 v{ph * u.a, ph * u.b, ph * u.c, ph * u.d};
    EXPECT_TRUE(equal_up_to_phase(u, v));
    EXPECT_FALSE(equal_up_to_phase(u, rotation_unitary(0.71, 0.2)));
}

TEST(GateInfidelity, MatchesOracle) {
    Mat2 a = rotation_unitary(pi / 2 * 1.01, 0.0);
    Mat2 b = rotation_unitary(pi / 2, 0.0);
    EXPECT_NEAR(average_gate_infidelity(a, b), oracle::gate_infidelity(to_oracle(a), to_oracle(b)), 1e-15);
    // A same-axis angle error d gives (2/3) sin^2(d/2).
    double d = 0.01 * pi / 2;
    EXPECT_NEAR(average_gate_infidelity(a, b), 2.0 / 3.0 * std::sin(d / 2) * std::sin(d / 2), 1e-15);
}

TEST(Pulse, ValidateRejectsBadInput) {
    EXPECT_THROW((Pulse{pi, 0, -1, 1}.validate()), std::invalid_argument);
    EXPECT_THROW((Pulse{pi, 0, 0, 0}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((Pulse{pi, 0, 1e-5, 1}.validate()));
}

TEST(Measure, NoSpamIsDeterministicAtPoles) {
    Rng rng = make_rng(1);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(measure(QubitState::up(), {}, rng), Outcome::UP);
        EXPECT_EQ(measure(QubitState::down(), {}, rng), Outcome::DOWN);
    }
}

TEST(Measure, SpamRateReproducesInput) {
    SpamModel spam{0.0, 2.7e-3};
    Rng rng = make_rng(2);
    const int n = 1000000;
    int wrong = 0;
    for (int i = 0; i < n; ++i) {
        wrong += measure(QubitState::up(), spam, rng) == Outcome::DOWN;
    }
    double rate = static_cast<double>(wrong) / n;
    EXPECT_NEAR(rate, 2.7e-3, 4 * oracle::binomial_sigma(2.7e-3, n));
    EXPECT_NEAR(rate, 2.7e-3, 0.2e-3);
}

TEST(Measure, BornRuleOnEquator) {
    QubitState s = apply_pulse(QubitState::up(), Pulse{pi / 2, 0.3, 0, 1});
    Rng rng = make_rng(3);
    const int n = 1000000;
    int up = 0;
    for (int i = 0; i < n; ++i) {
        up += measure(s, {}, rng) == Outcome::UP;
    }
    EXPECT_NEAR(static_cast<double>(up) / n, 0.5, 3 * oracle::binomial_sigma(0.5, n));
}

TEST(Measure, BornTimesSpamStatistics) {
    // P(report up) = p (1 - eps_up) + (1 - p) eps_down.
    QubitState s = apply_pulse(QubitState::up(), Pulse{1.1, 0.0, 0, 1});
    SpamModel spam{0.02, 0.05};
    double p = s.prob_up();
    double want = p * (1 - spam.eps_up) + (1 - p) * spam.eps_down;
    Rng rng = make_rng(4);
    const int n = 200000;
    int up = 0;
    for (int i = 0; i < n; ++i) {
        up += measure(s, spam, rng) == Outcome::UP;
    }
    EXPECT_NEAR(static_cast<double>(up) / n, want, 4 * oracle::binomial_sigma(want, n));
}

TEST(Measure, DeterministicGivenStream) {
    QubitState s = apply_pulse(QubitState::up(), Pulse{pi / 2, 0, 0, 1});
    Rng a = make_rng(99), b = make_rng(99);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(measure(s, {0.01, 0.01}, a), measure(s, {0.01, 0.01}, b));
    }
}

TEST(Spam, Validate) {
    EXPECT_THROW((SpamModel{-0.1, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((SpamModel{0, 0.5}.validate()), std::invalid_argument);
    EXPECT_DOUBLE_EQ((SpamModel{0.002, 0.004}.eps_spam()), 0.003);
}

TEST(Rng, DeriveSeedIsPathSensitive) {
    EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
    EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
    EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
}

TEST(Rng, StandardNormalMoments) {
    Rng rng = make_rng(5);
    std::vector<double> v(400000);
    fill_standard_normal(rng, v);
    double m = 0, m2 = 0, m4 = 0;
    for (double x : v) {
        m += x;
        m2 += x * x;
        m4 += x * x * x * x;
    }
    double n = static_cast<double>(v.size());
    EXPECT_NEAR(m / n, 0, 5 / std::sqrt(n));
    EXPECT_NEAR(m2 / n, 1, 5 * std::sqrt(2 / n));
    EXPECT_NEAR(m4 / n, 3, 5 * std::sqrt(96 / n));
}

TEST(Rng, UniformIndexIsUnbiased) {
    Rng rng = make_rng(6);
    std::array<int, 24> counts{};
    const int n = 240000;
    for (int i = 0; i < n; ++i) {
        counts[uniform_index(rng, 24)]++;
    }
    for (int c : counts) {
        EXPECT_NEAR(c, n / 24.0, 5 * std::sqrt(n / 24.0));
    }
}

}  // namespace
}  // namespace qmem
