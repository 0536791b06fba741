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
#include "qmem/analysis.h"
#include "qmem/experiments.h"

namespace qmem {
namespace {

using oracle::pi;

double mean_fidelity(const std::vector<SequenceRecord> &recs) {
    double s = 0;
    for (const auto &r : recs) {
        s += r.fidelity;
    }
    return s / static_cast<double>(recs.size());
}

TEST(Ramsey, NoiselessHasNoLoss) {
    for (double tau : {1e-3, 0.1, 2.0}) {
        RamseyConfig c;
        c.tau_r = tau;
        c.shots = 500;
        c.seed = 1;
        auto r = run_ramsey(c);
        EXPECT_EQ(r.contrast_loss, 0.0);
        EXPECT_EQ(r.p_up_max, 1.0);
        EXPECT_EQ(r.p_up_min, 0.0);
    }
}

TEST(Ramsey, WhiteNoiseLossMatchesClosedForm) {
    RamseyConfig c;
    c.tau_r = 10.0;
    c.shots = 20000;
    c.noise = NoiseModel{0.0016, 0.0};
    c.seed = 2;
    auto r = run_ramsey(c);
    // Contrast decays as exp(-var/2) with var = pi s_w tau, so the loss is
    // 1 - exp(-3 eps) ~ 3 eps.
    double eps = oracle::memory_error(0.0016, 0, 1, 0, 10.0);
    double want = 1 - std::exp(-3 * eps);
    EXPECT_NEAR(r.contrast_loss, want, 3 * r.sigma);
    EXPECT_NEAR(r.contrast_loss, 3 * eps, 3 * r.sigma + 3 * eps * 0.02);
}

TEST(Ramsey, SpamControlsMeasureReadoutError) {
    RamseyConfig c;
    c.tau_r = 0.01;
    c.shots = 100000;
    c.spam = {0.01, 0.03};
    c.seed = 3;
    auto r = run_ramsey(c);
    EXPECT_NEAR(r.eps_up_measured, 0.03, 4 * oracle::binomial_sigma(0.03, 1e5));
    EXPECT_NEAR(r.eps_down_measured, 0.01, 4 * oracle::binomial_sigma(0.01, 1e5));
    EXPECT_NEAR(r.spam_measured, 0.02, 0.002);
    // SPAM shrinks raw contrast by 1 - eps_up - eps_down; the corrected loss removes it.
    EXPECT_NEAR(r.contrast_loss_raw, 0.04, 0.005);
    EXPECT_NEAR(r.contrast_loss, 0.0, 3 * r.sigma + 1e-3);
}

TEST(SpinEcho, CancelsStaticOffset) {
    RamseyConfig c;
    c.noise.static_detuning = 640.0;
    c.shots = 2000;
    c.seed = 4;
    for (double tau : {1e-4, 1e-3, 0.37e-3}) {
        c.tau_r = tau;
        auto r = run_spin_echo(c);
        EXPECT_NEAR(r.contrast_loss, 0.0, 1e-9) << tau;
        // Without echo the same offset rotates the fringe.
        auto plain = run_ramsey(c);
        double s = std::sin(pi * 640.0 * tau);
        EXPECT_NEAR(plain.p_up_max, 1 - s * s, 4 * oracle::binomial_sigma(1 - s * s, 2000) + 1e-12) << tau;
    }
}

TEST(Ramsey, FittedNoiseCoherenceTime) {
    // Exponential fit over tau_R > 1 s under the fitted spectrum; 22 s +/- 15% expected.
    std::vector<ContrastPoint> pts;
    for (double tau : {2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0}) {
        RamseyConfig c;
        c.tau_r = tau;
        c.shots = 4000;
        c.noise = noise_preset("paper-fit");
        c.seed = static_cast<uint64_t>(tau * 10);
        auto r = run_ramsey(c);
        if (r.contrast_loss < 0.95) {
            pts.push_back({tau, r.contrast_loss, r.sigma});
        }
    }
    auto t2 = fit_contrast_decay(pts, DecayShape::EXPONENTIAL);
    EXPECT_NEAR(t2.value, 22.0, 0.15 * 22.0);
}

TEST(SpinEcho, StretchQubitCoherenceTime) {
    std::vector<ContrastPoint> pts;
    for (double tau : {0.5e-3, 1e-3, 1.5e-3, 2e-3, 2.5e-3, 3e-3}) {
        RamseyConfig c;
        c.tau_r = tau;
        c.shots = 4000;
        c.noise = stretch_noise_model(47e-6, 0.0);
        c.seed = 21;
        auto r = run_spin_echo(c);
        pts.push_back({tau, r.contrast_loss, r.sigma});
    }
    auto t2 = fit_contrast_decay(pts, DecayShape::GAUSSIAN);
    EXPECT_NEAR(t2.value, 2.1e-3, 0.2 * 2.1e-3);
}

TEST(SpinEcho, NoiselessIsZero) {
    RamseyConfig c;
    c.tau_r = 0.5;
    c.shots = 100;
    EXPECT_EQ(run_spin_echo(c).contrast_loss, 0.0);
}

TEST(Rb, NoiselessSequencesAlwaysRecover) {
    for (auto gs : {GateSet::FOUR_GENERATOR, GateSet::TWO_GENERATOR_BB1}) {
        for (size_t m : {1, 7, 100, 10000}) {
            RbConfig c;
            c.m = m;
            c.k = 3;
            c.shots = 3;
            c.gateset = gs;
            c.master_seed = 5;
            auto r = run_rb_campaign(c);
            ASSERT_EQ(r.main.size(), 3u);
            for (const auto &s : r.main) {
                EXPECT_EQ(s.fidelity, 1.0) << gate_set_name(gs) << " m=" << m;
                EXPECT_EQ(s.kind, RecordKind::SRB);
            }
        }
    }
}

TEST(Rb, NoiselessIrbAndReferenceRecover) {
    RbConfig c;
    c.m = 30;
    c.k = 4;
    c.shots = 5;
    c.tau = 0.01;
    c.master_seed = 6;
    for (auto mode : {GateTiming::INSTANTANEOUS, GateTiming::GAPS, GateTiming::FINITE_DURATION}) {
        c.timing.mode = mode;
        auto r = run_rb_campaign(c);
        for (const auto *set : {&r.main, &r.reference, &r.spam}) {
            for (const auto &s : *set) {
                EXPECT_EQ(s.fidelity, 1.0) << gate_timing_name(mode);
            }
        }
    }
}

TEST(Rb, ReferenceIsTimeMatched) {
    RbConfig c;
    c.m = 12;
    c.k = 5;
    c.shots = 2;
    c.tau = 0.003;
    c.noise = noise_preset("paper-fit");
    c.master_seed = 7;
    for (auto gs : {GateSet::FOUR_GENERATOR, GateSet::TWO_GENERATOR_BB1}) {
        for (auto mode : {GateTiming::INSTANTANEOUS, GateTiming::GAPS, GateTiming::FINITE_DURATION}) {
            c.gateset = gs;
            c.timing.mode = mode;
            auto r = run_rb_campaign(c);
            ASSERT_EQ(r.main.size(), r.reference.size());
            for (size_t i = 0; i < r.main.size(); ++i) {
                EXPECT_EQ(r.main[i].duration, r.reference[i].duration);
                EXPECT_EQ(r.main[i].kind, RecordKind::IRB);
                EXPECT_EQ(r.reference[i].kind, RecordKind::REFERENCE);
                EXPECT_GE(r.main[i].duration, 12 * 0.003);
            }
            for (size_t i = 0; i < r.spam.size(); ++i) {
                EXPECT_EQ(r.spam[i].duration, r.main[i].duration);
            }
        }
    }
}

TEST(Rb, DeterministicAcrossThreadCounts) {
    RbConfig c;
    c.m = 20;
    c.k = 6;
    c.shots = 300;
    c.tau = 0.05;
    c.noise = noise_preset("paper-fit");
    c.eps_inject = 1e-3;
    c.spam = {0.003, 0.003};
    c.master_seed = 8;
    c.threads = 1;
    auto a = run_rb_campaign(c);
    c.threads = 3;
    auto b = run_rb_campaign(c);
    ASSERT_EQ(a.main.size(), b.main.size());
    for (size_t i = 0; i < a.main.size(); ++i) {
        EXPECT_EQ(a.main[i].outcomes, b.main[i].outcomes);
        EXPECT_EQ(a.reference[i].outcomes, b.reference[i].outcomes);
        EXPECT_EQ(a.spam[i].outcomes, b.spam[i].outcomes);
        EXPECT_EQ(a.main[i].seed, b.main[i].seed);
    }
}

TEST(Rb, RecordsAreConsistent) {
    RbConfig c;
    c.m = 10;
    c.k = 4;
    c.shots = 50;
    c.tau = 0.1;
    c.noise = noise_preset("paper-fit");
    c.master_seed = 9;
    auto r = run_rb_campaign(c);
    for (const auto &s : r.main) {
        ASSERT_EQ(s.shots(), 50u);
        size_t ones = std::count(s.outcomes.begin(), s.outcomes.end(), '1');
        size_t succ = s.target == BasisState::UP ? ones : s.shots() - ones;
        EXPECT_EQ(succ, s.successes);
        EXPECT_DOUBLE_EQ(s.fidelity, static_cast<double>(s.successes) / 50.0);
        EXPECT_GE(s.fidelity, 0.0);
        EXPECT_LE(s.fidelity, 1.0);
    }
}

TEST(Rb, TargetsAreMixed) {
    RbConfig c;
    c.m = 5;
    c.k = 200;
    c.shots = 1;
    c.master_seed = 10;
    auto r = run_rb_campaign(c);
    int up = 0;
    for (const auto &s : r.main) {
        up += s.target == BasisState::UP;
    }
    EXPECT_NEAR(up, 100, 5 * std::sqrt(50.0));
}

TEST(Rb, FidelityFloorIsOneHalf) {
    RbConfig c;
    c.m = 50;
    c.k = 20;
    c.shots = 200;
    c.tau = 1.0;
    c.noise = NoiseModel{0.5, 0.2, 0.1};
    c.master_seed = 11;
    auto r = run_rb_campaign(c);
    double f = mean_fidelity(r.main);
    double sigma = 0.5 / std::sqrt(20.0 * 200.0);
    EXPECT_GE(f, 0.5 - 4 * sigma);
    EXPECT_NEAR(f, 0.5, 0.05);
}

TEST(Rb, DecouplingCancelsStaticDetuning) {
    RbConfig c;
    c.m = 40;
    c.k = 10;
    c.shots = 20;
    c.tau = 0.4;
    c.dd_period = 0.1;
    c.noise.static_detuning = 3.025;
    c.master_seed = 12;
    auto r = run_rb_campaign(c);
    for (const auto &s : r.main) {
        EXPECT_EQ(s.fidelity, 1.0);
        EXPECT_EQ(s.dd_pulses, 40u * 4u);
    }
    for (const auto &s : r.reference) {
        EXPECT_EQ(s.fidelity, 1.0);
    }
    // Without decoupling the same offset is visible.
    c.dd_period.reset();
    auto plain = run_rb_campaign(c);
    EXPECT_LT(mean_fidelity(plain.main), 0.9);
}

TEST(Rb, InjectedDepolarizingComposes) {
    // eps_inject per pulse gives eps_g = 1 - (1 - eps_inject)^3.50 per Clifford.
    RbConfig c;
    c.eps_inject = 2e-3;
    c.k = 40;
    c.shots = 200;
    c.master_seed = 13;
    c.spam_controls = false;
    std::vector<SequenceRecord> all;
    for (size_t m : {1, 20, 40, 70}) {
        c.m = m;
        auto r = run_rb_campaign(c);
        all.insert(all.end(), r.main.begin(), r.main.end());
    }
    auto pts = summarize_records(all);
    auto fit = fit_rb_decay(pts);
    double want = 1 - std::pow(1 - 2e-3, 3.5);
    EXPECT_NEAR(fit.eps(), want, 3 * fit.sigma_eps() + 0.03 * want);
}

TEST(Rb, OverflowGuard) {
    RbConfig c;
    c.m = 1000;
    c.tau = 10;
    c.max_sequence_duration = 3600;
    EXPECT_THROW(run_rb_campaign(c), std::overflow_error);
}

TEST(Rb, ValidateRejects) {
    RbConfig c;
    c.k = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.k = 2;
    c.eps_inject = 0.9;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Dd, PulseCountAndPlacement) {
    EXPECT_EQ(dd_pulse_count(0.2, 0.1), 2u);
    EXPECT_EQ(dd_pulse_count(1.0, 0.1), 10u);
    EXPECT_EQ(dd_pulse_count(0.3, 0.1), 2u);
    EXPECT_EQ(dd_pulse_count(0.1, 0.1), 0u);
    EXPECT_EQ(dd_pulse_count(1.0, std::nullopt), 0u);
    auto t = dd_pulse_times(0.2, 2);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_NEAR(t[0], 0.05, 1e-15);
    EXPECT_NEAR(t[1], 0.15, 1e-15);
    auto u = dd_pulse_times(1.0, 10);
    for (size_t j = 0; j < u.size(); ++j) {
        EXPECT_NEAR(u[j] + u[u.size() - 1 - j], 1.0, 1e-12);  // symmetric about the midpoint
    }
}

TEST(Names, RoundTrip) {
    for (auto t : {GateTiming::INSTANTANEOUS, GateTiming::GAPS, GateTiming::FINITE_DURATION}) {
        EXPECT_EQ(parse_gate_timing(gate_timing_name(t)), t);
    }
    for (auto k : {RecordKind::SRB, RecordKind::IRB, RecordKind::REFERENCE, RecordKind::SPAM_CONTROL}) {
        EXPECT_EQ(parse_record_kind(record_kind_name(k)), k);
    }
}

}  // namespace
}  // namespace qmem
