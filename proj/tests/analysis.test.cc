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
#include <random>

#include "oracles.h"
#include "qmem/analysis.h"

namespace qmem {
namespace {

std::vector<RbPoint> synthetic_rb(double a, double p, std::vector<double> ms, double sem = 0) {
    std::vector<RbPoint> out;
    for (double m : ms) {
        out.push_back({m, 0.5 * (a * std::pow(p, m) + 1), sem, 50});
    }
    return out;
}

TEST(RbFit, RecoversNoiselessParameters) {
    double p = 1 - 2 * 1.7e-6;
    auto pts = synthetic_rb(0.9946, p, {1000, 2000, 5000, 10000, 20000});
    auto fit = fit_rb_decay(pts);
    EXPECT_NEAR(fit.a, 0.9946, 1e-9);
    EXPECT_NEAR(fit.p, p, 1e-12);
    EXPECT_NEAR(fit.eps(), 1.7e-6, 1e-11);
    EXPECT_NEAR(fit.spam(), 0.0027, 1e-9);
    for (double r : fit.residuals) {
        EXPECT_NEAR(r, 0, 1e-10);
    }
    EXPECT_EQ(fit.dof, 3u);
}

TEST(RbFit, RecoversFromNoisyData) {
    std::mt19937_64 g(7);
    std::normal_distribution<double> n(0, 1);
    double p = 0.99, a = 0.97, sem = 0.004;
    std::vector<RbPoint> pts;
    for (double m : {1, 10, 25, 50, 75, 100, 150}) {
        double f = 0.5 * (a * std::pow(p, m) + 1) + sem * n(g);
        pts.push_back({m, f, sem, 50});
    }
    auto fit = fit_rb_decay(pts);
    EXPECT_TRUE(fit.weighted);
    EXPECT_NEAR(fit.p, p, 4 * std::sqrt(fit.var_p));
    EXPECT_NEAR(fit.a, a, 4 * std::sqrt(fit.var_a));
    EXPECT_GT(fit.sigma_eps(), 0);
    EXPECT_LT(fit.sigma_eps(), 5e-4);
}

TEST(RbFit, PerfectFidelityGivesZeroError) {
    auto pts = synthetic_rb(1.0, 1.0, {1, 10, 100, 1000});
    auto fit = fit_rb_decay(pts);
    EXPECT_NEAR(fit.p, 1.0, 1e-12);
    EXPECT_NEAR(fit.eps(), 0.0, 1e-12);
    EXPECT_NEAR(fit.a, 1.0, 1e-12);
}

TEST(RbFit, RejectsBadInput) {
    auto two = synthetic_rb(1, 0.99, {1, 10});
    EXPECT_THROW(fit_rb_decay(two), std::invalid_argument);
    auto pts = synthetic_rb(1, 0.99, {1, 10, 20});
    pts[1].fidelity = 1.2;
    EXPECT_THROW(fit_rb_decay(pts), std::invalid_argument);
}

TEST(MemoryError, RatioExtraction) {
    RbDecayFit ref, irb;
    ref.p = 0.99;
    irb.p = 0.99;
    EXPECT_EQ(extract_memory_error(irb, ref).value, 0.0);

    // eps_total 6e-6 with eps_g 1.2e-6 leaves eps_m = 4.8e-6 to first order.
    ref.p = 1 - 2 * 1.2e-6;
    irb.p = 1 - 2 * 6e-6;
    auto v = extract_memory_error(irb, ref);
    EXPECT_NEAR(v.value, 0.5 * (1 - irb.p / ref.p), 1e-18);
    EXPECT_NEAR(v.value, 4.8e-6, 1e-10);

    ref.var_p = 1e-12;
    irb.var_p = 4e-12;
    v = extract_memory_error(irb, ref);
    double want = 0.5 * std::sqrt(4e-12 / (ref.p * ref.p) + irb.p * irb.p * 1e-12 / std::pow(ref.p, 4));
    EXPECT_NEAR(v.sigma, want, 1e-15);
}

TEST(MemoryError, ContrastLossIsThreeTimesEps) {
    EXPECT_DOUBLE_EQ(contrast_loss_to_memory_error(3e-3), 1e-3);
}

TEST(Predict, OneMillisecondWithFittedNoise) {
    auto m = noise_preset("paper-fit");
    auto d = predict_memory_error_detail(m, 1e-3);
    EXPECT_NEAR(d.white, oracle::pi / 3 * 0.0016 * 1e-3 / 2, 1e-15);
    EXPECT_NEAR(d.white, 8.38e-7, 0.01e-7);
    EXPECT_NEAR(d.pink, 1.4e-8, 0.05e-8);
    EXPECT_NEAR(d.value, 8.5e-7, 0.05e-7);
    EXPECT_NEAR(d.value, oracle::memory_error(0.0016, 0.0014, 0.025, 0, 1e-3), 1e-15);
    EXPECT_TRUE(d.pink_valid);
}

TEST(Predict, StaticTermFromFieldOffset) {
    auto m = noise_preset("field-offset-50");
    auto d = predict_memory_error_detail(m, 1e-3);
    double df = oracle::clock_shift(50);
    EXPECT_NEAR(d.static_term, oracle::memory_error(0, 0, 1, df, 1e-3), 1e-15);
    EXPECT_NEAR(d.static_term, 6.02e-5, 0.01e-5);
}

TEST(Predict, VanishesAtShortDelay) {
    auto m = noise_preset("paper-fit");
    EXPECT_LT(predict_memory_error(m, 1e-9), 1e-12);
    EXPECT_THROW(predict_memory_error(m, 0), std::invalid_argument);
}

TEST(Predict, MonotoneForFluctuatingNoise) {
    auto m = noise_preset("paper-fit");
    double prev = 0;
    for (double t = 1e-5; t < 10; t *= 1.3) {
        double v = predict_memory_error(m, t);
        EXPECT_GT(v, prev) << t;
        prev = v;
    }
}

TEST(Predict, PinkTermDroppedPastCutoff) {
    NoiseModel m{0, 1e-3, 1.0};
    auto d = predict_memory_error_detail(m, 1.0);
    EXPECT_FALSE(d.pink_valid);
    EXPECT_EQ(d.pink, 0.0);
}

TEST(Predict, StaticTermSymmetricAndPeriodic) {
    NoiseModel a, b;
    a.static_detuning = 3.0;
    b.static_detuning = -3.0;
    for (double t : {1e-3, 0.01, 0.1, 0.3}) {
        EXPECT_NEAR(predict_memory_error(a, t), predict_memory_error(b, t), 1e-15);
        EXPECT_NEAR(predict_memory_error(a, t), predict_memory_error(a, t + 1.0 / 3.0), 1e-12);
    }
    EXPECT_NEAR(predict_memory_error(a, 1.0 / 3.0), 0.0, 1e-15);
    EXPECT_NEAR(predict_memory_error(a, 1.0 / 6.0), 2.0 / 3.0, 1e-15);
}

std::vector<MemoryErrorPoint> curve(double sw, double sp, double fc) {
    std::vector<MemoryErrorPoint> pts;
    for (double t = 1e-4; t <= 3.0; t *= 2.5) {
        double e = oracle::memory_error(sw, sp, fc, 0, t);
        pts.push_back({t, e, 0.02 * e, CurveMethod::IRB});
    }
    return pts;
}

TEST(DecoherenceFit, RoundTrip) {
    auto pts = curve(0.0016, 0.0014, 0.025);
    auto fit = fit_decoherence_model(pts);
    EXPECT_NEAR(fit.s_w, 0.0016, 0.01 * 0.0016);
    EXPECT_NEAR(fit.s_p, 0.0014, 0.01 * 0.0014);
    EXPECT_NEAR(fit.f_c, 0.025, 0.01 * 0.025);
    EXPECT_LT(fit.chi2, 1e-6);
    EXPECT_EQ(fit.dof, pts.size() - 3);
}

TEST(DecoherenceFit, WhiteOnly) {
    auto pts = curve(0.002, 0, 1);
    auto fit = fit_decoherence_model(pts);
    EXPECT_NEAR(fit.s_w, 0.002, 0.01 * 0.002);
    auto m = fit.model();
    for (const auto &p : pts) {
        EXPECT_NEAR(predict_memory_error(m, p.tau), p.eps, 0.01 * p.eps);
    }
}

TEST(DecoherenceFit, RejectsNarrowSpan) {
    std::vector<MemoryErrorPoint> pts;
    for (double t : {1e-3, 2e-3, 5e-3, 9e-3}) {
        pts.push_back({t, 1e-6, 1e-7, CurveMethod::IRB});
    }
    EXPECT_THROW(fit_decoherence_model(pts), std::invalid_argument);
    pts.resize(3);
    EXPECT_THROW(fit_decoherence_model(pts), std::invalid_argument);
}

TEST(ContrastDecay, ExponentialAndGaussian) {
    std::vector<ContrastPoint> e, g;
    for (double t : {1.0, 5.0, 10.0, 20.0, 40.0}) {
        e.push_back({t, 1 - std::exp(-t / 22.0), 0.01});
    }
    for (double t : {0.05e-3, 0.1e-3, 0.2e-3, 0.3e-3, 0.4e-3}) {
        g.push_back({t, 1 - std::exp(-std::pow(t / 0.26e-3, 2)), 0.01});
    }
    auto fe = fit_contrast_decay(e, DecayShape::EXPONENTIAL);
    auto fg = fit_contrast_decay(g, DecayShape::GAUSSIAN);
    EXPECT_NEAR(fe.value, 22.0, 1e-6);
    EXPECT_NEAR(fg.value, 0.26e-3, 1e-10);
    std::vector<ContrastPoint> one{{1.0, 0.1, 0.01}};
    EXPECT_THROW(fit_contrast_decay(one, DecayShape::EXPONENTIAL), std::invalid_argument);
    EXPECT_EQ(parse_decay_shape(decay_shape_name(DecayShape::GAUSSIAN)), DecayShape::GAUSSIAN);
}

TEST(Bootstrap, ConstantValuesHaveNoSpread) {
    std::vector<double> v(30, 0.73);
    auto r = bootstrap_ci(v, [](std::span<const double> s) { return mean_of(s); }, 500, 1);
    EXPECT_DOUBLE_EQ(r.value, 0.73);
    EXPECT_NEAR(r.sigma, 0.0, 1e-7);
}

TEST(Bootstrap, BernoulliMeanSpread) {
    std::vector<double> v;
    for (int i = 0; i < 25; i++) {
        v.push_back(0);
        v.push_back(1);
    }
    auto r = bootstrap_ci(v, [](std::span<const double> s) { return mean_of(s); }, 4000, 2);
    double want = 0.5 / std::sqrt(50.0);
    EXPECT_DOUBLE_EQ(r.value, 0.5);
    EXPECT_NEAR(r.sigma, want, 0.1 * want);
    auto again = bootstrap_ci(v, [](std::span<const double> s) { return mean_of(s); }, 4000, 2);
    EXPECT_EQ(r.sigma, again.sigma);
    EXPECT_THROW(bootstrap_ci(std::vector<double>{1}, mean_of, 500, 1), std::invalid_argument);
}

TEST(Estimator, UnbiasedOverSimulatedCampaigns) {
    // Binomial sampling of the true curve; the mean recovered eps stays
    // within a few standard errors of truth.
    std::mt19937_64 g(11);
    double p = 0.995, a = 0.98;
    double sum = 0;
    int reps = 60;
    for (int r = 0; r < reps; r++) {
        std::vector<SequenceRecord> recs;
        for (size_t m : {10, 50, 100, 200}) {
            double f = 0.5 * (a * std::pow(p, m) + 1);
            std::binomial_distribution<int> b(100, f);
            for (int k = 0; k < 20; k++) {
                SequenceRecord s;
                s.m = m;
                s.fidelity = b(g) / 100.0;
                recs.push_back(s);
            }
        }
        sum += fit_rb_decay(summarize_records(recs)).eps();
    }
    EXPECT_NEAR(sum / reps, 0.5 * (1 - p), 0.05 * 0.5 * (1 - p));
}

TEST(Summaries, GroupByLength) {
    std::vector<SequenceRecord> recs(4);
    recs[0].m = 5;
    recs[0].fidelity = 1.0;
    recs[1].m = 5;
    recs[1].fidelity = 0.8;
    recs[2].m = 2;
    recs[2].fidelity = 0.9;
    recs[3].m = 5;
    recs[3].fidelity = 0.9;
    auto pts = summarize_records(recs);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[0].m, 2);
    EXPECT_EQ(pts[0].sem, 0);
    EXPECT_NEAR(pts[1].fidelity, 0.9, 1e-12);
    EXPECT_NEAR(pts[1].sem, 0.1 / std::sqrt(3.0), 1e-12);
    EXPECT_EQ(pts[1].count, 3u);
}

TEST(Planner, SequenceLengths) {
    auto ms = plan_sequence_lengths(1e-5, 0.1);
    EXPECT_EQ(ms, (std::vector<size_t>{2500, 5000, 7500, 10000}));
    auto small = plan_sequence_lengths(0.5, 0.1);
    EXPECT_EQ(small, (std::vector<size_t>{1, 2, 3, 4}));
    EXPECT_THROW(plan_sequence_lengths(0, 0.1), std::invalid_argument);
}

}  // namespace
}  // namespace qmem
