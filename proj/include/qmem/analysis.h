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

#ifndef QMEM_ANALYSIS_H
#define QMEM_ANALYSIS_H

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qmem/experiments.h"
#include "qmem/noise.h"

namespace qmem {

/// Raised when an iterative fit fails to converge.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RbPoint {
    double m = 0;
    double fidelity = 0;  // mean sequence fidelity
    double sem = 0;       // standard error over randomizations
    size_t count = 0;     // randomizations averaged
};

/// Fit of F(m) = (a p^m + 1) / 2.
struct RbDecayFit {
    double p = 1;
    double a = 1;
    double var_p = 0;
    double var_a = 0;
    double cov_pa = 0;
    std::vector<double> residuals;  // data - model
    double chi2 = 0;
    size_t dof = 0;
    int iterations = 0;
    bool weighted = false;
    bool at_boundary = false;  // p was clamped to 1

    double eps() const {
        return 0.5 * (1 - p);
    }
    double sigma_eps() const;
    double spam() const {
        return 0.5 * (1 - a);
    }
    double sigma_spam() const;
    double model(double m) const;
};

RbDecayFit fit_rb_decay(std::span<const RbPoint> points);

struct ValueWithError {
    double value = 0;
    double sigma = 0;
};

/// eps_m = (1 - p_IRB / p_RB) / 2 with first-order error propagation.
ValueWithError extract_memory_error(const RbDecayFit &irb, const RbDecayFit &ref);

/// Ramsey contrast loss to memory error (factor 1/3).
double contrast_loss_to_memory_error(double loss);

struct MemoryErrorPrediction {
    double value = 0;
    double white = 0;
    double pink = 0;
    double static_term = 0;
    bool pink_valid = true;  // false when 0.4/(f_c tau) <= 1 and the pink term was dropped
};

/// (pi/3)(S_W tau/2 + S_P tau^2 ln(0.4/(f_c tau))) + (2/3) sin^2(pi tau df).
MemoryErrorPrediction predict_memory_error_detail(const NoiseModel &model, double tau);
double predict_memory_error(const NoiseModel &model, double tau);

enum class CurveMethod : uint8_t {
    RAMSEY = 0,
    IRB = 1,
    IRB_DD = 2,
};

std::string_view curve_method_name(CurveMethod m);
CurveMethod parse_curve_method(std::string_view name);

struct MemoryErrorPoint {
    double tau = 0;
    double eps = 0;
    double sigma = 0;
    CurveMethod method = CurveMethod::IRB;
};

struct DecoherenceFit {
    double s_w = 0, s_p = 0, f_c = 0;
    double sigma_s_w = 0, sigma_s_p = 0, sigma_f_c = 0;
    std::array<std::array<double, 3>, 3> cov_log{};  // covariance of (ln s_w, ln s_p, ln f_c)
    double chi2 = 0;
    size_t dof = 0;
    int iterations = 0;

    NoiseModel model() const;
};

struct MemoryErrorCurve {
    std::vector<MemoryErrorPoint> points;
    DecoherenceFit fit;
};

/// Weighted least squares of the closed-form memory error over
/// (S_W, S_P, f_c), fitted in log space. Needs >= 4 points spanning two decades.
DecoherenceFit fit_decoherence_model(std::span<const MemoryErrorPoint> points);

enum class DecayShape : uint8_t {
    EXPONENTIAL = 0,
    GAUSSIAN = 1,
};

std::string_view decay_shape_name(DecayShape s);
DecayShape parse_decay_shape(std::string_view name);

struct ContrastPoint {
    double t = 0;
    double loss = 0;   // 1 - contrast
    double sigma = 0;
};

/// Fits loss(t) = 1 - exp(-t/T) or 1 - exp(-(t/T)^2), zero at t = 0.
ValueWithError fit_contrast_decay(std::span<const ContrastPoint> points, DecayShape shape);

/// Nonparametric bootstrap of `statistic` over `values`. Deterministic in seed.
ValueWithError bootstrap_ci(std::span<const double> values,
                            const std::function<double(std::span<const double>)> &statistic, size_t resamples,
                            uint64_t seed);

double mean_of(std::span<const double> v);

/// Groups records of one kind by m; mean fidelity and SEM over sequences.
std::vector<RbPoint> summarize_records(std::span<const SequenceRecord> records);

/// Sequence lengths {1/4, 1/2, 3/4, 1} * m_max with m_max = round(target / eps).
std::vector<size_t> plan_sequence_lengths(double eps_pred, double target_infidelity = 0.1);

}  // namespace qmem

#endif
