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

#ifndef QMEM_NOISE_H
#define QMEM_NOISE_H

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qmem/rng.h"

namespace qmem {

/// Ratio between the physical one-sided PSD of the qubit frequency offset
/// and the S(f) = S_W + S_P/f parameters. With this factor the simulated
/// memory error matches (pi/3)(S_W tau/2 + S_P tau^2 ln(0.4/(f_c tau))).
inline constexpr double PSD_CALIBRATION = 1.0 / (2.0 * std::numbers::pi);

enum class CutoffMode : uint8_t {
    HARD_ZERO = 0,  // S_P/f for f >= f_c, no pink power below f_c.
    PLATEAU = 1,    // S_P/f_c for f < f_c.
};

std::string_view cutoff_mode_name(CutoffMode m);
CutoffMode parse_cutoff_mode(std::string_view name);

struct FieldModel {
    double d2f_dB2 = 2.42e-3;         // Hz / mG^2, clock transition curvature.
    double df_dB_stretch = -2.36e6;   // Hz / G, stretch transition slope.
    double b0 = 146.0;                // G, field-independent point.
};

/// Clock-qubit frequency shift for a field offset delta_b (mG) from b0.
double detuning_from_field(double delta_b, const FieldModel &fm = {});

struct NoiseModel {
    double s_w = 0.0;              // Hz
    double s_p = 0.0;              // Hz^2
    double f_c = 1.0;              // Hz
    double static_detuning = 0.0;  // Hz
    double field_offset = 0.0;     // mG
    CutoffMode cutoff = CutoffMode::HARD_ZERO;
    FieldModel field{};

    void validate() const;
    bool is_zero() const {
        return s_w == 0 && s_p == 0 && total_static_detuning() == 0;
    }
    bool has_fluctuations() const {
        return s_w > 0 || s_p > 0;
    }
    double total_static_detuning() const {
        return static_detuning + detuning_from_field(field_offset, field);
    }
    /// S(f) in model units (Hz for the white part).
    double psd(double f) const;
    /// One-sided PSD of the frequency offset in Hz^2/Hz.
    double physical_psd(double f) const {
        return PSD_CALIBRATION * psd(f);
    }
};

/// Named presets: paper-fit, rb-clock, field-offset-10, field-offset-25,
/// field-offset-50, stretch-echo, stretch-ramsey.
NoiseModel noise_preset(std::string_view name);
std::vector<std::string> noise_preset_names();

/// Stretch-transition emulation. The field noise is 1/f with S_B(f) =
/// b_rms^2 / f (b_rms in G), giving S_P = S_B * slope^2 in physical units.
/// A static field offset (mG) becomes a static detuning through the slope.
NoiseModel stretch_noise_model(double b_rms_gauss, double static_offset_mg, double f_c = 1.0,
                               const FieldModel &fm = {});

/// Sampled frequency offsets. Sample i is the mean offset over
/// [i dt, (i+1) dt), so integrals over grid-aligned intervals are exact.
class NoiseTrace {
   public:
    NoiseTrace() = default;
    NoiseTrace(double dt, std::vector<double> samples, uint64_t seed);

    double dt() const {
        return dt_;
    }
    uint64_t seed() const {
        return seed_;
    }
    const std::vector<double> &samples() const {
        return samples_;
    }
    size_t size() const {
        return samples_.size();
    }
    double duration() const {
        return dt_ * static_cast<double>(samples_.size());
    }

    /// 2 pi times the integral of the offset over [t0, t1] in radians.
    /// Throws std::out_of_range unless 0 <= t0 <= t1 <= duration.
    double phase_between(double t0, double t1) const;
    /// Same over whole samples [i0, i1).
    double phase_between_samples(size_t i0, size_t i1) const;

    void write_csv(std::ostream &out) const;
    static NoiseTrace read_csv(std::istream &in);

   private:
    double integral_to(double t) const;

    double dt_ = 1.0;
    std::vector<double> samples_;
    std::vector<double> prefix_;
    uint64_t seed_ = 0;
};

/// Frequency-domain synthesizer for traces of a fixed length and sample
/// interval. Bin weights are computed once; each call draws fresh Gaussian
/// amplitudes. Safe to share between threads.
class TraceSampler {
   public:
    TraceSampler(const NoiseModel &model, size_t samples, double dt);
    ~TraceSampler();
    TraceSampler(const TraceSampler &) = delete;
    TraceSampler &operator=(const TraceSampler &) = delete;

    NoiseTrace sample(Rng &rng, uint64_t seed = 0) const;

    size_t samples() const {
        return n_;
    }
    size_t fft_size() const {
        return fft_n_;
    }
    double dt() const {
        return dt_;
    }
    /// Expected power in each rfft bin; sums to the sample variance.
    const std::vector<double> &bin_power() const {
        return bin_power_;
    }
    double sample_variance() const;

   private:
    NoiseModel model_;
    size_t n_;
    size_t fft_n_;
    double dt_;
    std::vector<double> bin_power_;
    void *plan_ = nullptr;
};

/// Power of 2 >= max(samples, 256).
size_t trace_fft_size(size_t samples);

NoiseTrace synthesize_trace(const NoiseModel &model, double duration, double dt, Rng &rng, uint64_t seed = 0);

struct PsdEstimate {
    std::vector<double> frequencies;  // Hz
    std::vector<double> psd;          // Hz^2/Hz, one-sided
};

/// Averaged one-sided periodogram (mean removed per trace), normalized so that
/// sum(psd) * df equals the mean sample variance.
PsdEstimate estimate_psd(std::span<const NoiseTrace> traces);

}  // namespace qmem

#endif
