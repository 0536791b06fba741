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

#include "qmem/noise.h"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qmem {

namespace {

constexpr double PI = std::numbers::pi;

// FFTW planning is not thread safe; execution with new arrays is.
std::mutex &fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

double sinc2(double x) {
    if (std::abs(x) < 1e-8) {
        return 1.0;
    }
    double s = std::sin(x) / x;
    return s * s;
}

}  // namespace

std::string_view cutoff_mode_name(CutoffMode m) {
    return m == CutoffMode::HARD_ZERO ? "hard-zero" : "plateau";
}

CutoffMode parse_cutoff_mode(std::string_view name) {
    if (name == "hard-zero") {
        return CutoffMode::HARD_ZERO;
    }
    if (name == "plateau") {
        return CutoffMode::PLATEAU;
    }
    throw std::invalid_argument("unknown cutoff mode '" + std::string(name) + "'");
}

double detuning_from_field(double delta_b, const FieldModel &fm) {
    return 0.5 * fm.d2f_dB2 * delta_b * delta_b;
}

void NoiseModel::validate() const {
    if (!(s_w >= 0) || !(s_p >= 0)) {
        throw std::invalid_argument("noise levels s_w and s_p must be non-negative");
    }
    if (s_p > 0 && !(f_c > 0)) {
        throw std::invalid_argument("f_c must be positive when s_p > 0");
    }
    if (!std::isfinite(static_detuning) || !std::isfinite(field_offset)) {
        throw std::invalid_argument("static detuning and field offset must be finite");
    }
}

double NoiseModel::psd(double f) const {
    double v = s_w;
    if (s_p > 0) {
        if (f >= f_c) {
            v += s_p / f;
        } else if (cutoff == CutoffMode::PLATEAU) {
            v += s_p / f_c;
        }
    }
    return v;
}

NoiseModel noise_preset(std::string_view name) {
    NoiseModel paper{0.0016, 0.0014, 0.025};
    if (name == "paper-fit") {
        return paper;
    }
    if (name == "rb-clock") {
        return NoiseModel{0.0019, 0.0, 1.0};
    }
    for (double b : {10.0, 25.0, 50.0}) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "field-offset-%d", static_cast<int>(b));
        if (name == buf) {
            paper.field_offset = b;
            return paper;
        }
    }
    if (name == "stretch-echo") {
        return stretch_noise_model(47e-6, 0.0);
    }
    if (name == "stretch-ramsey") {
        return stretch_noise_model(47e-6, 0.27);
    }
    throw std::invalid_argument("unknown noise preset '" + std::string(name) + "'");
}

std::vector<std::string> noise_preset_names() {
    return {"paper-fit", "rb-clock", "field-offset-10", "field-offset-25", "field-offset-50", "stretch-echo",
            "stretch-ramsey"};
}

NoiseModel stretch_noise_model(double b_rms_gauss, double static_offset_mg, double f_c, const FieldModel &fm) {
    double a = b_rms_gauss * fm.df_dB_stretch;
    NoiseModel m;
    m.s_p = a * a / PSD_CALIBRATION;
    m.f_c = f_c;
    m.static_detuning = fm.df_dB_stretch * static_offset_mg * 1e-3;
    m.field = fm;
    return m;
}

NoiseTrace::NoiseTrace(double dt, std::vector<double> samples, uint64_t seed)
    : dt_(dt), samples_(std::move(samples)), seed_(seed) {
    if (!(dt > 0)) {
        throw std::invalid_argument("trace dt must be positive");
    }
    prefix_.resize(samples_.size() + 1);
    prefix_[0] = 0;
    for (size_t i = 0; i < samples_.size(); i++) {
        prefix_[i + 1] = prefix_[i] + samples_[i] * dt_;
    }
}

double NoiseTrace::integral_to(double t) const {
    double x = t / dt_;
    double r = std::round(x);
    if (std::abs(x - r) < 1e-9) {
        return prefix_[static_cast<size_t>(r)];
    }
    size_t i = static_cast<size_t>(x);
    return prefix_[i] + (t - static_cast<double>(i) * dt_) * samples_[i];
}

double NoiseTrace::phase_between(double t0, double t1) const {
    double end = duration() * (1 + 1e-12);
    if (!(t0 >= 0) || !(t1 >= t0) || !(t1 <= end)) {
        throw std::out_of_range("phase_between interval outside trace");
    }
    if (t0 == t1) {
        return 0.0;
    }
    return 2 * PI * (integral_to(std::min(t1, duration())) - integral_to(std::min(t0, duration())));
}

double NoiseTrace::phase_between_samples(size_t i0, size_t i1) const {
    if (i0 > i1 || i1 > samples_.size()) {
        throw std::out_of_range("phase_between_samples interval outside trace");
    }
    return 2 * PI * (prefix_[i1] - prefix_[i0]);
}

void NoiseTrace::write_csv(std::ostream &out) const {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# dt=%.17g seed=%llu\n", dt_, static_cast<unsigned long long>(seed_));
    out << buf << "t,delta_f\n";
    for (size_t i = 0; i < samples_.size(); i++) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", static_cast<double>(i) * dt_, samples_[i]);
        out << buf;
    }
}

NoiseTrace NoiseTrace::read_csv(std::istream &in) {
    std::string line;
    double dt = 0;
    unsigned long long seed = 0;
    if (!std::getline(in, line) || std::sscanf(line.c_str(), "# dt=%lg seed=%llu", &dt, &seed) != 2) {
        throw std::invalid_argument("trace CSV: missing '# dt=... seed=...' header");
    }
    if (!std::getline(in, line) || line != "t,delta_f") {
        throw std::invalid_argument("trace CSV: expected column header 't,delta_f'");
    }
    std::vector<double> samples;
    size_t lineno = 2;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) {
            continue;
        }
        double t, v;
        if (std::sscanf(line.c_str(), "%lg,%lg", &t, &v) != 2) {
            throw std::invalid_argument("trace CSV: malformed line " + std::to_string(lineno));
        }
        samples.push_back(v);
    }
    return NoiseTrace(dt, std::move(samples), seed);
}

size_t trace_fft_size(size_t samples) {
    size_t n = 256;
    while (n < samples) {
        n <<= 1;
    }
    return n;
}

namespace {

// Power of the box-averaged, aliased process in [a, b] (Hz), one-sided.
// The white part is exact by the sinc^2 sum rule; the pink part integrates the
// baseband term in ln f and adds the aliased images at the band centre.
double band_power(const NoiseModel &m, double dt, double a, double b) {
    double fs = 1.0 / dt;
    double p = PSD_CALIBRATION * m.s_w * (b - a);
    if (m.s_p <= 0) {
        return p;
    }
    double s = PSD_CALIBRATION * m.s_p;
    using boost::math::quadrature::gauss;
    double lo = std::max(a, m.f_c);
    if (b > lo) {
        auto f = [&](double x) {
            return sinc2(PI * std::exp(x) * dt);
        };
        p += s * gauss<double, 10>::integrate(f, std::log(lo), std::log(b));
    }
    if (m.cutoff == CutoffMode::PLATEAU && a < m.f_c) {
        double hi = std::min(b, m.f_c);
        auto f = [&](double x) {
            return sinc2(PI * x * dt);
        };
        p += s / m.f_c * gauss<double, 10>::integrate(f, a, hi);
    }
    constexpr int J = 32;
    double u = 0.5 * (a + b) / fs;
    double su = std::sin(PI * u);
    double acc = 0;
    for (int j = 1; j <= J; j++) {
        acc += 1.0 / std::pow(j + u, 3) + 1.0 / std::pow(j - u, 3);
    }
    acc += 1.0 / ((J + 0.5) * (J + 0.5));
    p += s * su * su / (PI * PI * fs) * acc * (b - a);
    return p;
}

}  // namespace

TraceSampler::TraceSampler(const NoiseModel &model, size_t samples, double dt)
    : model_(model), n_(samples), fft_n_(trace_fft_size(samples)), dt_(dt) {
    model_.validate();
    if (!(dt > 0) || samples == 0) {
        throw std::invalid_argument("TraceSampler needs dt > 0 and at least one sample");
    }
    double T = dt * static_cast<double>(fft_n_);
    size_t half = fft_n_ / 2;
    double fn = 0.5 / dt;
    bin_power_.assign(half + 1, 0.0);
    if (model_.has_fluctuations()) {
        for (size_t k = 0; k <= half; k++) {
            double a = k == 0 ? 0.0 : (static_cast<double>(k) - 0.5) / T;
            double b = k == half ? fn : (static_cast<double>(k) + 0.5) / T;
            bin_power_[k] = band_power(model_, dt, a, b);
        }
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        std::vector<std::complex<double>> in(half + 1);
        std::vector<double> out(fft_n_);
        plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(fft_n_), reinterpret_cast<fftw_complex *>(in.data()),
                                     out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
}

TraceSampler::~TraceSampler() {
    if (plan_ != nullptr) {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    }
}

double TraceSampler::sample_variance() const {
    double v = 0;
    for (double p : bin_power_) {
        v += p;
    }
    return v;
}

NoiseTrace TraceSampler::sample(Rng &rng, uint64_t seed) const {
    double offset = model_.total_static_detuning();
    if (plan_ == nullptr) {
        return NoiseTrace(dt_, std::vector<double>(n_, offset), seed);
    }
    size_t half = fft_n_ / 2;
    std::vector<double> z(2 * (half + 1));
    fill_standard_normal(rng, z);
    std::vector<std::complex<double>> spec(half + 1);
    spec[0] = std::sqrt(bin_power_[0]) * z[0];
    for (size_t k = 1; k < half; k++) {
        double s = 0.5 * std::sqrt(bin_power_[k]);
        spec[k] = {s * z[2 * k], s * z[2 * k + 1]};
    }
    spec[half] = std::sqrt(bin_power_[half]) * z[2 * half];
    std::vector<double> out(fft_n_);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_), reinterpret_cast<fftw_complex *>(spec.data()), out.data());
    out.resize(n_);
    if (offset != 0) {
        for (double &v : out) {
            v += offset;
        }
    }
    return NoiseTrace(dt_, std::move(out), seed);
}

NoiseTrace synthesize_trace(const NoiseModel &model, double duration, double dt, Rng &rng, uint64_t seed) {
    if (!(dt > 0) || !(duration > 0)) {
        throw std::invalid_argument("synthesize_trace needs positive dt and duration");
    }
    if (duration < dt * (1 - 1e-9)) {
        throw std::invalid_argument("synthesize_trace needs duration >= dt");
    }
    size_t n = static_cast<size_t>(std::ceil(duration / dt - 1e-9));
    TraceSampler sampler(model, n, dt);
    return sampler.sample(rng, seed);
}

PsdEstimate estimate_psd(std::span<const NoiseTrace> traces) {
    if (traces.empty()) {
        throw std::invalid_argument("estimate_psd needs at least one trace");
    }
    size_t n = traces[0].size();
    double dt = traces[0].dt();
    if (n < 2) {
        throw std::invalid_argument("estimate_psd needs traces of at least 2 samples");
    }
    for (const auto &t : traces) {
        if (t.size() != n || t.dt() != dt) {
            throw std::invalid_argument("estimate_psd needs traces of equal length and dt");
        }
    }
    size_t half = n / 2;
    std::vector<double> in(n);
    std::vector<std::complex<double>> out(half + 1);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex *>(out.data()),
                                    FFTW_ESTIMATE);
    }
    PsdEstimate est;
    est.frequencies.resize(half + 1);
    est.psd.assign(half + 1, 0.0);
    double T = dt * static_cast<double>(n);
    for (size_t k = 0; k <= half; k++) {
        est.frequencies[k] = static_cast<double>(k) / T;
    }
    for (const auto &t : traces) {
        double mean = 0;
        for (double v : t.samples()) {
            mean += v;
        }
        mean /= static_cast<double>(n);
        for (size_t i = 0; i < n; i++) {
            in[i] = t.samples()[i] - mean;
        }
        fftw_execute(plan);
        for (size_t k = 0; k <= half; k++) {
            bool edge = k == 0 || (n % 2 == 0 && k == half);
            double w = edge ? 1.0 : 2.0;
            est.psd[k] += w * std::norm(out[k]) * dt / static_cast<double>(n);
        }
    }
    {
        std::lock_guard<std::mutex> lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    for (double &p : est.psd) {
        p /= static_cast<double>(traces.size());
    }
    return est;
}

}  // namespace qmem
