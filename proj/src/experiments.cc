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

#include "qmem/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace qmem {

namespace {

constexpr double PI = std::numbers::pi;
constexpr size_t SHOT_BLOCK = 256;

std::string_view kind_names[] = {"srb", "irb", "reference", "spam"};

}  // namespace

std::string_view gate_timing_name(GateTiming t) {
    switch (t) {
        case GateTiming::INSTANTANEOUS:
            return "instantaneous";
        case GateTiming::GAPS:
            return "gaps";
        case GateTiming::FINITE_DURATION:
            return "finite-duration";
    }
    return "?";
}

GateTiming parse_gate_timing(std::string_view name) {
    for (auto t : {GateTiming::INSTANTANEOUS, GateTiming::GAPS, GateTiming::FINITE_DURATION}) {
        if (name == gate_timing_name(t)) {
            return t;
        }
    }
    throw std::invalid_argument("unknown gate timing '" + std::string(name) + "'");
}

void TimingModel::validate() const {
    if (!(pi2_duration >= 0) || !(pulse_spacing >= 0)) {
        throw std::invalid_argument("pulse duration and spacing must be non-negative");
    }
    if (mode == GateTiming::FINITE_DURATION && slices < 8) {
        throw std::invalid_argument("finite-duration mode needs at least 8 slices per pulse");
    }
    if (!(amplitude_scale > 0)) {
        throw std::invalid_argument("amplitude_scale must be positive");
    }
}

double TimingModel::pulse_slot(double angle) const {
    return pi2_duration * std::abs(angle) / (PI / 2) + pulse_spacing;
}

std::string_view record_kind_name(RecordKind k) {
    return kind_names[static_cast<size_t>(k)];
}

RecordKind parse_record_kind(std::string_view name) {
    for (size_t i = 0; i < 4; i++) {
        if (name == kind_names[i]) {
            return static_cast<RecordKind>(i);
        }
    }
    throw std::invalid_argument("unknown record kind '" + std::string(name) + "'");
}

size_t dd_pulse_count(double tau, std::optional<double> dd_period) {
    if (!dd_period || !(*dd_period > 0) || tau < 2 * *dd_period * (1 - 1e-12)) {
        return 0;
    }
    return 2 * static_cast<size_t>(std::floor(tau / (2 * *dd_period) + 1e-9));
}

std::vector<double> dd_pulse_times(double tau, size_t n) {
    std::vector<double> t(n);
    for (size_t j = 0; j < n; j++) {
        t[j] = (static_cast<double>(j) + 0.5) * tau / static_cast<double>(n);
    }
    return t;
}

namespace {

enum class OpType : uint8_t {
    UNITARY,
    FREE,
};

struct Op {
    OpType type;
    bool inject;
    uint32_t id;
    size_t i0, i1;
    double t0, t1;
};

// Matrices referenced by programs: compiled Cliffords, physical pulses, and
// pulse slices.
class GateLibrary {
   public:
    GateLibrary(GateSet gs, const TimingModel &timing) : gateset_(gs), timing_(timing) {
        for (uint8_t c = 0; c < CliffordGroup::SIZE; c++) {
            Mat2 u = Mat2::identity();
            double slots = 0;
            auto pulses = clifford_pulses(c, gs, timing.pi2_duration, timing.amplitude_scale);
            for (const auto &p : pulses) {
                u = p.unitary() * u;
                slots += timing.pulse_slot(p.angle);
            }
            compiled_[c] = add(u);
            clifford_slots_[c] = slots;
            clifford_pulses_[c] = std::move(pulses);
        }
    }

    uint32_t add(const Mat2 &u) {
        mats_.push_back(u);
        return static_cast<uint32_t>(mats_.size() - 1);
    }

    // Id of the full pulse and of one of `slices` equal slices.
    std::pair<uint32_t, uint32_t> pulse_ids(const Pulse &p) {
        auto key = std::make_pair(p.effective_angle(), p.axis_phase);
        auto it = pulse_cache_.find(key);
        if (it != pulse_cache_.end()) {
            return it->second;
        }
        uint32_t full = add(p.unitary());
        uint32_t slice = add(rotation_unitary(p.effective_angle() / timing_.slices, p.axis_phase));
        pulse_cache_[key] = {full, slice};
        return {full, slice};
    }

    const Mat2 &operator[](uint32_t id) const {
        return mats_[id];
    }
    uint32_t compiled(uint8_t c) const {
        return compiled_[c];
    }
    double clifford_slots(uint8_t c) const {
        return clifford_slots_[c];
    }
    const std::vector<Pulse> &pulses(uint8_t c) const {
        return clifford_pulses_[c];
    }
    const TimingModel &timing() const {
        return timing_;
    }

   private:
    GateSet gateset_;
    TimingModel timing_;
    std::vector<Mat2> mats_;
    std::array<uint32_t, CliffordGroup::SIZE> compiled_;
    std::array<double, CliffordGroup::SIZE> clifford_slots_;
    std::array<std::vector<Pulse>, CliffordGroup::SIZE> clifford_pulses_;
    std::map<std::pair<double, double>, std::pair<uint32_t, uint32_t>> pulse_cache_;
};

struct Program {
    std::vector<Op> ops;
    bool aligned = true;
    double dt = 1.0;
    size_t trace_samples = 0;
    double wall_pulses = 0;
    double wall_delays = 0;
    size_t dd_pulses = 0;

    double wall_duration() const {
        return wall_pulses + wall_delays;
    }
};

class ProgramBuilder {
   public:
    // With `aligned`, every free interval must be a whole number of dt.
    ProgramBuilder(GateLibrary &lib, bool aligned, double dt, bool inject) : lib_(lib), inject_(inject) {
        prog_.aligned = aligned;
        prog_.dt = dt;
    }

    void clifford(uint8_t c) {
        const auto &timing = lib_.timing();
        if (timing.mode == GateTiming::INSTANTANEOUS && !inject_) {
            prog_.ops.push_back(Op{OpType::UNITARY, false, lib_.compiled(c), 0, 0, 0, 0});
            prog_.wall_pulses += lib_.clifford_slots(c);
            return;
        }
        for (const auto &p : lib_.pulses(c)) {
            pulse(p, true);
        }
    }

    void pulse(const Pulse &p, bool counts_wall) {
        const auto &timing = lib_.timing();
        auto [full, slice] = lib_.pulse_ids(p);
        switch (timing.mode) {
            case GateTiming::INSTANTANEOUS:
                unitary(full, true);
                break;
            case GateTiming::GAPS:
                unitary(full, true);
                free(timing.pulse_slot(p.angle));
                break;
            case GateTiming::FINITE_DURATION: {
                double d = p.duration / timing.slices;
                for (int s = 0; s < timing.slices; s++) {
                    unitary(slice, s + 1 == timing.slices);
                    free(d);
                }
                free(timing.pulse_spacing);
                break;
            }
        }
        if (counts_wall) {
            prog_.wall_pulses += timing.pulse_slot(p.angle);
        }
    }

    // An idle delay with n_dd X_pi pulses at (j + 1/2) tau / n_dd.
    void delay(double tau, size_t n_dd) {
        prog_.wall_delays += tau;
        if (n_dd == 0) {
            free(tau);
            return;
        }
        const auto &timing = lib_.timing();
        Pulse x_pi{PI, 0.0, 2 * timing.pi2_duration, timing.amplitude_scale};
        uint32_t id = lib_.pulse_ids(x_pi).first;
        double step = tau / static_cast<double>(n_dd);
        free(0.5 * step);
        for (size_t j = 0; j < n_dd; j++) {
            unitary(id, true);
            free(j + 1 == n_dd ? 0.5 * step : step);
        }
        prog_.dd_pulses += n_dd;
    }

    void free(double len) {
        if (len <= 0) {
            return;
        }
        Op op{OpType::FREE, false, 0, 0, 0, clock_, clock_ + len};
        if (prog_.aligned) {
            double q = len / prog_.dt;
            double r = std::round(q);
            if (std::abs(q - r) > 1e-6 * std::max(1.0, r)) {
                throw std::logic_error("free interval is not aligned with the noise grid");
            }
            op.i0 = clock_samples_;
            op.i1 = clock_samples_ + static_cast<size_t>(r);
            clock_samples_ = op.i1;
        }
        clock_ += len;
        prog_.ops.push_back(op);
    }

    // Drops free evolution after the last rotation (it cannot change a Z
    // measurement) and sizes the noise trace.
    Program finish() {
        while (!prog_.ops.empty() && prog_.ops.back().type == OpType::FREE) {
            prog_.ops.pop_back();
        }
        prog_.trace_samples = 0;
        for (auto it = prog_.ops.rbegin(); it != prog_.ops.rend(); ++it) {
            if (it->type == OpType::FREE) {
                prog_.trace_samples =
                    prog_.aligned ? it->i1 : static_cast<size_t>(std::ceil(it->t1 / prog_.dt)) + 1;
                break;
            }
        }
        return std::move(prog_);
    }

   private:
    void unitary(uint32_t id, bool inject) {
        prog_.ops.push_back(Op{OpType::UNITARY, inject && inject_, id, 0, 0, 0, 0});
    }

    GateLibrary &lib_;
    bool inject_;
    Program prog_;
    double clock_ = 0;
    size_t clock_samples_ = 0;
};

// Noise-grid step for a program whose delays are multiples of `unit`.
double noise_dt(const TimingModel &timing, double unit, double total) {
    if (timing.mode == GateTiming::INSTANTANEOUS) {
        return unit;
    }
    double dt = unit > 0 ? std::min(unit / 20, 1e-3) : std::max(timing.pi2_duration, 1e-7);
    return std::max(dt, total / static_cast<double>(1 << 24));
}

class SamplerCache {
   public:
    explicit SamplerCache(const NoiseModel &model) : model_(model) {
    }

    const TraceSampler *get(size_t n, double dt) {
        if (n == 0 || (!model_.has_fluctuations() && model_.total_static_detuning() == 0)) {
            return nullptr;
        }
        std::lock_guard<std::mutex> lock(mu_);
        auto &slot = cache_[{n, dt}];
        if (!slot) {
            slot = std::make_unique<TraceSampler>(model_, n, dt);
        }
        return slot.get();
    }

   private:
    NoiseModel model_;
    std::mutex mu_;
    std::map<std::pair<size_t, double>, std::unique_ptr<TraceSampler>> cache_;
};

const std::array<Mat2, 3> &injected_paulis() {
    static const std::array<Mat2, 3> p{kPauliX, kPauliY, kPauliZ};
    return p;
}

struct ShotRngs {
    Rng noise, inject, measure;
};

ShotRngs block_rngs(uint64_t base, uint64_t block) {
    return {
        make_rng(derive_seed(base, {block, static_cast<uint64_t>(Stream::NOISE)})),
        make_rng(derive_seed(base, {block, static_cast<uint64_t>(Stream::INJECTION)})),
        make_rng(derive_seed(base, {block, static_cast<uint64_t>(Stream::MEASUREMENT)})),
    };
}

Outcome run_shot(const Program &prog, const GateLibrary &lib, const TraceSampler *sampler, double p_pauli,
                 const SpamModel &spam, ShotRngs &rngs) {
    NoiseTrace trace;
    if (sampler != nullptr) {
        trace = sampler->sample(rngs.noise);
    }
    QubitState s = QubitState::up();
    for (const auto &op : prog.ops) {
        if (op.type == OpType::UNITARY) {
            s = lib[op.id] * s;
            if (op.inject && uniform01(rngs.inject) < p_pauli) {
                s = injected_paulis()[uniform_index(rngs.inject, 3)] * s;
            }
        } else if (sampler != nullptr) {
            double phi = prog.aligned ? trace.phase_between_samples(op.i0, op.i1) : trace.phase_between(op.t0, op.t1);
            s = apply_z_phase(s, phi);
        }
    }
    return measure(s, spam, rngs.measure);
}

}  // namespace

double RamseyConfig::calibrated_phi0() const {
    if (std::isnan(phi0)) {
        return echo ? 0.0 : PI;
    }
    return phi0;
}

void RamseyConfig::validate() const {
    if (!(tau_r >= 0)) {
        throw std::invalid_argument("Ramsey delay must be non-negative");
    }
    if (shots < 1) {
        throw std::invalid_argument("Ramsey needs at least one shot");
    }
    spam.validate();
    noise.validate();
    timing.validate();
}

RamseyResult run_ramsey(const RamseyConfig &config) {
    config.validate();
    const auto &timing = config.timing;
    GateLibrary lib(GateSet::FOUR_GENERATOR, timing);
    double unit = config.echo ? config.tau_r / 2 : config.tau_r;
    double dt = noise_dt(timing, unit, config.tau_r + 10 * timing.pulse_slot(PI));
    bool aligned = timing.mode == GateTiming::INSTANTANEOUS;
    double phi0 = config.calibrated_phi0();
    Pulse open{PI / 2, 0.0, timing.pi2_duration, timing.amplitude_scale};
    Pulse x_pi{PI, 0.0, 2 * timing.pi2_duration, timing.amplitude_scale};

    auto build = [&](int which) {
        ProgramBuilder b(lib, aligned && unit > 0, unit > 0 ? dt : 1.0, false);
        if (which >= 2) {
            if (which == 3) {
                b.pulse(x_pi, true);
            }
            b.delay(config.tau_r, 0);
            return b.finish();
        }
        b.pulse(open, true);
        if (config.echo) {
            b.delay(config.tau_r / 2, 0);
            b.pulse(x_pi, true);
            b.delay(config.tau_r / 2, 0);
        } else {
            b.delay(config.tau_r, 0);
        }
        b.pulse(Pulse{PI / 2, which == 0 ? phi0 : phi0 + PI, timing.pi2_duration, timing.amplitude_scale}, true);
        return b.finish();
    };
    std::array<Program, 4> progs{build(0), build(1), build(2), build(3)};
    SamplerCache cache(config.noise);
    std::array<const TraceSampler *, 4> samplers;
    for (size_t i = 0; i < 4; i++) {
        samplers[i] = cache.get(progs[i].trace_samples, progs[i].dt);
    }

    std::array<size_t, 4> ups{0, 0, 0, 0};
    size_t blocks = (config.shots + SHOT_BLOCK - 1) / SHOT_BLOCK;
    for (size_t blk = 0; blk < blocks; blk++) {
        ShotRngs rngs = block_rngs(config.seed, blk);
        size_t end = std::min(config.shots, (blk + 1) * SHOT_BLOCK);
        for (size_t shot = blk * SHOT_BLOCK; shot < end; shot++) {
            for (size_t i = 0; i < 4; i++) {
                ups[i] += run_shot(progs[i], lib, samplers[i], 0.0, config.spam, rngs) == Outcome::UP;
            }
        }
    }

    double n = static_cast<double>(config.shots);
    RamseyResult r;
    r.tau_r = config.tau_r;
    r.shots = config.shots;
    r.p_up_max = ups[0] / n;
    r.p_up_min = ups[1] / n;
    r.eps_up_measured = 1.0 - ups[2] / n;
    r.eps_down_measured = ups[3] / n;
    r.spam_measured = 0.5 * (r.eps_up_measured + r.eps_down_measured);
    r.contrast = r.p_up_max - r.p_up_min;
    r.contrast_loss_raw = 1.0 - r.contrast;
    double scale = 1.0 - r.eps_up_measured - r.eps_down_measured;
    if (!(scale > 0)) {
        scale = 1.0;
    }
    r.contrast_loss = 1.0 - r.contrast / scale;
    double var = (r.p_up_max * (1 - r.p_up_max) + r.p_up_min * (1 - r.p_up_min)) / n;
    r.sigma = std::sqrt(var) / scale;
    return r;
}

RamseyResult run_spin_echo(RamseyConfig config) {
    config.echo = true;
    return run_ramsey(config);
}

bool RbConfig::dd_active() const {
    return dd_pulse_count(tau, dd_period) > 0;
}

void RbConfig::validate() const {
    if (k < 2) {
        throw std::invalid_argument("RB needs k >= 2 randomizations");
    }
    if (m < 1) {
        throw std::invalid_argument("RB needs m >= 1");
    }
    if (shots < 1) {
        throw std::invalid_argument("RB needs at least one shot per sequence");
    }
    if (!(tau >= 0)) {
        throw std::invalid_argument("interleaved delay must be non-negative");
    }
    if (dd_period && !(*dd_period > 0)) {
        throw std::invalid_argument("dd_period must be positive");
    }
    if (!(eps_inject >= 0 && eps_inject <= 2.0 / 3.0)) {
        throw std::invalid_argument("eps_inject must lie in [0, 2/3]");
    }
    if (static_cast<double>(m) * tau > max_sequence_duration) {
        throw std::overflow_error("m * tau exceeds max_sequence_duration");
    }
    spam.validate();
    noise.validate();
    timing.validate();
}

RbCampaignResult run_rb_campaign(const RbConfig &config) {
    config.validate();
    const auto &group = CliffordGroup::instance();
    const auto &timing = config.timing;
    size_t n_dd = dd_pulse_count(config.tau, config.dd_period);
    bool aligned = timing.mode == GateTiming::INSTANTANEOUS;
    double unit = n_dd > 0 ? config.tau / static_cast<double>(2 * n_dd) : config.tau;
    double approx_total = static_cast<double>(config.m) * (config.tau + 4 * timing.pulse_slot(PI));
    double dt = noise_dt(timing, unit, approx_total);
    bool interleaved = config.tau > 0;
    bool inject = config.eps_inject > 0;
    double p_pauli = 1.5 * config.eps_inject;

    SamplerCache cache(config.noise);
    RbCampaignResult out;
    size_t k = config.k;
    out.main.resize(k);
    if (interleaved) {
        out.reference.resize(k);
    }
    if (config.spam_controls) {
        out.spam.resize(k);
    }

    auto run_sequence = [&](size_t seq) {
        GateLibrary lib(config.gateset, timing);
        uint64_t m64 = config.m;
        Rng rng_seq = make_rng(derive_seed(config.master_seed, {m64, seq, static_cast<uint64_t>(Stream::SEQUENCE)}));
        Rng rng_rec = make_rng(derive_seed(config.master_seed, {m64, seq, static_cast<uint64_t>(Stream::RECOVERY)}));
        std::vector<uint8_t> cliffords(config.m);
        uint8_t net = CliffordGroup::IDENTITY;
        for (auto &c : cliffords) {
            c = static_cast<uint8_t>(uniform_index(rng_seq, CliffordGroup::SIZE));
            net = group.compose(net, c);
        }
        BasisState target = bernoulli(rng_seq, 0.5) ? BasisState::DOWN : BasisState::UP;
        const auto &rec = recovery_gate(group[net], target, rng_rec);
        uint64_t seq_seed = derive_seed(config.master_seed, {m64, seq});

        auto execute = [&](const Program &prog, RecordKind kind) {
            SequenceRecord r;
            r.kind = kind;
            r.seed = seq_seed;
            r.sequence = seq;
            r.m = config.m;
            r.tau = kind == RecordKind::SRB ? 0.0 : config.tau;
            r.target = target;
            r.duration = prog.wall_duration();
            r.dd_pulses = prog.dd_pulses;
            r.outcomes.resize(config.shots);
            const TraceSampler *sampler = cache.get(prog.trace_samples, prog.dt);
            uint64_t base = derive_seed(seq_seed, {static_cast<uint64_t>(kind)});
            Outcome want = target == BasisState::UP ? Outcome::UP : Outcome::DOWN;
            size_t blocks = (config.shots + SHOT_BLOCK - 1) / SHOT_BLOCK;
            for (size_t blk = 0; blk < blocks; blk++) {
                ShotRngs rngs = block_rngs(base, blk);
                size_t end = std::min(config.shots, (blk + 1) * SHOT_BLOCK);
                for (size_t shot = blk * SHOT_BLOCK; shot < end; shot++) {
                    Outcome o = run_shot(prog, lib, sampler, p_pauli, config.spam, rngs);
                    r.outcomes[shot] = o == Outcome::UP ? '1' : '0';
                    r.successes += o == want;
                }
            }
            r.fidelity = static_cast<double>(r.successes) / static_cast<double>(config.shots);
            return r;
        };

        ProgramBuilder main(lib, aligned, dt, inject);
        for (uint8_t c : cliffords) {
            main.clifford(c);
            if (interleaved) {
                main.delay(config.tau, n_dd);
            }
        }
        main.clifford(rec.index);
        Program main_prog = main.finish();
        double wall = main_prog.wall_duration();
        out.main[seq] = execute(main_prog, interleaved ? RecordKind::IRB : RecordKind::SRB);

        if (interleaved) {
            ProgramBuilder ref(lib, aligned, dt, inject);
            for (uint8_t c : cliffords) {
                ref.clifford(c);
            }
            ref.clifford(rec.index);
            for (size_t i = 0; i < config.m; i++) {
                ref.delay(config.tau, config.dd_in_reference ? n_dd : 0);
            }
            Program ref_prog = ref.finish();
            out.reference[seq] = execute(ref_prog, RecordKind::REFERENCE);
            out.reference[seq].duration = ref_prog.wall_duration();
        }

        if (config.spam_controls) {
            ProgramBuilder ctl(lib, aligned, dt, inject);
            if (target == BasisState::DOWN) {
                ctl.pulse(Pulse{PI, 0.0, 2 * timing.pi2_duration, timing.amplitude_scale}, false);
            }
            Program ctl_prog = ctl.finish();
            out.spam[seq] = execute(ctl_prog, RecordKind::SPAM_CONTROL);
            out.spam[seq].duration = wall;
            out.spam[seq].tau = 0.0;
        }
    };

    unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(k)));
    if (threads == 1) {
        for (size_t seq = 0; seq < k; seq++) {
            run_sequence(seq);
        }
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr err;
        std::mutex err_mu;
        for (unsigned t = 0; t < threads; t++) {
            pool.emplace_back([&] {
                try {
                    for (size_t seq = next++; seq < k; seq = next++) {
                        run_sequence(seq);
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    err = std::current_exception();
                }
            });
        }
        for (auto &th : pool) {
            th.join();
        }
        if (err) {
            std::rethrow_exception(err);
        }
    }
    return out;
}

}  // namespace qmem
