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

#ifndef QMEM_EXPERIMENTS_H
#define QMEM_EXPERIMENTS_H

#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmem/clifford.h"
#include "qmem/noise.h"
#include "qmem/sim_core.h"

namespace qmem {

enum class GateTiming : uint8_t {
    /// Pulses take no time on the noise clock; only delays dephase.
    INSTANTANEOUS = 0,
    /// Pulses are instantaneous but each is followed by (duration + spacing)
    /// of free evolution.
    GAPS = 1,
    /// Each pulse is split into slices interleaved with free evolution, then
    /// followed by the spacing gap.
    FINITE_DURATION = 2,
};

std::string_view gate_timing_name(GateTiming t);
GateTiming parse_gate_timing(std::string_view name);

struct TimingModel {
    GateTiming mode = GateTiming::INSTANTANEOUS;
    double pi2_duration = 10e-6;   // s, a pi pulse takes twice this.
    double pulse_spacing = 12e-6;  // s, dead time after every pulse.
    int slices = 8;                // FINITE_DURATION slices per pulse.
    double amplitude_scale = 1.0;

    void validate() const;
    double pulse_slot(double angle) const;
};

struct RamseyConfig {
    double tau_r = 0.0;
    /// Phase of the closing pulse at the fringe maximum. NaN selects the
    /// calibrated value (pi without echo, 0 with echo).
    double phi0 = std::numeric_limits<double>::quiet_NaN();
    size_t shots = 1000;
    SpamModel spam{};
    NoiseModel noise{};
    bool echo = false;
    uint64_t seed = 0;
    TimingModel timing{};

    double calibrated_phi0() const;
    void validate() const;
};

struct RamseyResult {
    double tau_r = 0;
    size_t shots = 0;
    double p_up_max = 0;  // P(up) at phi0
    double p_up_min = 0;  // P(up) at phi0 + pi
    double contrast = 0;
    double contrast_loss_raw = 0;  // 1 - contrast
    double contrast_loss = 0;      // SPAM corrected
    double sigma = 0;              // binomial standard error of contrast_loss
    double eps_up_measured = 0;
    double eps_down_measured = 0;
    double spam_measured = 0;
};

/// Two-point Ramsey with interleaved SPAM controls. Each shot runs the fringe
/// maximum, the fringe minimum, a delay-only control and a pi+delay control,
/// every one with a fresh noise trace.
RamseyResult run_ramsey(const RamseyConfig &config);

/// Ramsey with an X_pi pulse at tau_r/2.
RamseyResult run_spin_echo(RamseyConfig config);

enum class RecordKind : uint8_t {
    SRB = 0,
    IRB = 1,
    REFERENCE = 2,
    SPAM_CONTROL = 3,
};

std::string_view record_kind_name(RecordKind k);
RecordKind parse_record_kind(std::string_view name);

struct RbConfig {
    size_t m = 1;
    size_t k = 50;
    double tau = 0.0;
    GateSet gateset = GateSet::FOUR_GENERATOR;
    std::optional<double> dd_period;
    bool dd_in_reference = true;
    double eps_inject = 0.0;
    size_t shots = 100;
    SpamModel spam{};
    NoiseModel noise{};
    uint64_t master_seed = 0;
    TimingModel timing{};
    double max_sequence_duration = 3600.0;  // s
    unsigned threads = 1;
    bool spam_controls = true;

    bool dd_active() const;
    void validate() const;
};

struct SequenceRecord {
    RecordKind kind = RecordKind::SRB;
    uint64_t seed = 0;
    size_t sequence = 0;
    size_t m = 0;
    double tau = 0;
    BasisState target = BasisState::UP;
    std::string outcomes;  // one character per shot, '1' = measured up
    size_t successes = 0;  // shots that ended in the target state
    double fidelity = 0;
    double duration = 0;  // wall-model prepare-to-measure time, s
    size_t dd_pulses = 0;

    size_t shots() const {
        return outcomes.size();
    }
};

struct RbCampaignResult {
    std::vector<SequenceRecord> main;       // SRB or IRB sequences
    std::vector<SequenceRecord> reference;  // time-matched references (tau > 0)
    std::vector<SequenceRecord> spam;       // SPAM controls
};

/// Runs k random sequences of length m. With tau = 0 the records are SRB;
/// otherwise IRB with a delay after every Clifford and a paired reference
/// that has the same Cliffords followed by m delays after the recovery gate.
RbCampaignResult run_rb_campaign(const RbConfig &config);

/// Number of X_pi pulses inserted in one delay (even, possibly 0).
size_t dd_pulse_count(double tau, std::optional<double> dd_period);

/// Offsets of the DD pulses inside a delay: (j + 1/2) tau / n.
std::vector<double> dd_pulse_times(double tau, size_t n);

}  // namespace qmem

#endif
