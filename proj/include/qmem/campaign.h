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

#ifndef QMEM_CAMPAIGN_H
#define QMEM_CAMPAIGN_H

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qmem/records.h"

namespace qmem {

/// Invalid campaign configuration; the message carries file:line:column.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Campaign refused because its estimated cost exceeds the budget.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind : uint8_t {
    RAMSEY,
    SPIN_ECHO,
    SRB,
    IRB,
    IRB_DD,
    FIELD_SCAN,
};

std::string_view experiment_kind_name(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view name);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::IRB;
    std::string noise_name = "custom";
    NoiseModel noise{};
    GateSet gateset = GateSet::FOUR_GENERATOR;
    size_t k = 50;
    size_t shots = 100;
    SpamModel spam{};
    TimingModel timing{};
    std::vector<double> taus;
    std::vector<size_t> ms;  // empty selects the planner
    double target_infidelity = 0.1;
    std::vector<double> field_offsets;
    double dd_period = 0.1;
    bool dd_in_reference = true;
    double eps_inject = 0.0;
    DecayShape fit_shape = DecayShape::EXPONENTIAL;
    unsigned threads = 1;
    double max_sequence_duration = 3600.0;
};

struct CampaignConfig {
    std::string name;
    uint64_t master_seed = 0;
    std::string output_dir = "qmem-out";
    double budget = 6e11;  // about ten minutes of single-core simulation
    std::vector<ExperimentSpec> experiments;
};

CampaignConfig parse_campaign_config(const std::string &yaml_text, const std::string &origin = "<config>");
CampaignConfig load_campaign_config(const std::string &path);

/// One schedule point of an experiment after planning.
struct SchedulePoint {
    size_t index = 0;
    double tau = 0;
    double field_offset = 0;
    std::vector<size_t> ms;
    double predicted = 0;  // planner's memory or gate error
};

std::vector<SchedulePoint> plan_experiment(const ExperimentSpec &spec);

/// Cost in elementary units (noise samples plus simulated operations).
double estimate_cost(const ExperimentSpec &spec);
double estimate_cost(const CampaignConfig &config);

struct RunOptions {
    std::optional<uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> budget;
};

/// Runs every experiment, writes records, fits, point CSVs and the manifest.
/// Returns the manifest path.
std::string run_campaign(const CampaignConfig &config, const RunOptions &opts = {});

/// Simulates one experiment into a record file (no I/O).
RecordFile simulate_experiment(const ExperimentSpec &spec, uint64_t seed, size_t index);

enum class FitModel : uint8_t {
    RB,
    DECOHERENCE,
    EXPONENTIAL,
    GAUSSIAN,
};

std::string_view fit_model_name(FitModel m);
FitModel parse_fit_model(std::string_view name);

/// Standard analysis of a record file (model chosen from the experiment
/// kind) or a specific model.
Json analyze_records(const RecordFile &file, std::optional<FitModel> model = std::nullopt);

/// Reads records, fits, writes JSON to out_path (default: next to the
/// records) and returns a one-line human summary.
std::string fit_dataset(const std::string &records_path, FitModel model, const std::string &out_path = "");

/// Writes the CSV series for fig1b, fig2b or fig3c and returns their paths.
std::vector<std::string> emit_figure_data(const std::string &manifest_path, std::string_view which,
                                          const std::string &out_dir = "");

/// Checks that every file listed in a manifest exists with the recorded
/// checksum. Throws std::runtime_error describing the first mismatch.
Json verify_manifest(const std::string &manifest_path);

/// Quick invariant suite. Prints one line per check and returns the number
/// of failures.
int run_selftest(std::ostream &out);

}  // namespace qmem

#endif
