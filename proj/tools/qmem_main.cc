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

// qmem: command-line front end for memory-error campaigns.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qmem/campaign.h"

namespace {

int cmd_run(const std::string &config_path, const qmem::RunOptions &opts) {
    auto config = qmem::load_campaign_config(config_path);
    std::string manifest = qmem::run_campaign(config, opts);
    auto m = qmem::verify_manifest(manifest);
    std::cout << "campaign " << config.name << ": " << m["experiments"].size() << " experiments, "
              << m["files"].size() << " files, manifest " << manifest << "\n";
    return 0;
}

int cmd_presets() {
    for (const auto &name : qmem::noise_preset_names()) {
        auto n = qmem::noise_preset(name);
        std::cout << name << "\ts_w=" << n.s_w << " s_p=" << n.s_p << " f_c=" << n.f_c
                  << " static=" << n.total_static_detuning() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"qmem: qubit memory error under 1/f and white frequency noise"};
    app.set_version_flag("--version", std::string(QMEM_VERSION));
    app.require_subcommand(1);

    std::optional<uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> budget;

    auto *run = app.add_subcommand("run", "Run a campaign config");
    std::string config_path;
    run->add_option("config", config_path, "Campaign YAML file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override master_seed");
    run->add_option("--out", out, "Output directory (overrides QMEM_OUT and output_dir)");
    run->add_option("--budget", budget, "Cost budget in units");

    auto *fit = app.add_subcommand("fit", "Fit a records file");
    std::string records_path, model_name = "rb", fit_out;
    fit->add_option("records", records_path, "JSON-lines records file")->required()->check(CLI::ExistingFile);
    fit->add_option("--model", model_name, "rb, decoherence, exponential or gaussian")
        ->check(CLI::IsMember({"rb", "decoherence", "exponential", "gaussian"}));
    fit->add_option("--out", fit_out, "Fit JSON path");

    auto *figure = app.add_subcommand("figure", "Emit plot-ready CSV data");
    std::string manifest_path, which, fig_out;
    figure->add_option("manifest", manifest_path, "manifest.json")->required()->check(CLI::ExistingFile);
    figure->add_option("--which", which, "fig1b, fig2b or fig3c")
        ->required()
        ->check(CLI::IsMember({"fig1b", "fig2b", "fig3c"}));
    figure->add_option("--out", fig_out, "Output directory");

    auto *presets = app.add_subcommand("presets", "Noise presets");
    presets->add_subcommand("list", "List noise presets")->required(false);

    auto *selftest = app.add_subcommand("selftest", "Run the invariant suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(config_path, {seed, out, budget});
        }
        if (fit->parsed()) {
            std::cout << qmem::fit_dataset(records_path, qmem::parse_fit_model(model_name), fit_out) << "\n";
            return 0;
        }
        if (figure->parsed()) {
            auto files = qmem::emit_figure_data(manifest_path, which, fig_out);
            for (const auto &f : files) {
                std::cerr << "[qmem] wrote " << f << "\n";
            }
            std::cout << which << ": " << files.size() << " CSV files\n";
            return 0;
        }
        if (presets->parsed()) {
            return cmd_presets();
        }
        if (selftest->parsed()) {
            int failures = qmem::run_selftest(std::cerr);
            std::cout << "selftest: " << (failures == 0 ? "ok" : std::to_string(failures) + " failed") << "\n";
            return failures == 0 ? 0 : 1;
        }
    } catch (const qmem::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const qmem::SchemaError &e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const qmem::BudgetError &e) {
        std::cerr << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
