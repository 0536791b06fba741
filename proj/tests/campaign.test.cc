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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qmem/campaign.h"

namespace qmem {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string &name) {
    fs::path p = fs::path(testing::TempDir()) / ("qmem-campaign-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string error_of(const std::string &yaml) {
    try {
        parse_campaign_config(yaml, "cfg.yaml");
    } catch (const ConfigError &e) {
        return e.what();
    }
    return "";
}

const char *SMALL = R"(name: small
master_seed: 17
defaults:
  noise: paper-fit
  k: 4
  shots: 10
experiments:
  - kind: irb
    taus: [1ms, 100ms]
    m: [2, 4, 8]
  - kind: ramsey
    taus: [10ms, 1s]
    shots: 200
)";

TEST(Config, ParsesDurationsAndDefaults) {
    auto c = parse_campaign_config(SMALL);
    EXPECT_EQ(c.name, "small");
    EXPECT_EQ(c.master_seed, 17u);
    ASSERT_EQ(c.experiments.size(), 2u);
    const auto &irb = c.experiments[0];
    EXPECT_EQ(irb.kind, ExperimentKind::IRB);
    EXPECT_EQ(irb.k, 4u);
    EXPECT_DOUBLE_EQ(irb.taus[0], 1e-3);
    EXPECT_DOUBLE_EQ(irb.taus[1], 0.1);
    EXPECT_EQ(irb.ms, (std::vector<size_t>{2, 4, 8}));
    EXPECT_DOUBLE_EQ(irb.noise.s_w, 0.0016);
    EXPECT_EQ(c.experiments[1].shots, 200u);
}

TEST(Config, SingleExperimentShorthand) {
    auto c = parse_campaign_config("name: one\nmaster_seed: 3\nkind: spin-echo\ntaus: [2ms]\n");
    ASSERT_EQ(c.experiments.size(), 1u);
    EXPECT_EQ(c.experiments[0].kind, ExperimentKind::SPIN_ECHO);
}

TEST(Config, ErrorsNameLineAndField) {
    std::string e = error_of("name: x\nmaster_seed: 1\nexperiments:\n  - kind: irb\n    taus: [1ms]\n    shots: -4\n");
    EXPECT_NE(e.find("cfg.yaml:6"), std::string::npos) << e;
    EXPECT_NE(e.find("shots"), std::string::npos) << e;

    e = error_of("name: x\nmaster_seed: 1\nexperiments:\n  - kind: irb\n    taus: [1ms]\n    colour: red\n");
    EXPECT_NE(e.find("cfg.yaml:6"), std::string::npos) << e;
    EXPECT_NE(e.find("colour"), std::string::npos) << e;

    e = error_of("name: x\nmaster_seed: 1\nexperiments:\n  - kind: irb\n    taus: [5 fortnights]\n");
    EXPECT_NE(e.find("taus"), std::string::npos) << e;

    e = error_of("name: x\nmaster_seed: 1\nexperiments:\n  - kind: teleport\n    taus: [1ms]\n");
    EXPECT_NE(e.find("kind"), std::string::npos) << e;
}

TEST(Config, RejectsEmptySchedule) {
    std::string e = error_of("name: x\nmaster_seed: 1\nexperiments:\n  - kind: irb\n    taus: []\n");
    EXPECT_NE(e.find("empty"), std::string::npos) << e;
    e = error_of("name: x\nmaster_seed: 1\nexperiments:\n  - kind: field-scan\n    taus: [1ms]\n");
    EXPECT_NE(e.find("field_offsets"), std::string::npos) << e;
}

TEST(Config, RequiresMasterSeed) {
    std::string e = error_of("name: x\nexperiments:\n  - kind: irb\n    taus: [1ms]\n");
    EXPECT_NE(e.find("master_seed"), std::string::npos) << e;
}

TEST(Config, MalformedYaml) {
    std::string e = error_of("name: [x\n");
    EXPECT_FALSE(e.empty());
}

TEST(Planner, AutoLengthsFollowPrediction) {
    ExperimentSpec s;
    s.kind = ExperimentKind::IRB;
    s.noise = noise_preset("paper-fit");
    s.taus = {1e-3, 1.0};
    auto plan = plan_experiment(s);
    ASSERT_EQ(plan.size(), 2u);
    EXPECT_GT(plan[0].ms.back(), plan[1].ms.back());
    EXPECT_EQ(plan[0].ms.size(), 4u);
    EXPECT_EQ(plan[0].index, 0u);
}

TEST(Campaign, BudgetRefusal) {
    auto c = parse_campaign_config(SMALL);
    auto dir = scratch("budget");
    RunOptions o;
    o.out = dir.string();
    o.budget = 10.0;
    EXPECT_THROW(run_campaign(c, o), BudgetError);
    EXPECT_FALSE(fs::exists(dir / "manifest.json"));
}

TEST(Campaign, DeterministicOutputs) {
    auto c = parse_campaign_config(SMALL);
    auto a = scratch("det-a"), b = scratch("det-b");
    RunOptions o;
    o.out = a.string();
    std::string ma = run_campaign(c, o);
    o.out = b.string();
    std::string mb = run_campaign(c, o);
    for (const auto &rel : {"records/00-irb.jsonl", "records/01-ramsey.jsonl", "fits/00-irb.json"}) {
        EXPECT_EQ(read_file((a / rel).string()), read_file((b / rel).string())) << rel;
    }
    o.seed = 18;
    auto d = scratch("det-c");
    o.out = d.string();
    run_campaign(c, o);
    EXPECT_NE(read_file((a / "records/00-irb.jsonl").string()), read_file((d / "records/00-irb.jsonl").string()));
}

TEST(Campaign, RecordsRoundTripAndRefit) {
    auto c = parse_campaign_config(SMALL);
    auto dir = scratch("refit");
    RunOptions o;
    o.out = dir.string();
    run_campaign(c, o);
    auto path = (dir / "records/00-irb.jsonl").string();
    RecordFile f = read_records_file(path);
    EXPECT_EQ(serialize_records(f), read_file(path));
    EXPECT_EQ(f.rb.size(), 2u * 3u * 4u * 3u);  // taus x ms x k x {irb, reference, spam}

    fit_dataset(path, FitModel::RB, (dir / "a.json").string());
    fit_dataset(path, FitModel::RB, (dir / "b.json").string());
    EXPECT_EQ(read_file((dir / "a.json").string()), read_file((dir / "b.json").string()));
    EXPECT_EQ(read_file((dir / "a.json").string()), read_file((dir / "fits/00-irb.json").string()));
}

TEST(Campaign, MalformedRecordLineIsReported) {
    auto c = parse_campaign_config(SMALL);
    auto dir = scratch("malformed");
    RunOptions o;
    o.out = dir.string();
    run_campaign(c, o);
    std::string text = read_file((dir / "records/00-irb.jsonl").string());
    size_t first = text.find('\n');
    size_t second = text.find('\n', first + 1);
    text.replace(first + 1, second - first - 1, "{\"kind\": \"irb\", oops");
    std::istringstream in(text);
    try {
        parse_records(in);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError &e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(Campaign, SrbRecoversInjectedError) {
    auto c = parse_campaign_config(R"(name: srb
master_seed: 5
experiments:
  - kind: srb
    eps_inject: 1.0e-4
    k: 30
    shots: 100
)");
    auto rf = simulate_experiment(c.experiments[0], 5, 0);
    Json fit = analyze_records(rf);
    double eps = fit["fit"]["eps_g"].get<double>();
    double sigma = fit["fit"]["sigma_eps_g"].get<double>();
    EXPECT_NEAR(eps, 3.5e-4, 3 * sigma + 0.1 * 3.5e-4);
}

TEST(Campaign, FiguresAndVerification) {
    auto c = parse_campaign_config(SMALL);
    auto dir = scratch("figs");
    RunOptions o;
    o.out = dir.string();
    std::string manifest = run_campaign(c, o);
    EXPECT_NO_THROW(verify_manifest(manifest));

    auto f1 = emit_figure_data(manifest, "fig1b");
    EXPECT_FALSE(f1.empty());
    auto f3 = emit_figure_data(manifest, "fig3c");
    std::vector<std::string> names;
    for (const auto &p : f3) {
        names.push_back(fs::path(p).filename().string());
        EXPECT_TRUE(fs::exists(p));
    }
    EXPECT_NE(std::find(names.begin(), names.end(), "fig3c-irb.csv"), names.end());
    EXPECT_NE(std::find(names.begin(), names.end(), "fig3c-model.csv"), names.end());
    try {
        emit_figure_data(manifest, "fig2b");
        FAIL() << "expected an error for missing SRB data";
    } catch (const std::runtime_error &e) {
        EXPECT_NE(std::string(e.what()).find("srb"), std::string::npos) << e.what();
    }
    EXPECT_THROW(emit_figure_data(manifest, "fig9"), std::exception);

    {
        std::ofstream out(dir / "records/01-ramsey.jsonl", std::ios::app);
        out << "\n";
    }
    EXPECT_THROW(verify_manifest(manifest), std::runtime_error);
}

TEST(Campaign, SelftestPasses) {
    std::ostringstream out;
    EXPECT_EQ(run_selftest(out), 0) << out.str();
    EXPECT_EQ(out.str().find("FAIL"), std::string::npos) << out.str();
}

}  // namespace
}  // namespace qmem
