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

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qmem/campaign.h"
#include "qmem/rng.h"

namespace qmem {

namespace {

struct Check {
    const char *name;
    std::function<std::string()> run;  // empty string on success
};

std::string expect_near(double got, double want, double tol, const char *what) {
    if (std::abs(got - want) <= tol) {
        return "";
    }
    std::ostringstream os;
    os << what << " = " << got << ", expected " << want << " +/- " << tol;
    return os.str();
}

}  // namespace

int run_selftest(std::ostream &out) {
    const std::vector<Check> checks = {
        {"clifford-closure",
         [] {
             const auto &g = CliffordGroup::instance();
             for (size_t a = 0; a < CliffordGroup::SIZE; ++a) {
                 for (size_t b = 0; b < CliffordGroup::SIZE; ++b) {
                     Mat2 u = g[b].unitary * g[a].unitary;
                     if (g.find(u) != g.compose(static_cast<uint8_t>(a), static_cast<uint8_t>(b))) {
                         return std::string("product table mismatch");
                     }
                 }
                 if (g.compose(static_cast<uint8_t>(a), g.inverse(static_cast<uint8_t>(a))) != CliffordGroup::IDENTITY) {
                     return std::string("inverse mismatch");
                 }
             }
             return std::string();
         }},
        {"clifford-word-lengths",
         [] {
             const auto &g = CliffordGroup::instance();
             std::string e = expect_near(g.mean_word_length(GateSet::FOUR_GENERATOR) * 24, 84, 1e-9, "4-gen total");
             return e.empty() ? expect_near(g.mean_word_length(GateSet::TWO_GENERATOR_BB1) * 24, 86, 1e-9, "2-gen total")
                              : e;
         }},
        {"bb1-robustness",
         [] {
             Pulse bare{std::numbers::pi / 2, 0.0, 1e-5, 1.01};
             Pulse ideal{std::numbers::pi / 2, 0.0, 1e-5, 1.0};
             Mat2 comp = Mat2::identity();
             for (const auto &p : bb1_expand(bare)) {
                 comp = p.unitary() * comp;
             }
             double r = average_gate_infidelity(comp, ideal.unitary()) /
                        average_gate_infidelity(bare.unitary(), ideal.unitary());
             return r <= 0.01 ? std::string() : "composite/bare infidelity ratio " + std::to_string(r);
         }},
        {"field-detuning",
         [] { return expect_near(detuning_from_field(50.0), 3.025, 1e-12, "df(50 mG)"); }},
        {"memory-error-1ms",
         [] { return expect_near(predict_memory_error(noise_preset("paper-fit"), 1e-3), 8.5e-7, 0.05e-7, "eps_m(1 ms)"); }},
        {"trace-determinism",
         [] {
             NoiseModel m = noise_preset("paper-fit");
             Rng a = make_rng(7), b = make_rng(7);
             auto t1 = synthesize_trace(m, 1.0, 1e-3, a, 7);
             auto t2 = synthesize_trace(m, 1.0, 1e-3, b, 7);
             return t1.samples() == t2.samples() ? std::string() : std::string("traces differ");
         }},
        {"srb-noiseless",
         [] {
             RbConfig c;
             c.m = 20;
             c.k = 5;
             c.shots = 10;
             c.master_seed = 3;
             auto r = run_rb_campaign(c);
             for (const auto &s : r.main) {
                 if (s.fidelity != 1.0) {
                     return std::string("noiseless sequence fidelity below 1");
                 }
             }
             return std::string();
         }},
        {"records-roundtrip",
         [] {
             ExperimentSpec s;
             s.kind = ExperimentKind::SRB;
             s.ms = {1, 4};
             s.k = 2;
             s.shots = 4;
             RecordFile f = simulate_experiment(s, 11, 0);
             std::string text = serialize_records(f);
             std::istringstream in(text);
             return serialize_records(parse_records(in)) == text ? std::string() : std::string("records differ");
         }},
    };
    int failures = 0;
    for (const auto &c : checks) {
        std::string err;
        try {
            err = c.run();
        } catch (const std::exception &e) {
            err = std::string("exception: ") + e.what();
        }
        if (err.empty()) {
            out << "PASS " << c.name << "\n";
        } else {
            out << "FAIL " << c.name << ": " << err << "\n";
            failures++;
        }
    }
    return failures;
}

}  // namespace qmem
