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

#include "qmem/campaign.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "qmem/rng.h"

namespace fs = std::filesystem;

namespace qmem {

namespace {

constexpr double PI = std::numbers::pi;

void log_line(const std::string &msg) {
    static const bool quiet = [] {
        const char *q = std::getenv("QMEM_QUIET");
        return q && *q && std::string_view(q) != "0";
    }();
    if (!quiet) {
        std::cerr << "[qmem] " << msg << std::endl;
    }
}

std::string fmt(double v, const char *spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// ---------------------------------------------------------------------------
// YAML config parsing

class ConfigReader {
   public:
    explicit ConfigReader(std::string origin) : origin_(std::move(origin)) {
    }

    [[noreturn]] void fail(const YAML::Node &node, const std::string &field, const std::string &what) const {
        std::string where = origin_;
        if (node.IsDefined() && node.Mark().line >= 0) {
            where += ":" + std::to_string(node.Mark().line + 1) + ":" + std::to_string(node.Mark().column + 1);
        }
        throw ConfigError(where + ": field '" + field + "': " + what);
    }

    void check_keys(const YAML::Node &map, const std::set<std::string> &allowed, const std::string &ctx) const {
        if (!map.IsMap()) {
            fail(map, ctx, "expected a mapping");
        }
        for (const auto &kv : map) {
            auto key = kv.first.as<std::string>();
            if (!allowed.count(key)) {
                fail(kv.first, ctx.empty() ? key : ctx + "." + key, "unknown key");
            }
        }
    }

    double number(const YAML::Node &n, const std::string &field) const {
        if (!n.IsScalar()) {
            fail(n, field, "expected a number");
        }
        try {
            return n.as<double>();
        } catch (const YAML::Exception &) {
            fail(n, field, "expected a number, got '" + n.Scalar() + "'");
        }
    }

    // Durations accept plain seconds or a string with an s, ms or us suffix.
    double duration(const YAML::Node &n, const std::string &field) const {
        if (!n.IsScalar()) {
            fail(n, field, "expected a duration");
        }
        const std::string &s = n.Scalar();
        static const std::pair<const char *, double> units[] = {{"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}};
        for (auto [suffix, scale] : units) {
            size_t len = std::char_traits<char>::length(suffix);
            if (s.size() > len && s.compare(s.size() - len, len, suffix) == 0) {
                std::string body = s.substr(0, s.size() - len);
                char *end = nullptr;
                double v = std::strtod(body.c_str(), &end);
                if (end == body.c_str() || *end != '\0') {
                    fail(n, field, "malformed duration '" + s + "'");
                }
                return v * scale;
            }
        }
        return number(n, field);
    }

    uint64_t unsigned_int(const YAML::Node &n, const std::string &field) const {
        if (!n.IsScalar()) {
            fail(n, field, "expected a non-negative integer");
        }
        const std::string &s = n.Scalar();
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
            fail(n, field, "expected a non-negative integer, got '" + s + "'");
        }
        try {
            return std::stoull(s);
        } catch (const std::exception &) {
            fail(n, field, "integer out of range");
        }
    }

    bool boolean(const YAML::Node &n, const std::string &field) const {
        try {
            return n.as<bool>();
        } catch (const YAML::Exception &) {
            fail(n, field, "expected true or false");
        }
    }

    std::string string(const YAML::Node &n, const std::string &field) const {
        if (!n.IsScalar()) {
            fail(n, field, "expected a string");
        }
        return n.Scalar();
    }

    std::vector<double> durations(const YAML::Node &n, const std::string &field) const {
        std::vector<double> out;
        if (n.IsSequence()) {
            for (const auto &e : n) {
                out.push_back(duration(e, field));
            }
        } else {
            out.push_back(duration(n, field));
        }
        return out;
    }

    std::vector<double> numbers(const YAML::Node &n, const std::string &field) const {
        std::vector<double> out;
        if (n.IsSequence()) {
            for (const auto &e : n) {
                out.push_back(number(e, field));
            }
        } else {
            out.push_back(number(n, field));
        }
        return out;
    }

    void noise(const YAML::Node &n, ExperimentSpec &spec) const {
        auto preset = [&](const YAML::Node &p) {
            std::string name = string(p, "noise");
            try {
                spec.noise = noise_preset(name);
            } catch (const std::invalid_argument &) {
                std::string known;
                for (const auto &k : noise_preset_names()) {
                    known += (known.empty() ? "" : ", ") + k;
                }
                fail(p, "noise", "unknown preset '" + name + "' (known: " + known + ")");
            }
            spec.noise_name = name;
        };
        if (n.IsScalar()) {
            preset(n);
            return;
        }
        check_keys(n, {"preset", "s_w", "s_p", "f_c", "static_detuning", "field_offset", "cutoff"}, "noise");
        if (n["preset"]) {
            preset(n["preset"]);
        } else {
            spec.noise = NoiseModel{};
            spec.noise_name = "custom";
        }
        bool modified = false;
        auto set = [&](const char *key, double &dst) {
            if (n[key]) {
                dst = number(n[key], std::string("noise.") + key);
                modified = true;
            }
        };
        set("s_w", spec.noise.s_w);
        set("s_p", spec.noise.s_p);
        set("f_c", spec.noise.f_c);
        set("static_detuning", spec.noise.static_detuning);
        set("field_offset", spec.noise.field_offset);
        if (n["cutoff"]) {
            try {
                spec.noise.cutoff = parse_cutoff_mode(string(n["cutoff"], "noise.cutoff"));
            } catch (const std::invalid_argument &e) {
                fail(n["cutoff"], "noise.cutoff", e.what());
            }
            modified = true;
        }
        if (modified && n["preset"]) {
            spec.noise_name += "+custom";
        }
        try {
            spec.noise.validate();
        } catch (const std::invalid_argument &e) {
            fail(n, "noise", e.what());
        }
    }

    void spam(const YAML::Node &n, ExperimentSpec &spec) const {
        if (n.IsScalar()) {
            double e = number(n, "spam");
            spec.spam = {e, e};
        } else {
            check_keys(n, {"eps_up", "eps_down"}, "spam");
            if (n["eps_up"]) {
                spec.spam.eps_up = number(n["eps_up"], "spam.eps_up");
            }
            if (n["eps_down"]) {
                spec.spam.eps_down = number(n["eps_down"], "spam.eps_down");
            }
        }
        try {
            spec.spam.validate();
        } catch (const std::invalid_argument &e) {
            fail(n, "spam", e.what());
        }
    }

    void timing(const YAML::Node &n, ExperimentSpec &spec) const {
        check_keys(n, {"mode", "pi2_duration", "pulse_spacing", "slices", "amplitude_scale"}, "timing");
        auto &t = spec.timing;
        if (n["mode"]) {
            try {
                t.mode = parse_gate_timing(string(n["mode"], "timing.mode"));
            } catch (const std::invalid_argument &e) {
                fail(n["mode"], "timing.mode", e.what());
            }
        }
        if (n["pi2_duration"]) {
            t.pi2_duration = duration(n["pi2_duration"], "timing.pi2_duration");
        }
        if (n["pulse_spacing"]) {
            t.pulse_spacing = duration(n["pulse_spacing"], "timing.pulse_spacing");
        }
        if (n["slices"]) {
            t.slices = static_cast<int>(unsigned_int(n["slices"], "timing.slices"));
        }
        if (n["amplitude_scale"]) {
            t.amplitude_scale = number(n["amplitude_scale"], "timing.amplitude_scale");
        }
        try {
            t.validate();
        } catch (const std::invalid_argument &e) {
            fail(n, "timing", e.what());
        }
    }

    // Applies the experiment keys present in `n` on top of `spec`.
    void experiment_fields(const YAML::Node &n, ExperimentSpec &spec) const {
        if (n["kind"]) {
            try {
                spec.kind = parse_experiment_kind(string(n["kind"], "kind"));
            } catch (const std::invalid_argument &e) {
                fail(n["kind"], "kind", e.what());
            }
        }
        if (n["noise"]) {
            noise(n["noise"], spec);
        }
        if (n["gateset"]) {
            try {
                spec.gateset = parse_gate_set(string(n["gateset"], "gateset"));
            } catch (const std::invalid_argument &e) {
                fail(n["gateset"], "gateset", e.what());
            }
        }
        if (n["k"]) {
            spec.k = unsigned_int(n["k"], "k");
        }
        if (n["shots"]) {
            spec.shots = unsigned_int(n["shots"], "shots");
        }
        if (n["spam"]) {
            spam(n["spam"], spec);
        }
        if (n["timing"]) {
            timing(n["timing"], spec);
        }
        if (n["taus"]) {
            spec.taus = durations(n["taus"], "taus");
        }
        if (n["m"]) {
            const auto &m = n["m"];
            spec.ms.clear();
            if (m.IsScalar() && m.Scalar() == "auto") {
                // planner
            } else if (m.IsSequence()) {
                for (const auto &e : m) {
                    spec.ms.push_back(unsigned_int(e, "m"));
                }
                if (spec.ms.empty()) {
                    fail(m, "m", "empty list; use 'auto' for the planner");
                }
            } else {
                spec.ms.push_back(unsigned_int(m, "m"));
            }
            for (size_t v : spec.ms) {
                if (v == 0) {
                    fail(m, "m", "sequence lengths must be positive");
                }
            }
        }
        if (n["target_infidelity"]) {
            spec.target_infidelity = number(n["target_infidelity"], "target_infidelity");
            if (!(spec.target_infidelity > 0 && spec.target_infidelity < 0.5)) {
                fail(n["target_infidelity"], "target_infidelity", "must lie in (0, 0.5)");
            }
        }
        if (n["field_offsets"]) {
            spec.field_offsets = numbers(n["field_offsets"], "field_offsets");
        }
        if (n["dd_period"]) {
            spec.dd_period = duration(n["dd_period"], "dd_period");
            if (!(spec.dd_period > 0)) {
                fail(n["dd_period"], "dd_period", "must be positive");
            }
        }
        if (n["dd_in_reference"]) {
            spec.dd_in_reference = boolean(n["dd_in_reference"], "dd_in_reference");
        }
        if (n["eps_inject"]) {
            spec.eps_inject = number(n["eps_inject"], "eps_inject");
        }
        if (n["fit_shape"]) {
            try {
                spec.fit_shape = parse_decay_shape(string(n["fit_shape"], "fit_shape"));
            } catch (const std::invalid_argument &e) {
                fail(n["fit_shape"], "fit_shape", e.what());
            }
        }
        if (n["threads"]) {
            spec.threads = static_cast<unsigned>(unsigned_int(n["threads"], "threads"));
        }
        if (n["max_sequence_duration"]) {
            spec.max_sequence_duration = duration(n["max_sequence_duration"], "max_sequence_duration");
        }
    }

    void validate_experiment(const YAML::Node &n, const ExperimentSpec &spec) const {
        if (!n["kind"]) {
            fail(n, "kind", "missing");
        }
        bool rb = spec.kind != ExperimentKind::RAMSEY && spec.kind != ExperimentKind::SPIN_ECHO;
        if (spec.kind != ExperimentKind::SRB) {
            if (spec.taus.empty()) {
                fail(n, "taus", "schedule is empty");
            }
            for (double t : spec.taus) {
                if (!(t > 0) || !std::isfinite(t)) {
                    fail(n["taus"] ? n["taus"] : n, "taus", "delays must be positive and finite");
                }
            }
        }
        if (spec.kind == ExperimentKind::FIELD_SCAN && spec.field_offsets.empty()) {
            fail(n, "field_offsets", "schedule is empty");
        }
        if (spec.k == 0) {
            fail(n["k"] ? n["k"] : n, "k", "must be positive");
        }
        if (spec.shots == 0) {
            fail(n["shots"] ? n["shots"] : n, "shots", "must be positive");
        }
        if (spec.threads == 0) {
            fail(n["threads"] ? n["threads"] : n, "threads", "must be positive");
        }
        if (rb && !(spec.eps_inject >= 0 && spec.eps_inject <= 2.0 / 3.0)) {
            fail(n["eps_inject"] ? n["eps_inject"] : n, "eps_inject", "must lie in [0, 2/3]");
        }
        if (spec.kind == ExperimentKind::SRB && spec.ms.empty() && !(spec.eps_inject > 0)) {
            fail(n, "m", "'auto' needs eps_inject > 0 for srb; list the sequence lengths");
        }
        try {
            plan_experiment(spec);
        } catch (const std::exception &e) {
            fail(n, "schedule", e.what());
        }
    }

   private:
    std::string origin_;
};

const std::set<std::string> &experiment_keys() {
    static const std::set<std::string> keys{
        "kind",        "noise",         "gateset",       "k",           "shots",      "spam",
        "timing",      "taus",          "m",             "target_infidelity",         "field_offsets",
        "dd_period",   "dd_in_reference", "eps_inject",  "fit_shape",   "threads",    "max_sequence_duration"};
    return keys;
}

// ---------------------------------------------------------------------------
// Echo of resolved settings

Json to_json(const SpamModel &s) {
    Json j;
    j["eps_up"] = s.eps_up;
    j["eps_down"] = s.eps_down;
    return j;
}

Json to_json(const TimingModel &t) {
    Json j;
    j["mode"] = std::string(gate_timing_name(t.mode));
    j["pi2_duration"] = t.pi2_duration;
    j["pulse_spacing"] = t.pulse_spacing;
    j["slices"] = t.slices;
    j["amplitude_scale"] = t.amplitude_scale;
    return j;
}

Json to_json(const ExperimentSpec &s) {
    Json j;
    j["kind"] = std::string(experiment_kind_name(s.kind));
    j["noise_name"] = s.noise_name;
    j["noise"] = to_json(s.noise);
    j["gateset"] = std::string(gate_set_name(s.gateset));
    j["k"] = s.k;
    j["shots"] = s.shots;
    j["spam"] = to_json(s.spam);
    j["timing"] = to_json(s.timing);
    j["taus"] = s.taus;
    if (s.ms.empty()) {
        j["m"] = "auto";
    } else {
        j["m"] = s.ms;
    }
    j["target_infidelity"] = s.target_infidelity;
    j["field_offsets"] = s.field_offsets;
    j["dd_period"] = s.dd_period;
    j["dd_in_reference"] = s.dd_in_reference;
    j["dd_placement"] = "even count, pulses at (j + 1/2) tau / n";
    j["eps_inject"] = s.eps_inject;
    j["fit_shape"] = std::string(decay_shape_name(s.fit_shape));
    j["threads"] = s.threads;
    j["max_sequence_duration"] = s.max_sequence_duration;
    return j;
}

Json to_json(const SchedulePoint &p) {
    Json j;
    j["index"] = p.index;
    j["tau"] = p.tau;
    j["field_offset"] = p.field_offset;
    j["m"] = p.ms;
    j["predicted"] = p.predicted;
    return j;
}

bool is_rb(ExperimentKind k) {
    return k != ExperimentKind::RAMSEY && k != ExperimentKind::SPIN_ECHO;
}

double physical_pulses_per_clifford(GateSet g) {
    double words = CliffordGroup::instance().mean_word_length(g);
    return g == GateSet::TWO_GENERATOR_BB1 ? 4 * words : words;
}

double injected_gate_error(const ExperimentSpec &spec) {
    if (!(spec.eps_inject > 0)) {
        return 0;
    }
    return 1 - std::pow(1 - spec.eps_inject, physical_pulses_per_clifford(spec.gateset));
}

NoiseModel point_noise(const ExperimentSpec &spec, const SchedulePoint &p) {
    NoiseModel n = spec.noise;
    if (spec.kind == ExperimentKind::FIELD_SCAN) {
        n.field_offset = p.field_offset;
    }
    return n;
}

RbConfig rb_config(const ExperimentSpec &spec, const SchedulePoint &p, size_t m, uint64_t seed) {
    RbConfig c;
    c.m = m;
    c.k = spec.k;
    c.tau = p.tau;
    c.gateset = spec.gateset;
    if (spec.kind == ExperimentKind::IRB_DD) {
        c.dd_period = spec.dd_period;
    }
    c.dd_in_reference = spec.dd_in_reference;
    c.eps_inject = spec.eps_inject;
    c.shots = spec.shots;
    c.spam = spec.spam;
    c.noise = point_noise(spec, p);
    c.master_seed = seed;
    c.timing = spec.timing;
    c.max_sequence_duration = spec.max_sequence_duration;
    c.threads = spec.threads;
    return c;
}

RamseyConfig ramsey_config(const ExperimentSpec &spec, const SchedulePoint &p, uint64_t seed) {
    RamseyConfig c;
    c.tau_r = p.tau;
    c.shots = spec.shots;
    c.spam = spec.spam;
    c.noise = spec.noise;
    c.echo = spec.kind == ExperimentKind::SPIN_ECHO;
    c.seed = seed;
    c.timing = spec.timing;
    return c;
}

size_t fft_cost_size(double samples) {
    return trace_fft_size(static_cast<size_t>(std::max(1.0, std::ceil(samples))));
}

double trace_cost(double samples) {
    double n = static_cast<double>(fft_cost_size(samples));
    return n * std::log2(n);
}

std::string iso_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string two_digit(size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02zu", i);
    return buf;
}

std::string file_stem(size_t index, ExperimentKind kind) {
    std::string k(experiment_kind_name(kind));
    return two_digit(index) + "-" + k;
}

// ---------------------------------------------------------------------------
// Analysis of record files

Json fit_or_error(const std::function<Json()> &f) {
    try {
        return f();
    } catch (const FitError &e) {
        return Json{{"error", std::string("fit failed: ") + e.what()}};
    } catch (const std::invalid_argument &e) {
        return Json{{"error", std::string("fit not possible: ") + e.what()}};
    }
}

std::vector<SequenceRecord> select(const std::vector<RbRecordLine> &lines, size_t point, RecordKind kind) {
    std::vector<SequenceRecord> out;
    for (const auto &l : lines) {
        if (l.point == point && l.rec.kind == kind) {
            out.push_back(l.rec);
        }
    }
    return out;
}

Json rb_points_json(const std::vector<RbPoint> &pts) {
    Json a = Json::array();
    for (const auto &p : pts) {
        a.push_back(Json{{"m", p.m}, {"fidelity", p.fidelity}, {"sem", p.sem}, {"count", p.count}});
    }
    return a;
}

double spam_from_controls(const std::vector<SequenceRecord> &recs, double &sigma) {
    std::vector<double> err;
    for (const auto &r : recs) {
        err.push_back(1 - r.fidelity);
    }
    sigma = 0;
    if (err.empty()) {
        return std::nan("");
    }
    double mean = mean_of(err);
    if (err.size() > 1) {
        double ss = 0;
        for (double v : err) {
            ss += (v - mean) * (v - mean);
        }
        sigma = std::sqrt(ss / static_cast<double>(err.size() - 1) / static_cast<double>(err.size()));
    }
    return mean;
}

struct HeaderInfo {
    ExperimentKind kind = ExperimentKind::IRB;
    NoiseModel noise;
    DecayShape shape = DecayShape::EXPONENTIAL;
    std::vector<SchedulePoint> points;
};

HeaderInfo header_info(const Json &h) {
    HeaderInfo info;
    try {
        info.kind = parse_experiment_kind(h.at("kind").get<std::string>());
        const Json &cfg = h.at("config");
        info.noise = noise_model_from_json(cfg.at("noise"));
        info.shape = parse_decay_shape(cfg.at("fit_shape").get<std::string>());
        for (const auto &pj : h.at("points")) {
            SchedulePoint p;
            p.index = pj.at("index").get<size_t>();
            p.tau = pj.at("tau").get<double>();
            p.field_offset = pj.at("field_offset").get<double>();
            p.ms = pj.at("m").get<std::vector<size_t>>();
            p.predicted = pj.at("predicted").get<double>();
            info.points.push_back(p);
        }
    } catch (const Json::exception &e) {
        throw SchemaError(std::string("line 1: header: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw SchemaError(std::string("line 1: header: ") + e.what());
    }
    return info;
}

bool spans_two_decades(const std::vector<MemoryErrorPoint> &pts) {
    if (pts.size() < 4) {
        return false;
    }
    double lo = pts.front().tau, hi = pts.front().tau;
    for (const auto &p : pts) {
        lo = std::min(lo, p.tau);
        hi = std::max(hi, p.tau);
    }
    return hi >= 100 * lo * (1 - 1e-12);
}

Json decoherence_json(const std::vector<MemoryErrorPoint> &pts) {
    return fit_or_error([&] {
        auto fit = fit_decoherence_model(pts);
        Json j = to_json(fit);
        return j;
    });
}

// Memory-error points of every IRB schedule point (rb records) or Ramsey point.
std::vector<MemoryErrorPoint> memory_error_points(const Json &fit_points, CurveMethod method) {
    std::vector<MemoryErrorPoint> out;
    for (const auto &p : fit_points) {
        const char *key = method == CurveMethod::RAMSEY ? "eps" : "eps_m";
        if (!p.contains(key) || !p.contains("sigma_eps")) {
            continue;
        }
        MemoryErrorPoint m;
        m.tau = p["tau"].get<double>();
        m.eps = p[key].get<double>();
        m.sigma = p["sigma_eps"].get<double>();
        m.method = method;
        out.push_back(m);
    }
    return out;
}

Json analyze_rb(const RecordFile &file, const HeaderInfo &info) {
    Json out;
    out["model"] = "rb";
    if (file.rb.empty()) {
        throw SchemaError("no rb records in file");
    }
    std::vector<SequenceRecord> spam_recs;
    for (const auto &l : file.rb) {
        if (l.rec.kind == RecordKind::SPAM_CONTROL) {
            spam_recs.push_back(l.rec);
        }
    }
    double sigma_spam = 0;
    double spam = spam_from_controls(spam_recs, sigma_spam);
    if (!spam_recs.empty()) {
        out["spam_controls"] = Json{{"eps_spam", spam}, {"sigma", sigma_spam}, {"count", spam_recs.size()}};
    }

    if (info.kind == ExperimentKind::SRB) {
        auto pts = summarize_records(select(file.rb, 0, RecordKind::SRB));
        out["points"] = rb_points_json(pts);
        out["fit"] = fit_or_error([&] {
            auto fit = fit_rb_decay(pts);
            Json j = to_json(fit);
            j["eps_g"] = fit.eps();
            j["sigma_eps_g"] = fit.sigma_eps();
            j["eps_spam"] = fit.spam();
            j["sigma_eps_spam"] = fit.sigma_spam();
            // Each sequence ends with a recovery Clifford, so a = (1 - 2 eps_spam) p.
            double A = fit.a / fit.p;
            double var_A = fit.var_a / (fit.p * fit.p) + fit.a * fit.a * fit.var_p / std::pow(fit.p, 4) -
                           2 * fit.a * fit.cov_pa / std::pow(fit.p, 3);
            j["eps_spam_recovery_corrected"] = 0.5 * (1 - A);
            j["sigma_eps_spam_recovery_corrected"] = 0.5 * std::sqrt(std::max(0.0, var_A));
            return j;
        });
        return out;
    }

    Json points = Json::array();
    for (const auto &sp : info.points) {
        Json pj;
        pj["point"] = sp.index;
        pj["tau"] = sp.tau;
        pj["field_offset"] = sp.field_offset;
        pj["predicted"] = sp.predicted;
        auto irb_pts = summarize_records(select(file.rb, sp.index, RecordKind::IRB));
        auto ref_pts = summarize_records(select(file.rb, sp.index, RecordKind::REFERENCE));
        pj["irb"] = rb_points_json(irb_pts);
        pj["reference"] = rb_points_json(ref_pts);
        RbDecayFit irb_fit, ref_fit;
        bool ok = true;
        Json fi = fit_or_error([&] {
            irb_fit = fit_rb_decay(irb_pts);
            return to_json(irb_fit);
        });
        Json fr = fit_or_error([&] {
            ref_fit = fit_rb_decay(ref_pts);
            return to_json(ref_fit);
        });
        ok = !fi.contains("error") && !fr.contains("error");
        pj["irb_fit"] = fi;
        pj["reference_fit"] = fr;
        if (ok) {
            auto em = extract_memory_error(irb_fit, ref_fit);
            pj["eps_m"] = em.value;
            pj["sigma_eps"] = em.sigma;
            pj["eps_g"] = ref_fit.eps();
        }
        points.push_back(pj);
    }
    out["points"] = points;
    if (info.kind == ExperimentKind::IRB) {
        auto me = memory_error_points(points, CurveMethod::IRB);
        if (spans_two_decades(me)) {
            out["decoherence_fit"] = decoherence_json(me);
        }
    }
    return out;
}

Json analyze_ramsey(const RecordFile &file, const HeaderInfo &info, std::optional<DecayShape> shape) {
    if (file.ramsey.empty()) {
        throw SchemaError("no ramsey records in file");
    }
    Json out;
    Json points = Json::array();
    std::vector<ContrastPoint> cps;
    for (const auto &l : file.ramsey) {
        const auto &r = l.result;
        Json pj;
        pj["point"] = l.point;
        pj["tau"] = r.tau_r;
        pj["echo"] = l.echo;
        pj["contrast_loss"] = r.contrast_loss;
        pj["sigma"] = r.sigma;
        pj["eps"] = contrast_loss_to_memory_error(r.contrast_loss);
        pj["sigma_eps"] = contrast_loss_to_memory_error(r.sigma);
        pj["predicted"] = predict_memory_error(info.noise, r.tau_r);
        pj["spam_measured"] = r.spam_measured;
        points.push_back(pj);
        if (r.contrast_loss < 0.95) {
            cps.push_back({r.tau_r, r.contrast_loss, r.sigma});
        }
    }
    out["points"] = points;
    DecayShape s = shape.value_or(info.shape);
    out["model"] = std::string(decay_shape_name(s));
    out["decay_fit"] = fit_or_error([&] {
        auto v = fit_contrast_decay(cps, s);
        return Json{{"shape", std::string(decay_shape_name(s))}, {"T", v.value}, {"sigma_T", v.sigma},
                    {"points_used", cps.size()}};
    });
    if (!shape) {
        auto me = memory_error_points(points, CurveMethod::RAMSEY);
        if (spans_two_decades(me)) {
            out["decoherence_fit"] = decoherence_json(me);
        }
    }
    return out;
}

std::string summarize_fit(const Json &fit) {
    std::string s = fit.value("kind", std::string("?")) + " (" + fit.value("model", std::string("?")) + ")";
    auto add_error = [&](const Json &j) {
        if (j.contains("error")) {
            s += " " + j["error"].get<std::string>();
            return true;
        }
        return false;
    };
    if (fit.contains("fit")) {
        const Json &f = fit["fit"];
        if (!add_error(f)) {
            s += ": eps_g=" + fmt(f["eps_g"].get<double>()) + " +/- " + fmt(f["sigma_eps_g"].get<double>()) +
                 ", spam=" + fmt(f["eps_spam"].get<double>());
        }
    }
    if (fit.contains("decay_fit")) {
        const Json &f = fit["decay_fit"];
        if (!add_error(f)) {
            s += ": T=" + fmt(f["T"].get<double>()) + " s +/- " + fmt(f["sigma_T"].get<double>());
        }
    }
    if (fit.contains("decoherence_fit")) {
        const Json &f = fit["decoherence_fit"];
        if (!add_error(f)) {
            s += ": S_W=" + fmt(f["s_w"].get<double>()) + " S_P=" + fmt(f["s_p"].get<double>()) +
                 " f_c=" + fmt(f["f_c"].get<double>());
        }
    }
    if (fit.contains("points") && fit["model"] == "rb" && !fit.contains("fit")) {
        for (const auto &p : fit["points"]) {
            s += "; tau=" + fmt(p["tau"].get<double>());
            if (p.contains("eps_m")) {
                s += " eps_m=" + fmt(p["eps_m"].get<double>()) + " +/- " + fmt(p["sigma_eps"].get<double>());
            } else {
                s += " fit failed";
            }
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Point CSVs

CsvTable rb_point_csv(const Json &pj) {
    CsvTable t;
    t.comments.push_back(std::string("schema=") + FIGURE_SCHEMA);
    t.comments.push_back("tau=" + fmt(pj["tau"].get<double>(), "%.12g") +
                         " field_offset=" + fmt(pj["field_offset"].get<double>(), "%.12g"));
    t.columns = {"m", "fidelity_irb", "sem_irb", "fidelity_ref", "sem_ref", "model_irb", "model_ref"};
    const Json &irb = pj["irb"];
    const Json &ref = pj["reference"];
    bool have_fi = !pj["irb_fit"].contains("error");
    bool have_fr = !pj["reference_fit"].contains("error");
    RbDecayFit fi = have_fi ? rb_fit_from_json(pj["irb_fit"]) : RbDecayFit{};
    RbDecayFit fr = have_fr ? rb_fit_from_json(pj["reference_fit"]) : RbDecayFit{};
    double nan = std::nan("");
    for (size_t i = 0; i < irb.size(); ++i) {
        double m = irb[i]["m"].get<double>();
        double f_ref = nan, s_ref = nan;
        for (const auto &r : ref) {
            if (r["m"].get<double>() == m) {
                f_ref = r["fidelity"].get<double>();
                s_ref = r["sem"].get<double>();
            }
        }
        t.rows.push_back({m, irb[i]["fidelity"].get<double>(), irb[i]["sem"].get<double>(), f_ref, s_ref,
                          have_fi ? fi.model(m) : nan, have_fr ? fr.model(m) : nan});
    }
    return t;
}

CsvTable srb_point_csv(const Json &fit) {
    CsvTable t;
    t.comments.push_back(std::string("schema=") + FIGURE_SCHEMA);
    t.columns = {"m", "fidelity", "sem", "model"};
    bool have = !fit["fit"].contains("error");
    RbDecayFit f = have ? rb_fit_from_json(fit["fit"]) : RbDecayFit{};
    for (const auto &p : fit["points"]) {
        double m = p["m"].get<double>();
        t.rows.push_back({m, p["fidelity"].get<double>(), p["sem"].get<double>(), have ? f.model(m) : std::nan("")});
    }
    return t;
}

CsvTable ramsey_point_csv(const RamseyRecordLine &l) {
    const auto &r = l.result;
    CsvTable t;
    t.comments.push_back(std::string("schema=") + FIGURE_SCHEMA);
    t.columns = {"tau_r", "p_up_max", "p_up_min", "contrast", "contrast_loss", "sigma", "spam_measured"};
    t.rows.push_back({r.tau_r, r.p_up_max, r.p_up_min, r.contrast, r.contrast_loss, r.sigma, r.spam_measured});
    return t;
}

std::string relative_to(const fs::path &p, const fs::path &base) {
    return fs::relative(p, base).generic_string();
}

Json file_entry(const fs::path &path, const fs::path &root, const std::string &contents) {
    return Json{{"path", relative_to(path, root)}, {"sha256", sha256_hex(contents)}, {"bytes", contents.size()}};
}

Json summary_of(const Json &fit) {
    Json s;
    s["text"] = summarize_fit(fit);
    if (fit.contains("points") && fit["points"].is_array()) {
        Json pts = Json::array();
        for (const auto &p : fit["points"]) {
            if (!p.contains("tau")) {
                continue;
            }
            Json q{{"tau", p["tau"]}};
            for (const char *key : {"field_offset", "eps_m", "eps", "sigma_eps", "contrast_loss", "predicted"}) {
                if (p.contains(key)) {
                    q[key] = p[key];
                }
            }
            pts.push_back(q);
        }
        if (!pts.empty()) {
            s["points"] = pts;
        }
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::RAMSEY:
            return "ramsey";
        case ExperimentKind::SPIN_ECHO:
            return "spin-echo";
        case ExperimentKind::SRB:
            return "srb";
        case ExperimentKind::IRB:
            return "irb";
        case ExperimentKind::IRB_DD:
            return "irb-dd";
        case ExperimentKind::FIELD_SCAN:
            return "field-scan";
    }
    return "?";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
    for (auto k : {ExperimentKind::RAMSEY, ExperimentKind::SPIN_ECHO, ExperimentKind::SRB, ExperimentKind::IRB,
                   ExperimentKind::IRB_DD, ExperimentKind::FIELD_SCAN}) {
        if (experiment_kind_name(k) == name) {
            return k;
        }
    }
    throw std::invalid_argument("unknown experiment kind '" + std::string(name) +
                                "' (expected ramsey, spin-echo, srb, irb, irb-dd or field-scan)");
}

std::string_view fit_model_name(FitModel m) {
    switch (m) {
        case FitModel::RB:
            return "rb";
        case FitModel::DECOHERENCE:
            return "decoherence";
        case FitModel::EXPONENTIAL:
            return "exponential";
        case FitModel::GAUSSIAN:
            return "gaussian";
    }
    return "?";
}

FitModel parse_fit_model(std::string_view name) {
    for (auto m : {FitModel::RB, FitModel::DECOHERENCE, FitModel::EXPONENTIAL, FitModel::GAUSSIAN}) {
        if (fit_model_name(m) == name) {
            return m;
        }
    }
    throw std::invalid_argument("unknown fit model '" + std::string(name) +
                                "' (expected rb, decoherence, exponential or gaussian)");
}

CampaignConfig parse_campaign_config(const std::string &yaml_text, const std::string &origin) {
    ConfigReader r(origin);
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException &e) {
        throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                          ": " + e.msg);
    }
    if (!root.IsMap()) {
        throw ConfigError(origin + ": expected a mapping at the top level");
    }
    std::set<std::string> top{"name", "master_seed", "output_dir", "budget", "defaults", "experiments"};
    bool single = !root["experiments"] && root["kind"];
    if (single) {
        top.insert(experiment_keys().begin(), experiment_keys().end());
    }
    r.check_keys(root, top, "");

    CampaignConfig c;
    c.name = root["name"] ? r.string(root["name"], "name") : "campaign";
    if (!root["master_seed"]) {
        r.fail(root, "master_seed", "missing (campaigns are never seeded from the clock)");
    }
    c.master_seed = r.unsigned_int(root["master_seed"], "master_seed");
    if (root["output_dir"]) {
        c.output_dir = r.string(root["output_dir"], "output_dir");
    }
    if (root["budget"]) {
        c.budget = r.number(root["budget"], "budget");
        if (!(c.budget > 0)) {
            r.fail(root["budget"], "budget", "must be positive");
        }
    }

    ExperimentSpec base;
    if (root["defaults"]) {
        const auto &d = root["defaults"];
        std::set<std::string> keys = experiment_keys();
        keys.erase("kind");
        r.check_keys(d, keys, "defaults");
        r.experiment_fields(d, base);
    }

    if (single) {
        ExperimentSpec s = base;
        r.experiment_fields(root, s);
        r.validate_experiment(root, s);
        c.experiments.push_back(s);
        return c;
    }
    const auto &exps = root["experiments"];
    if (!exps) {
        r.fail(root, "experiments", "missing");
    }
    if (!exps.IsSequence() || exps.size() == 0) {
        r.fail(exps, "experiments", "expected a non-empty list");
    }
    for (const auto &e : exps) {
        r.check_keys(e, experiment_keys(), "experiments[]");
        ExperimentSpec s = base;
        r.experiment_fields(e, s);
        r.validate_experiment(e, s);
        c.experiments.push_back(s);
    }
    return c;
}

CampaignConfig load_campaign_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_campaign_config(ss.str(), path);
}

std::vector<SchedulePoint> plan_experiment(const ExperimentSpec &spec) {
    std::vector<SchedulePoint> pts;
    auto plan_ms = [&](SchedulePoint &p) {
        double eps_g = injected_gate_error(spec);
        double eps = eps_g;
        if (p.tau > 0) {
            auto pred = predict_memory_error_detail(point_noise(spec, p), p.tau);
            p.predicted = spec.kind == ExperimentKind::IRB_DD ? pred.white : pred.value;
            eps += p.predicted;
        } else {
            p.predicted = eps_g;
        }
        if (!spec.ms.empty()) {
            p.ms = spec.ms;
        } else {
            if (!(eps > 0)) {
                throw std::invalid_argument("m: 'auto' needs a nonzero predicted error at tau = " + fmt(p.tau));
            }
            p.ms = plan_sequence_lengths(eps, spec.target_infidelity);
        }
        if (p.tau > 0 && static_cast<double>(p.ms.back()) * p.tau > spec.max_sequence_duration) {
            throw std::invalid_argument("m * tau = " + fmt(static_cast<double>(p.ms.back()) * p.tau) +
                                        " s exceeds max_sequence_duration");
        }
    };
    switch (spec.kind) {
        case ExperimentKind::RAMSEY:
        case ExperimentKind::SPIN_ECHO:
            for (double t : spec.taus) {
                SchedulePoint p;
                p.index = pts.size();
                p.tau = t;
                p.field_offset = spec.noise.field_offset;
                p.predicted = predict_memory_error(spec.noise, t);
                pts.push_back(p);
            }
            break;
        case ExperimentKind::SRB: {
            SchedulePoint p;
            p.field_offset = spec.noise.field_offset;
            plan_ms(p);
            pts.push_back(p);
            break;
        }
        case ExperimentKind::IRB:
        case ExperimentKind::IRB_DD:
            for (double t : spec.taus) {
                SchedulePoint p;
                p.index = pts.size();
                p.tau = t;
                p.field_offset = spec.noise.field_offset;
                plan_ms(p);
                pts.push_back(p);
            }
            break;
        case ExperimentKind::FIELD_SCAN:
            for (double b : spec.field_offsets) {
                for (double t : spec.taus) {
                    SchedulePoint p;
                    p.index = pts.size();
                    p.tau = t;
                    p.field_offset = b;
                    plan_ms(p);
                    pts.push_back(p);
                }
            }
            break;
    }
    return pts;
}

double estimate_cost(const ExperimentSpec &spec) {
    const auto &t = spec.timing;
    bool instant = t.mode == GateTiming::INSTANTANEOUS;
    bool noisy = spec.noise.has_fluctuations() || spec.noise.total_static_detuning() != 0;
    double total = 0;
    double shots = static_cast<double>(spec.shots);
    for (const auto &p : plan_experiment(spec)) {
        if (!is_rb(spec.kind)) {
            double unit = spec.kind == ExperimentKind::SPIN_ECHO ? p.tau / 2 : p.tau;
            double dt = instant ? unit : std::max(std::min(unit / 20, 1e-3), (p.tau + 10 * t.pulse_slot(PI)) / (1 << 24));
            double samples = (p.tau + (instant ? 0 : 10 * t.pulse_slot(PI))) / dt;
            total += shots * 4 * ((noisy ? trace_cost(samples) : 0) + 16);
            continue;
        }
        double pulses = physical_pulses_per_clifford(spec.gateset);
        size_t n_dd = spec.kind == ExperimentKind::IRB_DD ? dd_pulse_count(p.tau, spec.dd_period) : 0;
        double unit = n_dd > 0 ? p.tau / static_cast<double>(2 * n_dd) : p.tau;
        for (size_t m : p.ms) {
            double md = static_cast<double>(m);
            double wall = md * (p.tau + (instant ? 0 : (pulses + 2) * t.pulse_slot(PI / 2)));
            double dt = instant ? unit : std::max(unit > 0 ? std::min(unit / 20, 1e-3) : std::max(t.pi2_duration, 1e-7),
                                                  wall / (1 << 24));
            double samples = dt > 0 ? wall / dt : 0;
            double programs = p.tau > 0 ? 3 : 2;
            double ops = md * (pulses + 2 + static_cast<double>(n_dd));
            double per_shot = (noisy && samples > 0 ? trace_cost(samples) : 0) + ops;
            total += static_cast<double>(spec.k) * shots * programs * per_shot;
        }
    }
    return total;
}

double estimate_cost(const CampaignConfig &config) {
    double total = 0;
    for (const auto &e : config.experiments) {
        total += estimate_cost(e);
    }
    return total;
}

RecordFile simulate_experiment(const ExperimentSpec &spec, uint64_t seed, size_t index) {
    RecordFile file;
    auto points = plan_experiment(spec);
    Json h;
    h["type"] = "header";
    h["schema"] = RECORDS_SCHEMA;
    h["version"] = QMEM_VERSION;
    h["experiment_index"] = index;
    h["kind"] = std::string(experiment_kind_name(spec.kind));
    h["seed"] = seed;
    h["seed_scheme"] = "point seed = derive_seed(seed, {point}); sequence seed = derive_seed(point seed, {m, sequence})";
    h["config"] = to_json(spec);
    Json pj = Json::array();
    for (const auto &p : points) {
        Json j = to_json(p);
        j["seed"] = derive_seed(seed, {p.index});
        pj.push_back(j);
    }
    h["points"] = pj;
    file.header = h;

    for (const auto &p : points) {
        uint64_t pseed = derive_seed(seed, {p.index});
        if (!is_rb(spec.kind)) {
            auto cfg = ramsey_config(spec, p, pseed);
            log_line(std::string(experiment_kind_name(spec.kind)) + " tau=" + fmt(p.tau) + " s, " +
                     std::to_string(spec.shots) + " shots");
            RamseyResult r = cfg.echo ? run_spin_echo(cfg) : run_ramsey(cfg);
            file.ramsey.push_back({p.index, cfg.echo, pseed, r});
            continue;
        }
        for (size_t m : p.ms) {
            auto cfg = rb_config(spec, p, m, pseed);
            log_line(std::string(experiment_kind_name(spec.kind)) + " tau=" + fmt(p.tau) + " s, m=" +
                     std::to_string(m) + ", k=" + std::to_string(spec.k));
            auto res = run_rb_campaign(cfg);
            double offset = cfg.noise.field_offset;
            for (const auto *set : {&res.main, &res.reference, &res.spam}) {
                for (const auto &rec : *set) {
                    file.rb.push_back({p.index, offset, rec});
                }
            }
        }
    }
    return file;
}

Json analyze_records(const RecordFile &file, std::optional<FitModel> model) {
    HeaderInfo info = header_info(file.header);
    Json out;
    out["schema"] = FIT_SCHEMA;
    out["version"] = QMEM_VERSION;
    out["kind"] = std::string(experiment_kind_name(info.kind));
    out["seed"] = file.header.contains("seed") ? file.header["seed"] : Json();
    out["noise"] = to_json(info.noise);
    Json body;
    if (!model) {
        body = is_rb(info.kind) ? analyze_rb(file, info) : analyze_ramsey(file, info, std::nullopt);
    } else {
        switch (*model) {
            case FitModel::RB:
                body = analyze_rb(file, info);
                break;
            case FitModel::EXPONENTIAL:
            case FitModel::GAUSSIAN:
                body = analyze_ramsey(file, info,
                                      *model == FitModel::GAUSSIAN ? DecayShape::GAUSSIAN : DecayShape::EXPONENTIAL);
                break;
            case FitModel::DECOHERENCE: {
                Json base = is_rb(info.kind) ? analyze_rb(file, info) : analyze_ramsey(file, info, std::nullopt);
                auto me = memory_error_points(base["points"],
                                              is_rb(info.kind) ? CurveMethod::IRB : CurveMethod::RAMSEY);
                if (info.kind == ExperimentKind::SRB) {
                    throw SchemaError("decoherence model needs irb or ramsey records, got srb");
                }
                body = base;
                body["model"] = "decoherence";
                body.erase("decoherence_fit");
                body["decoherence_fit"] = decoherence_json(me);
                break;
            }
        }
    }
    for (auto it = body.begin(); it != body.end(); ++it) {
        out[it.key()] = it.value();
    }
    return out;
}

std::string fit_dataset(const std::string &records_path, FitModel model, const std::string &out_path) {
    RecordFile file = read_records_file(records_path);
    Json fit = analyze_records(file, model);
    std::string dest = out_path;
    if (dest.empty()) {
        fs::path p(records_path);
        dest = (p.parent_path() / (p.stem().string() + "." + std::string(fit_model_name(model)) + ".fit.json")).string();
    }
    write_file_atomic(dest, fit.dump(2) + "\n");
    return summarize_fit(fit) + " -> " + dest;
}

std::string run_campaign(const CampaignConfig &config_in, const RunOptions &opts) {
    CampaignConfig config = config_in;
    if (opts.seed) {
        config.master_seed = *opts.seed;
    }
    if (opts.budget) {
        config.budget = *opts.budget;
    }
    std::string out_dir = config.output_dir;
    if (const char *env = std::getenv("QMEM_OUT"); env && *env) {
        out_dir = env;
    }
    if (opts.out) {
        out_dir = *opts.out;
    }
    if (config.experiments.empty()) {
        throw ConfigError("campaign has no experiments");
    }
    double cost = estimate_cost(config);
    log_line("estimated cost " + fmt(cost, "%.3e") + " units, budget " + fmt(config.budget, "%.3e"));
    if (cost > config.budget) {
        throw BudgetError("estimated cost " + fmt(cost, "%.3e") + " exceeds budget " + fmt(config.budget, "%.3e") +
                          "; reduce shots, k or m, or raise the budget");
    }

    std::string started = iso_utc_now();
    fs::path root(out_dir);
    Json files = Json::array();
    Json experiments = Json::array();
    auto emit = [&](const fs::path &path, const std::string &contents) {
        write_file_atomic(path.string(), contents);
        files.push_back(file_entry(path, root, contents));
        return relative_to(path, root);
    };

    for (size_t i = 0; i < config.experiments.size(); ++i) {
        const auto &spec = config.experiments[i];
        uint64_t seed = derive_seed(config.master_seed, {i});
        std::string stem = file_stem(i, spec.kind);
        log_line("experiment " + std::to_string(i) + " (" + std::string(experiment_kind_name(spec.kind)) + ")");
        RecordFile rec = simulate_experiment(spec, seed, i);
        rec.header["campaign"] = config.name;
        rec.header["master_seed"] = config.master_seed;
        std::string rec_text = serialize_records(rec);
        Json ej;
        ej["index"] = i;
        ej["kind"] = std::string(experiment_kind_name(spec.kind));
        ej["seed"] = seed;
        ej["records"] = emit(root / "records" / (stem + ".jsonl"), rec_text);

        Json fit = analyze_records(rec);
        ej["fit"] = emit(root / "fits" / (stem + ".json"), fit.dump(2) + "\n");

        Json pts = Json::array();
        if (spec.kind == ExperimentKind::SRB) {
            pts.push_back(emit(root / "points" / (stem + "-p00.csv"), serialize_csv(srb_point_csv(fit))));
        } else if (is_rb(spec.kind)) {
            for (const auto &pj : fit["points"]) {
                size_t idx = pj["point"].get<size_t>();
                pts.push_back(emit(root / "points" / (stem + "-p" + two_digit(idx) + ".csv"),
                                   serialize_csv(rb_point_csv(pj))));
            }
        } else {
            for (const auto &l : rec.ramsey) {
                pts.push_back(emit(root / "points" / (stem + "-p" + two_digit(l.point) + ".csv"),
                                   serialize_csv(ramsey_point_csv(l))));
            }
        }
        ej["points"] = pts;
        ej["summary"] = summary_of(fit);
        log_line(ej["summary"]["text"].get<std::string>());
        experiments.push_back(ej);
    }

    Json m;
    m["schema"] = MANIFEST_SCHEMA;
    m["version"] = QMEM_VERSION;
    m["name"] = config.name;
    m["master_seed"] = config.master_seed;
    m["budget"] = config.budget;
    m["estimated_cost"] = cost;
    m["schemas"] = Json{{"records", RECORDS_SCHEMA}, {"fit", FIT_SCHEMA}, {"manifest", MANIFEST_SCHEMA},
                        {"figure", FIGURE_SCHEMA}};
    Json echo = Json::array();
    for (const auto &e : config.experiments) {
        echo.push_back(to_json(e));
    }
    m["config"] = echo;
    m["experiments"] = experiments;
    m["files"] = files;
    m["started"] = started;
    m["finished"] = iso_utc_now();
    fs::path manifest = root / "manifest.json";
    write_file_atomic(manifest.string(), m.dump(2) + "\n");
    return manifest.string();
}

Json verify_manifest(const std::string &manifest_path) {
    Json m;
    try {
        m = Json::parse(read_file(manifest_path));
    } catch (const Json::parse_error &e) {
        throw SchemaError(manifest_path + ": malformed JSON (" + e.what() + ")");
    }
    if (m.value("schema", std::string()) != MANIFEST_SCHEMA) {
        throw SchemaError(manifest_path + ": field 'schema': expected " + std::string(MANIFEST_SCHEMA));
    }
    fs::path root = fs::path(manifest_path).parent_path();
    for (const auto &f : m.at("files")) {
        std::string rel = f.at("path").get<std::string>();
        fs::path p = root / rel;
        if (!fs::exists(p)) {
            throw std::runtime_error("manifest lists missing file " + rel);
        }
        std::string contents = read_file(p.string());
        if (sha256_hex(contents) != f.at("sha256").get<std::string>()) {
            throw std::runtime_error("checksum mismatch for " + rel);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Figure data

namespace {

struct LoadedExperiment {
    ExperimentKind kind;
    RecordFile records;
    Json fit;
};

std::vector<double> log_grid(double lo_exp, double hi_exp, int per_decade) {
    std::vector<double> out;
    int n = static_cast<int>(std::lround((hi_exp - lo_exp) * per_decade));
    for (int i = 0; i <= n; ++i) {
        out.push_back(std::pow(10.0, lo_exp + static_cast<double>(i) / per_decade));
    }
    return out;
}

CsvTable figure_table(std::string_view figure, const std::string &series) {
    CsvTable t;
    t.comments.push_back(std::string("schema=") + FIGURE_SCHEMA + " figure=" + std::string(figure) +
                         " series=" + series);
    return t;
}

}  // namespace

std::vector<std::string> emit_figure_data(const std::string &manifest_path, std::string_view which,
                                          const std::string &out_dir) {
    if (which != "fig1b" && which != "fig2b" && which != "fig3c") {
        throw std::invalid_argument("unknown figure '" + std::string(which) + "' (expected fig1b, fig2b or fig3c)");
    }
    Json m = verify_manifest(manifest_path);
    fs::path root = fs::path(manifest_path).parent_path();
    std::vector<LoadedExperiment> exps;
    for (const auto &e : m.at("experiments")) {
        LoadedExperiment le;
        le.kind = parse_experiment_kind(e.at("kind").get<std::string>());
        le.records = read_records_file((root / e.at("records").get<std::string>()).string());
        le.fit = Json::parse(read_file((root / e.at("fit").get<std::string>()).string()));
        exps.push_back(std::move(le));
    }
    auto have = [&](ExperimentKind k) {
        return std::any_of(exps.begin(), exps.end(), [&](const auto &e) { return e.kind == k; });
    };
    fs::path dest = out_dir.empty() ? root / "figures" : fs::path(out_dir);
    std::vector<std::string> written;
    auto write = [&](const std::string &name, const CsvTable &t) {
        fs::path p = dest / (std::string(which) + "-" + name + ".csv");
        write_file_atomic(p.string(), serialize_csv(t));
        written.push_back(p.string());
    };

    if (which == "fig1b") {
        if (!have(ExperimentKind::RAMSEY) && !have(ExperimentKind::SPIN_ECHO)) {
            throw std::runtime_error("fig1b needs ramsey or spin-echo data; the manifest has none");
        }
        for (const auto &e : exps) {
            if (is_rb(e.kind)) {
                continue;
            }
            std::string name = std::string(experiment_kind_name(e.kind)) + "-" +
                               two_digit(e.records.header.at("experiment_index").get<size_t>());
            CsvTable t = figure_table(which, name);
            t.columns = {"tau_r", "contrast_loss", "sigma"};
            double tmax = 0;
            for (const auto &l : e.records.ramsey) {
                t.rows.push_back({l.result.tau_r, l.result.contrast_loss, l.result.sigma});
                tmax = std::max(tmax, l.result.tau_r);
            }
            write(name, t);

            NoiseModel noise = noise_model_from_json(e.fit.at("noise"));
            CsvTable mt = figure_table(which, name + "-model");
            mt.columns = {"tau_r", "contrast_loss_predicted", "contrast_loss_fit"};
            bool have_fit = e.fit.contains("decay_fit") && !e.fit["decay_fit"].contains("error");
            double T = have_fit ? e.fit["decay_fit"]["T"].get<double>() : 0;
            bool gauss = e.fit.value("model", std::string()) == "gaussian";
            for (int i = 1; i <= 100; ++i) {
                double tau = tmax * i / 100.0;
                double pred = 3 * predict_memory_error(noise, tau);
                double fit = std::nan("");
                if (have_fit) {
                    double x = tau / T;
                    fit = 1 - std::exp(gauss ? -x * x : -x);
                }
                mt.rows.push_back({tau, pred, fit});
            }
            write(name + "-model", mt);
        }
    } else if (which == "fig2b") {
        if (!have(ExperimentKind::SRB)) {
            throw std::runtime_error("fig2b needs srb data; the manifest has none");
        }
        for (const auto &e : exps) {
            if (e.kind != ExperimentKind::SRB) {
                continue;
            }
            std::string name = "srb-" + two_digit(e.records.header.at("experiment_index").get<size_t>());
            CsvTable seqs = figure_table(which, name + "-sequences");
            seqs.columns = {"m", "fidelity"};
            double mmax = 0;
            for (const auto &l : e.records.rb) {
                if (l.rec.kind == RecordKind::SRB) {
                    seqs.rows.push_back({static_cast<double>(l.rec.m), l.rec.fidelity});
                    mmax = std::max(mmax, static_cast<double>(l.rec.m));
                }
            }
            write(name + "-sequences", seqs);
            CsvTable means = figure_table(which, name + "-means");
            means.columns = {"m", "fidelity", "sem"};
            for (const auto &p : e.fit.at("points")) {
                means.rows.push_back({p["m"].get<double>(), p["fidelity"].get<double>(), p["sem"].get<double>()});
            }
            write(name + "-means", means);
            if (!e.fit.at("fit").contains("error")) {
                RbDecayFit f = rb_fit_from_json(e.fit["fit"]);
                CsvTable mt = figure_table(which, name + "-model");
                mt.columns = {"m", "fidelity"};
                for (int i = 0; i <= 100; ++i) {
                    double mm = mmax * i / 100.0;
                    mt.rows.push_back({mm, f.model(mm)});
                }
                write(name + "-model", mt);
            }
        }
    } else {
        if (!have(ExperimentKind::IRB)) {
            throw std::runtime_error("fig3c needs irb data; the manifest has none");
        }
        std::optional<NoiseModel> model_noise;
        std::optional<DecoherenceFit> fitted;
        std::set<double> offsets;
        for (const auto &e : exps) {
            if (!is_rb(e.kind) || e.kind == ExperimentKind::SRB) {
                continue;
            }
            auto series = [&](const std::string &name, double offset, bool filter) {
                CsvTable t = figure_table(which, name);
                t.columns = {"tau", "eps_m", "sigma", "predicted"};
                for (const auto &p : e.fit.at("points")) {
                    if (filter && p["field_offset"].get<double>() != offset) {
                        continue;
                    }
                    if (!p.contains("eps_m")) {
                        continue;
                    }
                    t.rows.push_back({p["tau"].get<double>(), p["eps_m"].get<double>(), p["sigma_eps"].get<double>(),
                                      p["predicted"].get<double>()});
                }
                write(name, t);
            };
            if (e.kind == ExperimentKind::IRB) {
                series("irb", 0, false);
                if (!model_noise) {
                    model_noise = noise_model_from_json(e.fit.at("noise"));
                }
                if (!fitted && e.fit.contains("decoherence_fit") && !e.fit["decoherence_fit"].contains("error")) {
                    fitted = decoherence_fit_from_json(e.fit["decoherence_fit"]);
                }
            } else if (e.kind == ExperimentKind::IRB_DD) {
                series("irb+dd", 0, false);
            } else {
                for (const auto &p : e.fit.at("points")) {
                    offsets.insert(p["field_offset"].get<double>());
                }
                for (double b : offsets) {
                    series("field-" + fmt(b, "%g") + "mG", b, true);
                }
            }
        }
        auto grid = log_grid(-4, 1, 20);
        CsvTable mt = figure_table(which, "model");
        mt.columns = {"tau", "eps_m_model", "eps_m_fit"};
        NoiseModel base = *model_noise;
        base.field_offset = 0;
        base.static_detuning = 0;
        for (double tau : grid) {
            mt.rows.push_back({tau, predict_memory_error(base, tau),
                               fitted ? predict_memory_error(fitted->model(), tau) : std::nan("")});
        }
        write("model", mt);
        for (double b : offsets) {
            CsvTable dt = figure_table(which, "detuning-" + fmt(b, "%g") + "mG");
            dt.comments.push_back("delta_f=" + fmt(detuning_from_field(b, base.field), "%.12g"));
            dt.columns = {"tau", "eps_m_static"};
            NoiseModel st{};
            st.field_offset = b;
            for (double tau : grid) {
                dt.rows.push_back({tau, predict_memory_error(st, tau)});
            }
            write("detuning-" + fmt(b, "%g") + "mG", dt);
        }
    }
    return written;
}

}  // namespace qmem
