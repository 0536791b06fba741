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

#include "qmem/records.h"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace qmem {

namespace {

[[noreturn]] void schema_fail(size_t line, const std::string &field, const std::string &what) {
    std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
    throw SchemaError(where + "field '" + field + "': " + what);
}

const Json &field(const Json &obj, const char *key, size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        schema_fail(line, key, "missing");
    }
    return *it;
}

double get_double(const Json &obj, const char *key, size_t line) {
    const Json &v = field(obj, key, line);
    if (v.is_null()) {
        return std::numeric_limits<double>::quiet_NaN();  // JSON has no NaN
    }
    if (!v.is_number()) {
        schema_fail(line, key, "expected a number");
    }
    return v.get<double>();
}

uint64_t get_uint(const Json &obj, const char *key, size_t line) {
    const Json &v = field(obj, key, line);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<int64_t>() < 0)) {
        schema_fail(line, key, "expected a non-negative integer");
    }
    return v.get<uint64_t>();
}

bool get_bool(const Json &obj, const char *key, size_t line) {
    const Json &v = field(obj, key, line);
    if (!v.is_boolean()) {
        schema_fail(line, key, "expected true or false");
    }
    return v.get<bool>();
}

std::string get_string(const Json &obj, const char *key, size_t line) {
    const Json &v = field(obj, key, line);
    if (!v.is_string()) {
        schema_fail(line, key, "expected a string");
    }
    return v.get<std::string>();
}

RbRecordLine rb_from_json(const Json &j, size_t line) {
    RbRecordLine r;
    r.point = get_uint(j, "point", line);
    r.field_offset = get_double(j, "field_offset", line);
    auto &s = r.rec;
    try {
        s.kind = parse_record_kind(get_string(j, "kind", line));
    } catch (const std::invalid_argument &e) {
        schema_fail(line, "kind", e.what());
    }
    s.sequence = get_uint(j, "sequence", line);
    s.seed = get_uint(j, "seed", line);
    s.m = get_uint(j, "m", line);
    s.tau = get_double(j, "tau", line);
    std::string target = get_string(j, "target", line);
    if (target != "up" && target != "down") {
        schema_fail(line, "target", "expected 'up' or 'down'");
    }
    s.target = target == "up" ? BasisState::UP : BasisState::DOWN;
    s.outcomes = get_string(j, "outcomes", line);
    if (s.outcomes.find_first_not_of("01") != std::string::npos) {
        schema_fail(line, "outcomes", "expected a string of '0' and '1'");
    }
    if (get_uint(j, "shots", line) != s.outcomes.size()) {
        schema_fail(line, "shots", "does not match the outcome count");
    }
    s.successes = get_uint(j, "successes", line);
    char want = s.target == BasisState::UP ? '1' : '0';
    if (static_cast<size_t>(std::count(s.outcomes.begin(), s.outcomes.end(), want)) != s.successes) {
        schema_fail(line, "successes", "does not match the outcomes");
    }
    s.fidelity = get_double(j, "fidelity", line);
    if (!(s.fidelity >= 0 && s.fidelity <= 1)) {
        schema_fail(line, "fidelity", "must lie in [0, 1]");
    }
    s.duration = get_double(j, "duration", line);
    s.dd_pulses = get_uint(j, "dd_pulses", line);
    return r;
}

RamseyRecordLine ramsey_from_json(const Json &j, size_t line) {
    RamseyRecordLine r;
    r.point = get_uint(j, "point", line);
    r.echo = get_bool(j, "echo", line);
    r.seed = get_uint(j, "seed", line);
    auto &x = r.result;
    x.tau_r = get_double(j, "tau", line);
    x.shots = get_uint(j, "shots", line);
    x.p_up_max = get_double(j, "p_up_max", line);
    x.p_up_min = get_double(j, "p_up_min", line);
    x.contrast = get_double(j, "contrast", line);
    x.contrast_loss_raw = get_double(j, "contrast_loss_raw", line);
    x.contrast_loss = get_double(j, "contrast_loss", line);
    x.sigma = get_double(j, "sigma", line);
    x.eps_up_measured = get_double(j, "eps_up", line);
    x.eps_down_measured = get_double(j, "eps_down", line);
    x.spam_measured = get_double(j, "spam", line);
    return r;
}

}  // namespace

Json to_json(const RbRecordLine &line) {
    const auto &s = line.rec;
    Json j;
    j["type"] = "rb";
    j["point"] = line.point;
    j["field_offset"] = line.field_offset;
    j["kind"] = std::string(record_kind_name(s.kind));
    j["sequence"] = s.sequence;
    j["seed"] = s.seed;
    j["m"] = s.m;
    j["tau"] = s.tau;
    j["target"] = s.target == BasisState::UP ? "up" : "down";
    j["shots"] = s.outcomes.size();
    j["successes"] = s.successes;
    j["fidelity"] = s.fidelity;
    j["duration"] = s.duration;
    j["dd_pulses"] = s.dd_pulses;
    j["outcomes"] = s.outcomes;
    return j;
}

Json to_json(const RamseyRecordLine &line) {
    const auto &x = line.result;
    Json j;
    j["type"] = "ramsey";
    j["point"] = line.point;
    j["echo"] = line.echo;
    j["seed"] = line.seed;
    j["tau"] = x.tau_r;
    j["shots"] = x.shots;
    j["p_up_max"] = x.p_up_max;
    j["p_up_min"] = x.p_up_min;
    j["contrast"] = x.contrast;
    j["contrast_loss_raw"] = x.contrast_loss_raw;
    j["contrast_loss"] = x.contrast_loss;
    j["sigma"] = x.sigma;
    j["eps_up"] = x.eps_up_measured;
    j["eps_down"] = x.eps_down_measured;
    j["spam"] = x.spam_measured;
    return j;
}

std::string serialize_records(const RecordFile &file) {
    std::string out;
    Json header = file.header;
    header["type"] = "header";
    header["schema"] = RECORDS_SCHEMA;
    out += header.dump() + "\n";
    for (const auto &r : file.ramsey) {
        out += to_json(r).dump() + "\n";
    }
    for (const auto &r : file.rb) {
        out += to_json(r).dump() + "\n";
    }
    return out;
}

RecordFile parse_records(std::istream &in) {
    RecordFile file;
    std::string text;
    size_t line = 0;
    bool have_header = false;
    while (std::getline(in, text)) {
        line++;
        if (text.empty()) {
            continue;
        }
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error &e) {
            throw SchemaError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
        }
        if (!j.is_object()) {
            throw SchemaError("line " + std::to_string(line) + ": expected a JSON object");
        }
        std::string type = get_string(j, "type", line);
        if (!have_header) {
            if (type != "header") {
                schema_fail(line, "type", "first line must be the header");
            }
            if (get_string(j, "schema", line) != RECORDS_SCHEMA) {
                schema_fail(line, "schema", std::string("expected ") + RECORDS_SCHEMA);
            }
            file.header = j;
            have_header = true;
        } else if (type == "rb") {
            file.rb.push_back(rb_from_json(j, line));
        } else if (type == "ramsey") {
            file.ramsey.push_back(ramsey_from_json(j, line));
        } else {
            schema_fail(line, "type", "unknown record type '" + type + "'");
        }
    }
    if (!have_header) {
        throw SchemaError("records file is empty");
    }
    return file;
}

RecordFile read_records_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open records file " + path);
    }
    return parse_records(in);
}

Json to_json(const RbDecayFit &fit) {
    Json j;
    j["p"] = fit.p;
    j["a"] = fit.a;
    j["var_p"] = fit.var_p;
    j["var_a"] = fit.var_a;
    j["cov_pa"] = fit.cov_pa;
    j["eps"] = fit.eps();
    j["sigma_eps"] = fit.sigma_eps();
    j["spam"] = fit.spam();
    j["sigma_spam"] = fit.sigma_spam();
    j["chi2"] = fit.chi2;
    j["dof"] = fit.dof;
    j["iterations"] = fit.iterations;
    j["weighted"] = fit.weighted;
    j["at_boundary"] = fit.at_boundary;
    j["residuals"] = fit.residuals;
    return j;
}

RbDecayFit rb_fit_from_json(const Json &j) {
    RbDecayFit f;
    f.p = get_double(j, "p", 0);
    f.a = get_double(j, "a", 0);
    f.var_p = get_double(j, "var_p", 0);
    f.var_a = get_double(j, "var_a", 0);
    f.cov_pa = get_double(j, "cov_pa", 0);
    f.chi2 = get_double(j, "chi2", 0);
    f.dof = get_uint(j, "dof", 0);
    f.iterations = static_cast<int>(get_uint(j, "iterations", 0));
    f.weighted = get_bool(j, "weighted", 0);
    f.at_boundary = get_bool(j, "at_boundary", 0);
    for (const auto &v : field(j, "residuals", 0)) {
        f.residuals.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    return f;
}

Json to_json(const DecoherenceFit &fit) {
    Json j;
    j["s_w"] = fit.s_w;
    j["s_p"] = fit.s_p;
    j["f_c"] = fit.f_c;
    j["sigma_s_w"] = fit.sigma_s_w;
    j["sigma_s_p"] = fit.sigma_s_p;
    j["sigma_f_c"] = fit.sigma_f_c;
    Json cov = Json::array();
    for (const auto &row : fit.cov_log) {
        cov.push_back(row);
    }
    j["cov_log"] = cov;
    j["chi2"] = fit.chi2;
    j["dof"] = fit.dof;
    j["iterations"] = fit.iterations;
    return j;
}

DecoherenceFit decoherence_fit_from_json(const Json &j) {
    DecoherenceFit f;
    f.s_w = get_double(j, "s_w", 0);
    f.s_p = get_double(j, "s_p", 0);
    f.f_c = get_double(j, "f_c", 0);
    f.sigma_s_w = get_double(j, "sigma_s_w", 0);
    f.sigma_s_p = get_double(j, "sigma_s_p", 0);
    f.sigma_f_c = get_double(j, "sigma_f_c", 0);
    const Json &cov = field(j, "cov_log", 0);
    for (size_t r = 0; r < 3; r++) {
        for (size_t c = 0; c < 3; c++) {
            f.cov_log[r][c] = cov.at(r).at(c).get<double>();
        }
    }
    f.chi2 = get_double(j, "chi2", 0);
    f.dof = get_uint(j, "dof", 0);
    f.iterations = static_cast<int>(get_uint(j, "iterations", 0));
    return f;
}

Json to_json(const NoiseModel &m) {
    Json j;
    j["s_w"] = m.s_w;
    j["s_p"] = m.s_p;
    j["f_c"] = m.f_c;
    j["static_detuning"] = m.static_detuning;
    j["field_offset"] = m.field_offset;
    j["cutoff"] = std::string(cutoff_mode_name(m.cutoff));
    return j;
}

NoiseModel noise_model_from_json(const Json &j) {
    NoiseModel m;
    m.s_w = get_double(j, "s_w", 0);
    m.s_p = get_double(j, "s_p", 0);
    m.f_c = get_double(j, "f_c", 0);
    m.static_detuning = get_double(j, "static_detuning", 0);
    m.field_offset = get_double(j, "field_offset", 0);
    m.cutoff = parse_cutoff_mode(get_string(j, "cutoff", 0));
    return m;
}

std::string serialize_csv(const CsvTable &t) {
    std::string out;
    for (const auto &c : t.comments) {
        out += "# " + c + "\n";
    }
    for (size_t i = 0; i < t.columns.size(); i++) {
        out += (i ? "," : "") + t.columns[i];
    }
    out += "\n";
    char buf[40];
    for (const auto &row : t.rows) {
        for (size_t i = 0; i < row.size(); i++) {
            std::snprintf(buf, sizeof(buf), "%.12g", row[i]);
            out += (i ? "," : "") + std::string(buf);
        }
        out += "\n";
    }
    return out;
}

CsvTable parse_csv(std::istream &in) {
    CsvTable t;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            t.comments.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (t.columns.empty()) {
            t.columns = cells;
            continue;
        }
        if (cells.size() != t.columns.size()) {
            throw SchemaError("line " + std::to_string(lineno) + ": expected " + std::to_string(t.columns.size()) +
                              " columns");
        }
        std::vector<double> row;
        for (size_t i = 0; i < cells.size(); i++) {
            try {
                size_t used = 0;
                row.push_back(std::stod(cells[i], &used));
                if (used != cells[i].size()) {
                    throw std::invalid_argument("trailing characters");
                }
            } catch (const std::exception &) {
                schema_fail(lineno, t.columns[i], "expected a number, got '" + cells[i] + "'");
            }
        }
        t.rows.push_back(std::move(row));
    }
    if (t.columns.empty()) {
        throw SchemaError("CSV file has no header row");
    }
    return t;
}

void write_file_atomic(const std::string &path, const std::string &contents) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp);
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed for " + tmp);
        }
    }
    fs::rename(tmp, p);
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(const std::string &data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; i++) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace qmem
