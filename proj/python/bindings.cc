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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qmem/analysis.h"
#include "qmem/campaign.h"
#include "qmem/clifford.h"
#include "qmem/experiments.h"
#include "qmem/noise.h"

namespace py = pybind11;
using namespace qmem;

namespace {

py::dict ramsey_dict(const RamseyResult &r) {
    py::dict d;
    d["tau"] = r.tau_r;
    d["shots"] = r.shots;
    d["p_up_max"] = r.p_up_max;
    d["p_up_min"] = r.p_up_min;
    d["contrast"] = r.contrast;
    d["contrast_loss_raw"] = r.contrast_loss_raw;
    d["contrast_loss"] = r.contrast_loss;
    d["sigma"] = r.sigma;
    d["eps_up_measured"] = r.eps_up_measured;
    d["eps_down_measured"] = r.eps_down_measured;
    return d;
}

py::list records_list(const std::vector<SequenceRecord> &recs) {
    py::list out;
    for (const auto &r : recs) {
        py::dict d;
        d["kind"] = std::string(record_kind_name(r.kind));
        d["sequence"] = r.sequence;
        d["m"] = r.m;
        d["tau"] = r.tau;
        d["fidelity"] = r.fidelity;
        d["successes"] = r.successes;
        d["shots"] = r.shots();
        d["duration"] = r.duration;
        d["dd_pulses"] = r.dd_pulses;
        d["seed"] = r.seed;
        out.append(d);
    }
    return out;
}

py::dict rb_fit_dict(const RbDecayFit &f) {
    py::dict d;
    d["p"] = f.p;
    d["a"] = f.a;
    d["eps"] = f.eps();
    d["sigma_eps"] = f.sigma_eps();
    d["eps_spam"] = f.spam();
    d["sigma_eps_spam"] = f.sigma_spam();
    d["chi2"] = f.chi2;
    d["dof"] = f.dof;
    d["at_boundary"] = f.at_boundary;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qmem, m) {
    m.doc() = "Qubit memory-error simulator";
    m.attr("__version__") = QMEM_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init([](double s_w, double s_p, double f_c, double static_detuning, double field_offset) {
                 NoiseModel n;
                 n.s_w = s_w;
                 n.s_p = s_p;
                 n.f_c = f_c;
                 n.static_detuning = static_detuning;
                 n.field_offset = field_offset;
                 n.validate();
                 return n;
             }),
             py::arg("s_w") = 0.0, py::arg("s_p") = 0.0, py::arg("f_c") = 1.0, py::arg("static_detuning") = 0.0,
             py::arg("field_offset") = 0.0)
        .def_readwrite("s_w", &NoiseModel::s_w)
        .def_readwrite("s_p", &NoiseModel::s_p)
        .def_readwrite("f_c", &NoiseModel::f_c)
        .def_readwrite("static_detuning", &NoiseModel::static_detuning)
        .def_readwrite("field_offset", &NoiseModel::field_offset)
        .def("psd", &NoiseModel::psd, py::arg("f"))
        .def("physical_psd", &NoiseModel::physical_psd, py::arg("f"))
        .def("total_static_detuning", &NoiseModel::total_static_detuning)
        .def("__repr__", [](const NoiseModel &n) {
            std::ostringstream s;
            s << "NoiseModel(s_w=" << n.s_w << ", s_p=" << n.s_p << ", f_c=" << n.f_c
              << ", static_detuning=" << n.static_detuning << ", field_offset=" << n.field_offset << ")";
            return s.str();
        });

    m.def("noise_preset", &noise_preset, py::arg("name"));
    m.def("noise_preset_names", &noise_preset_names);
    m.def("stretch_noise_model",
          [](double b_rms, double offset_mg) { return stretch_noise_model(b_rms, offset_mg); },
          py::arg("b_rms_gauss"), py::arg("static_offset_mg") = 0.0);
    m.def("detuning_from_field", [](double db) { return detuning_from_field(db); }, py::arg("delta_b_mg"));

    m.def("predict_memory_error", &predict_memory_error, py::arg("noise"), py::arg("tau"));
    m.def(
        "predict_memory_error_detail",
        [](const NoiseModel &n, double tau) {
            auto p = predict_memory_error_detail(n, tau);
            py::dict d;
            d["value"] = p.value;
            d["white"] = p.white;
            d["pink"] = p.pink;
            d["static"] = p.static_term;
            d["pink_valid"] = p.pink_valid;
            return d;
        },
        py::arg("noise"), py::arg("tau"));

    m.def(
        "run_ramsey",
        [](double tau, size_t shots, const NoiseModel &noise, uint64_t seed, bool echo, double eps_spam) {
            RamseyConfig c;
            c.tau_r = tau;
            c.shots = shots;
            c.noise = noise;
            c.seed = seed;
            c.echo = echo;
            c.spam = {eps_spam, eps_spam};
            RamseyResult r;
            {
                py::gil_scoped_release release;
                r = run_ramsey(c);
            }
            return ramsey_dict(r);
        },
        py::arg("tau"), py::arg("shots") = 1000, py::arg("noise") = NoiseModel{}, py::arg("seed") = 0,
        py::arg("echo") = false, py::arg("eps_spam") = 0.0);

    m.def(
        "run_rb",
        [](size_t m_len, size_t k, double tau, const NoiseModel &noise, uint64_t seed, size_t shots,
           const std::string &gateset, std::optional<double> dd_period, double eps_inject, double eps_spam) {
            RbConfig c;
            c.m = m_len;
            c.k = k;
            c.tau = tau;
            c.noise = noise;
            c.master_seed = seed;
            c.shots = shots;
            c.gateset = parse_gate_set(gateset);
            c.dd_period = dd_period;
            c.eps_inject = eps_inject;
            c.spam = {eps_spam, eps_spam};
            RbCampaignResult r;
            {
                py::gil_scoped_release release;
                r = run_rb_campaign(c);
            }
            py::dict d;
            d["main"] = records_list(r.main);
            d["reference"] = records_list(r.reference);
            d["spam"] = records_list(r.spam);
            return d;
        },
        py::arg("m"), py::arg("k") = 50, py::arg("tau") = 0.0, py::arg("noise") = NoiseModel{}, py::arg("seed") = 0,
        py::arg("shots") = 100, py::arg("gateset") = "four-generator", py::arg("dd_period") = std::nullopt,
        py::arg("eps_inject") = 0.0, py::arg("eps_spam") = 0.0);

    m.def(
        "fit_rb_decay",
        [](const std::vector<double> &ms, const std::vector<double> &fid, std::optional<std::vector<double>> sem) {
            if (ms.size() != fid.size() || (sem && sem->size() != ms.size())) {
                throw std::invalid_argument("ms, fidelities and sem must have the same length");
            }
            std::vector<RbPoint> pts;
            for (size_t i = 0; i < ms.size(); i++) {
                pts.push_back({ms[i], fid[i], sem ? (*sem)[i] : 0.0, 1});
            }
            return rb_fit_dict(fit_rb_decay(pts));
        },
        py::arg("ms"), py::arg("fidelities"), py::arg("sem") = std::nullopt);

    m.def(
        "fit_decoherence_model",
        [](const std::vector<double> &taus, const std::vector<double> &eps, const std::vector<double> &sigma) {
            if (taus.size() != eps.size() || taus.size() != sigma.size()) {
                throw std::invalid_argument("taus, eps and sigma must have the same length");
            }
            std::vector<MemoryErrorPoint> pts;
            for (size_t i = 0; i < taus.size(); i++) {
                pts.push_back({taus[i], eps[i], sigma[i], CurveMethod::IRB});
            }
            auto f = fit_decoherence_model(pts);
            py::dict d;
            d["s_w"] = f.s_w;
            d["s_p"] = f.s_p;
            d["f_c"] = f.f_c;
            d["sigma_s_w"] = f.sigma_s_w;
            d["sigma_s_p"] = f.sigma_s_p;
            d["sigma_f_c"] = f.sigma_f_c;
            d["chi2"] = f.chi2;
            d["dof"] = f.dof;
            return d;
        },
        py::arg("taus"), py::arg("eps"), py::arg("sigma"));

    m.def(
        "clifford_group_json", [] { return CliffordGroup::instance().to_json(); });
    m.def(
        "mean_word_length",
        [](const std::string &g) { return CliffordGroup::instance().mean_word_length(parse_gate_set(g)); },
        py::arg("gateset"));

    m.def(
        "run_campaign",
        [](const std::string &config_path, std::optional<uint64_t> seed, std::optional<std::string> out,
           std::optional<double> budget) {
            CampaignConfig c = load_campaign_config(config_path);
            RunOptions o{seed, out, budget};
            py::gil_scoped_release release;
            return run_campaign(c, o);
        },
        py::arg("config"), py::arg("seed") = std::nullopt, py::arg("out") = std::nullopt,
        py::arg("budget") = std::nullopt);
    m.def(
        "estimate_cost", [](const std::string &path) { return estimate_cost(load_campaign_config(path)); },
        py::arg("config"));
    m.def(
        "fit_dataset",
        [](const std::string &records, const std::string &model, const std::string &out) {
            return fit_dataset(records, parse_fit_model(model), out);
        },
        py::arg("records"), py::arg("model") = "rb", py::arg("out") = "");
    m.def(
        "emit_figure_data",
        [](const std::string &manifest, const std::string &which, const std::string &out) {
            return emit_figure_data(manifest, which, out);
        },
        py::arg("manifest"), py::arg("which"), py::arg("out") = "");
    m.def(
        "verify_manifest", [](const std::string &p) { return verify_manifest(p).dump(); }, py::arg("manifest"));
    m.def("selftest", [] {
        std::ostringstream s;
        int code = run_selftest(s);
        return py::make_tuple(code, s.str());
    });
}
