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

#include "qmem/analysis.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <unsupported/Eigen/LevenbergMarquardt>

namespace qmem {

namespace {

constexpr double PI = std::numbers::pi;
constexpr double LOG_MIN = -60.0;
constexpr double LOG_MAX = 10.0;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Residual and Jacobian callbacks for Eigen's MINPACK-style solver.
struct LsqProblem : Eigen::DenseFunctor<double> {
    std::function<void(const Vec &, Vec &)> f;
    std::function<void(const Vec &, Mat &)> jac;

    LsqProblem(int inputs, int values) : Eigen::DenseFunctor<double>(inputs, values) {
    }
    int operator()(const Vec &x, Vec &fvec) const {
        f(x, fvec);
        return 0;
    }
    int df(const Vec &x, Mat &fjac) const {
        jac(x, fjac);
        return 0;
    }
};

// Central-difference Jacobian.
void numeric_jacobian(const std::function<void(const Vec &, Vec &)> &f, const Vec &x, int values, Mat &out) {
    out.resize(values, x.size());
    Vec fp(values), fm(values);
    for (int j = 0; j < x.size(); j++) {
        double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        f(xp, fp);
        f(xm, fm);
        out.col(j) = (fp - fm) / (2 * h);
    }
}

struct LsqResult {
    Vec x;
    Mat cov;
    double chi2;
    int iterations;
};

// Minimizes |r(x)|^2. Relative step tolerance 1e-10, at most 200 iterations.
// The covariance is (J^T J)^-1, scaled by chi2/dof when `scale_cov`.
LsqResult least_squares(LsqProblem &prob, Vec x0, bool scale_cov) {
    Eigen::LevenbergMarquardt<LsqProblem> lm(prob);
    lm.setXtol(1e-10);
    lm.setFtol(1e-14);
    lm.setMaxfev(200 * (static_cast<int>(x0.size()) + 1));
    auto status = lm.minimize(x0);
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
        status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation) {
        throw FitError("least-squares fit did not converge (status " + std::to_string(static_cast<int>(status)) +
                       ")");
    }
    if (!x0.allFinite()) {
        throw FitError("least-squares fit diverged");
    }
    LsqResult res;
    res.x = x0;
    res.iterations = static_cast<int>(lm.iterations());
    Vec r(prob.values());
    prob(x0, r);
    res.chi2 = r.squaredNorm();
    Mat J;
    prob.df(x0, J);
    Mat jtj = J.transpose() * J;
    res.cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
    int dof = prob.values() - prob.inputs();
    if (scale_cov && dof > 0) {
        res.cov *= res.chi2 / dof;
    }
    return res;
}

// Per-point sigmas: zeros replaced by the smallest positive sigma; all zero
// means unweighted.
std::vector<double> fit_sigmas(const std::vector<double> &sem, bool &weighted) {
    double floor = 0;
    for (double s : sem) {
        if (s > 0 && (floor == 0 || s < floor)) {
            floor = s;
        }
    }
    weighted = floor > 0;
    std::vector<double> out(sem.size());
    for (size_t i = 0; i < sem.size(); i++) {
        out[i] = weighted ? std::max(sem[i], floor) : 1.0;
    }
    return out;
}

double clamp_log(double v) {
    return std::clamp(v, LOG_MIN, LOG_MAX);
}

double decoherence_model(double tau, double s_w, double s_p, double f_c) {
    double v = s_w * tau / 2;
    double arg = 0.4 / (f_c * tau);
    if (arg > 1) {
        v += s_p * tau * tau * std::log(arg);
    }
    return PI / 3 * v;
}

}  // namespace

double RbDecayFit::sigma_eps() const {
    return 0.5 * std::sqrt(std::max(0.0, var_p));
}

double RbDecayFit::sigma_spam() const {
    return 0.5 * std::sqrt(std::max(0.0, var_a));
}

double RbDecayFit::model(double m) const {
    return 0.5 * (a * std::pow(p, m) + 1);
}

RbDecayFit fit_rb_decay(std::span<const RbPoint> points) {
    std::vector<double> ms;
    for (const auto &pt : points) {
        if (!(pt.fidelity >= 0 && pt.fidelity <= 1)) {
            throw std::invalid_argument("RB fidelities must lie in [0, 1]");
        }
        if (std::find(ms.begin(), ms.end(), pt.m) == ms.end()) {
            ms.push_back(pt.m);
        }
    }
    if (ms.size() < 3) {
        throw std::invalid_argument("RB fit needs at least 3 distinct sequence lengths");
    }
    size_t n = points.size();
    std::vector<double> sem;
    for (const auto &pt : points) {
        sem.push_back(pt.sem);
    }
    RbDecayFit fit;
    auto sig = fit_sigmas(sem, fit.weighted);

    // Log-linear initial guess from y = 2F - 1 = a p^m.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto &pt : points) {
        double y = std::log(std::clamp(2 * pt.fidelity - 1, 1e-6, 1.0));
        sx += pt.m;
        sy += y;
        sxx += pt.m * pt.m;
        sxy += pt.m * y;
    }
    double dn = static_cast<double>(n);
    double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    double icpt = (sy - slope * sx) / dn;
    Vec x(2);
    x << std::clamp(std::exp(icpt), 1e-3, 1.0), std::clamp(std::exp(std::min(slope, 0.0)), 1e-6, 1.0);

    LsqProblem prob(2, static_cast<int>(n));
    prob.f = [&](const Vec &v, Vec &r) {
        for (size_t i = 0; i < n; i++) {
            double model = 0.5 * (v[0] * std::pow(v[1], points[i].m) + 1);
            r[i] = (model - points[i].fidelity) / sig[i];
        }
    };
    prob.jac = [&](const Vec &v, Mat &J) {
        J.resize(n, 2);
        for (size_t i = 0; i < n; i++) {
            double m = points[i].m;
            double pm = std::pow(v[1], m);
            J(i, 0) = 0.5 * pm / sig[i];
            J(i, 1) = m == 0 ? 0.0 : 0.5 * v[0] * m * std::pow(v[1], m - 1) / sig[i];
        }
    };
    LsqResult res = least_squares(prob, x, !fit.weighted);
    Vec sol = res.x;
    if (sol[1] > 1) {
        // Project onto p = 1; a is then a weighted mean.
        fit.at_boundary = true;
        sol[1] = 1;
        double num = 0, den = 0;
        for (size_t i = 0; i < n; i++) {
            double w = 1 / (sig[i] * sig[i]);
            num += w * (2 * points[i].fidelity - 1);
            den += w;
        }
        sol[0] = num / den;
        Vec r(n);
        prob.f(sol, r);
        res.chi2 = r.squaredNorm();
        Mat J;
        prob.jac(sol, J);
        res.cov = (J.transpose() * J).completeOrthogonalDecomposition().pseudoInverse();
        if (!fit.weighted && n > 2) {
            res.cov *= res.chi2 / static_cast<double>(n - 2);
        }
    }
    if (sol[1] < 0) {
        throw FitError("RB fit produced negative p");
    }
    fit.a = sol[0];
    fit.p = sol[1];
    fit.var_a = res.cov(0, 0);
    fit.var_p = res.cov(1, 1);
    fit.cov_pa = res.cov(0, 1);
    fit.chi2 = res.chi2;
    fit.dof = n - 2;
    fit.iterations = res.iterations;
    for (const auto &pt : points) {
        fit.residuals.push_back(pt.fidelity - fit.model(pt.m));
    }
    return fit;
}

ValueWithError extract_memory_error(const RbDecayFit &irb, const RbDecayFit &ref) {
    if (ref.p == 0) {
        throw std::invalid_argument("reference decay parameter is zero");
    }
    double ratio = irb.p / ref.p;
    double si = std::sqrt(std::max(0.0, irb.var_p));
    double sr = std::sqrt(std::max(0.0, ref.var_p));
    double a = si / ref.p;
    double b = irb.p * sr / (ref.p * ref.p);
    return {0.5 * (1 - ratio), 0.5 * std::sqrt(a * a + b * b)};
}

double contrast_loss_to_memory_error(double loss) {
    return loss / 3;
}

MemoryErrorPrediction predict_memory_error_detail(const NoiseModel &model, double tau) {
    if (!(tau > 0)) {
        throw std::invalid_argument("predict_memory_error needs tau > 0");
    }
    MemoryErrorPrediction p;
    p.white = PI / 3 * model.s_w * tau / 2;
    if (model.s_p > 0) {
        double arg = 0.4 / (model.f_c * tau);
        if (arg > 1) {
            p.pink = PI / 3 * model.s_p * tau * tau * std::log(arg);
        } else {
            p.pink_valid = false;
        }
    }
    double s = std::sin(PI * tau * model.total_static_detuning());
    p.static_term = 2.0 / 3.0 * s * s;
    p.value = p.white + p.pink + p.static_term;
    return p;
}

double predict_memory_error(const NoiseModel &model, double tau) {
    return predict_memory_error_detail(model, tau).value;
}

std::string_view curve_method_name(CurveMethod m) {
    switch (m) {
        case CurveMethod::RAMSEY:
            return "ramsey";
        case CurveMethod::IRB:
            return "irb";
        case CurveMethod::IRB_DD:
            return "irb+dd";
    }
    return "?";
}

CurveMethod parse_curve_method(std::string_view name) {
    for (auto m : {CurveMethod::RAMSEY, CurveMethod::IRB, CurveMethod::IRB_DD}) {
        if (name == curve_method_name(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown curve method '" + std::string(name) + "'");
}

NoiseModel DecoherenceFit::model() const {
    NoiseModel m;
    m.s_w = s_w;
    m.s_p = s_p;
    m.f_c = f_c;
    return m;
}

DecoherenceFit fit_decoherence_model(std::span<const MemoryErrorPoint> points) {
    size_t n = points.size();
    if (n < 4) {
        throw std::invalid_argument("decoherence fit needs at least 4 points");
    }
    double tmin = points[0].tau, tmax = points[0].tau;
    std::vector<double> sem;
    for (const auto &p : points) {
        if (!(p.tau > 0)) {
            throw std::invalid_argument("decoherence fit needs tau > 0");
        }
        tmin = std::min(tmin, p.tau);
        tmax = std::max(tmax, p.tau);
        sem.push_back(p.sigma);
    }
    if (tmax / tmin < 100 * (1 - 1e-9)) {
        throw std::invalid_argument("decoherence fit needs points spanning at least two decades in tau");
    }
    bool weighted;
    auto sig = fit_sigmas(sem, weighted);

    // Initial guess: scan f_c, solve the non-negative linear problem in (S_W, S_P).
    double best_rss = INFINITY;
    double g_sw = 0, g_sp = 0, g_fc = 0.1 / tmax;
    for (int i = 0; i <= 80; i++) {
        double fc = std::exp(std::log(1e-3 / tmax) + (std::log(0.4 / tmin) - std::log(1e-3 / tmax)) * i / 80.0);
        Eigen::MatrixXd A(n, 2);
        Eigen::VectorXd y(n);
        for (size_t k = 0; k < n; k++) {
            double t = points[k].tau;
            A(k, 0) = decoherence_model(t, 1, 0, fc) / sig[k];
            A(k, 1) = decoherence_model(t, 0, 1, fc) / sig[k];
            y[k] = points[k].eps / sig[k];
        }
        auto try_fit = [&](double sw, double sp) {
            if (sw < 0 || sp < 0) {
                return;
            }
            double rss = (A.col(0) * sw + A.col(1) * sp - y).squaredNorm();
            if (rss < best_rss) {
                best_rss = rss;
                g_sw = sw;
                g_sp = sp;
                g_fc = fc;
            }
        };
        Eigen::Vector2d sol = A.colPivHouseholderQr().solve(y);
        try_fit(sol[0], sol[1]);
        double c0 = A.col(0).squaredNorm(), c1 = A.col(1).squaredNorm();
        if (c0 > 0) {
            try_fit(std::max(0.0, A.col(0).dot(y) / c0), 0.0);
        }
        if (c1 > 0) {
            try_fit(0.0, std::max(0.0, A.col(1).dot(y) / c1));
        }
    }
    double floor = 1e-12;
    Vec x(3);
    x << clamp_log(std::log(std::max(g_sw, floor))), clamp_log(std::log(std::max(g_sp, floor))),
        clamp_log(std::log(g_fc));

    LsqProblem prob(3, static_cast<int>(n));
    prob.f = [&](const Vec &v, Vec &r) {
        double sw = std::exp(clamp_log(v[0])), sp = std::exp(clamp_log(v[1])), fc = std::exp(clamp_log(v[2]));
        for (size_t k = 0; k < n; k++) {
            r[k] = (decoherence_model(points[k].tau, sw, sp, fc) - points[k].eps) / sig[k];
        }
    };
    prob.jac = [&](const Vec &v, Mat &J) {
        numeric_jacobian(prob.f, v, static_cast<int>(n), J);
    };
    LsqResult res = least_squares(prob, x, !weighted);
    DecoherenceFit fit;
    fit.s_w = std::exp(clamp_log(res.x[0]));
    fit.s_p = std::exp(clamp_log(res.x[1]));
    fit.f_c = std::exp(clamp_log(res.x[2]));
    for (int i = 0; i < 3; i++) {
        for (int j = 0; j < 3; j++) {
            fit.cov_log[i][j] = res.cov(i, j);
        }
    }
    fit.sigma_s_w = fit.s_w * std::sqrt(std::max(0.0, res.cov(0, 0)));
    fit.sigma_s_p = fit.s_p * std::sqrt(std::max(0.0, res.cov(1, 1)));
    fit.sigma_f_c = fit.f_c * std::sqrt(std::max(0.0, res.cov(2, 2)));
    fit.chi2 = res.chi2;
    fit.dof = n - 3;
    fit.iterations = res.iterations;
    return fit;
}

std::string_view decay_shape_name(DecayShape s) {
    return s == DecayShape::EXPONENTIAL ? "exponential" : "gaussian";
}

DecayShape parse_decay_shape(std::string_view name) {
    if (name == "exponential") {
        return DecayShape::EXPONENTIAL;
    }
    if (name == "gaussian") {
        return DecayShape::GAUSSIAN;
    }
    throw std::invalid_argument("unknown decay shape '" + std::string(name) + "'");
}

ValueWithError fit_contrast_decay(std::span<const ContrastPoint> points, DecayShape shape) {
    size_t n = points.size();
    if (n < 3) {
        throw std::invalid_argument("contrast decay fit needs at least 3 points");
    }
    double power = shape == DecayShape::EXPONENTIAL ? 1.0 : 2.0;
    std::vector<double> sem, guesses;
    for (const auto &p : points) {
        if (!(p.t >= 0)) {
            throw std::invalid_argument("contrast decay times must be non-negative");
        }
        sem.push_back(p.sigma);
        if (p.t > 0 && p.loss > 0 && p.loss < 1) {
            guesses.push_back(p.t / std::pow(-std::log(1 - p.loss), 1 / power));
        }
    }
    if (guesses.empty()) {
        throw std::invalid_argument("contrast decay fit needs points with 0 < loss < 1");
    }
    std::sort(guesses.begin(), guesses.end());
    bool weighted;
    auto sig = fit_sigmas(sem, weighted);
    Vec x(1);
    x << std::log(guesses[guesses.size() / 2]);
    LsqProblem prob(1, static_cast<int>(n));
    prob.f = [&](const Vec &v, Vec &r) {
        double T = std::exp(v[0]);
        for (size_t k = 0; k < n; k++) {
            double model = 1 - std::exp(-std::pow(points[k].t / T, power));
            r[k] = (model - points[k].loss) / sig[k];
        }
    };
    prob.jac = [&](const Vec &v, Mat &J) {
        double T = std::exp(v[0]);
        J.resize(n, 1);
        for (size_t k = 0; k < n; k++) {
            double u = std::pow(points[k].t / T, power);
            J(k, 0) = -std::exp(-u) * power * u / sig[k];
        }
    };
    LsqResult res = least_squares(prob, x, !weighted);
    double T = std::exp(res.x[0]);
    return {T, T * std::sqrt(std::max(0.0, res.cov(0, 0)))};
}

double mean_of(std::span<const double> v) {
    double s = 0;
    for (double x : v) {
        s += x;
    }
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

ValueWithError bootstrap_ci(std::span<const double> values,
                            const std::function<double(std::span<const double>)> &statistic, size_t resamples,
                            uint64_t seed) {
    if (values.size() < 2) {
        throw std::invalid_argument("bootstrap needs at least 2 records");
    }
    if (resamples < 100) {
        throw std::invalid_argument("bootstrap needs at least 100 resamples");
    }
    Rng rng = make_rng(derive_seed(seed, {static_cast<uint64_t>(Stream::BOOTSTRAP)}));
    std::vector<double> buf(values.size());
    double s = 0, ss = 0;
    for (size_t r = 0; r < resamples; r++) {
        for (auto &b : buf) {
            b = values[uniform_index(rng, values.size())];
        }
        double v = statistic(buf);
        s += v;
        ss += v * v;
    }
    double R = static_cast<double>(resamples);
    double mean = s / R;
    double var = std::max(0.0, (ss - R * mean * mean) / (R - 1));
    return {statistic(values), std::sqrt(var)};
}

std::vector<RbPoint> summarize_records(std::span<const SequenceRecord> records) {
    std::map<size_t, std::vector<double>> by_m;
    for (const auto &r : records) {
        by_m[r.m].push_back(r.fidelity);
    }
    std::vector<RbPoint> out;
    for (const auto &[m, f] : by_m) {
        RbPoint p;
        p.m = static_cast<double>(m);
        p.count = f.size();
        p.fidelity = mean_of(f);
        if (f.size() > 1) {
            double ss = 0;
            for (double v : f) {
                ss += (v - p.fidelity) * (v - p.fidelity);
            }
            p.sem = std::sqrt(ss / static_cast<double>(f.size() - 1) / static_cast<double>(f.size()));
        }
        out.push_back(p);
    }
    return out;
}

std::vector<size_t> plan_sequence_lengths(double eps_pred, double target_infidelity) {
    if (!(eps_pred > 0) || !(target_infidelity > 0)) {
        throw std::invalid_argument("planner needs a positive predicted error and target");
    }
    double m_max = std::max(4.0, std::round(target_infidelity / eps_pred));
    std::vector<size_t> out;
    for (double f : {0.25, 0.5, 0.75, 1.0}) {
        size_t m = std::max<size_t>(1, static_cast<size_t>(std::llround(f * m_max)));
        if (out.empty() || m > out.back()) {
            out.push_back(m);
        }
    }
    return out;
}

}  // namespace qmem
