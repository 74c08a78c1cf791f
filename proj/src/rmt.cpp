#include "ghdpp/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "ghdpp/basis.hpp"

namespace ghdpp::rmt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kProposalSd = 0.8;

double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}

// Proposal for the radius-2 semicircle.
double semicircle_proposal_pdf(double y) {
    return 0.5 * (normal_pdf(y, -1.0, kProposalSd) + normal_pdf(y, 1.0, kProposalSd));
}

double semicircle_radius2_pdf(double y) { return y * y < 4.0 ? std::sqrt(4.0 - y * y) / (2.0 * kPi) : 0.0; }

void require_n(int n, const char* what) {
    if (n < 1) throw std::invalid_argument(std::string(what) + ": n must be >= 1");
}

}  // namespace

SpectrumSample sample_gue_spectrum(int n, Stream& rng, GueMethod method) {
    require_n(n, "sample_gue_spectrum");
    SpectrumSample out;
    out.n = n;
    if (method == GueMethod::Tridiagonal) {
        Eigen::VectorXd diag(n);
        Eigen::VectorXd sub(std::max(n - 1, 0));
        for (int i = 0; i < n; ++i) diag[i] = rng.normal();
        for (int k = 0; k + 1 < n; ++k) sub[k] = rng.chi(2.0 * (n - 1 - k)) / std::numbers::sqrt2;
        if (n == 1) {
            out.eigenvalues = {diag[0]};
            return out;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
        out.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
        return out;
    }
    Eigen::MatrixXcd x(n, n);
    const double off_sd = std::sqrt(0.5);
    for (int i = 0; i < n; ++i) {
        x(i, i) = rng.normal();
        for (int j = i + 1; j < n; ++j) {
            const std::complex<double> z(rng.normal(0.0, off_sd), rng.normal(0.0, off_sd));
            x(i, j) = z;
            x(j, i) = std::conj(z);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(x, Eigen::EigenvaluesOnly);
    out.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    return out;
}

double rho_pdf(int n, double x) {
    require_n(n, "rho_pdf");
    thread_local std::vector<double> row;
    row.resize(static_cast<std::size_t>(n));
    basis::weighted_psi_row(x, row);
    double s = 0.0;
    for (double v : row) s += v * v;
    return s / n;
}

double sample_rho_oracle(int n, Stream& rng) {
    const auto spectrum = sample_gue_spectrum(n, rng);
    return spectrum.eigenvalues[rng.index(spectrum.eigenvalues.size())];
}

double semicircle_pdf(double x) { return x * x < 2.0 ? std::sqrt(2.0 - x * x) / kPi : 0.0; }

double sample_semicircle(Stream& rng, RejectionCounters* counters) {
    while (true) {
        const double centre = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double y = centre + kProposalSd * rng.normal();
        const double ratio = semicircle_radius2_pdf(y) / semicircle_proposal_pdf(y);
        if (ratio > kSemicircleBound) throw CalibrationError("semicircle proposal ratio exceeds 1.42");
        if (counters) ++counters->proposals;
        if (rng.uniform() * kSemicircleBound <= ratio) {
            if (counters) ++counters->accepts;
            return y / std::numbers::sqrt2;
        }
    }
}

double mixture_p(int n) {
    require_n(n, "mixture_p");
    const double nd = n;
    const double p = 0.100 - 0.486 / nd + 0.647 / std::sqrt(nd) + 0.272 / std::pow(nd, 0.25);
    return std::clamp(p, 1e-6, 1.0 - 1e-6);
}

double bound_M(int n) {
    require_n(n, "bound_M");
    const double nd = n;
    return 0.492 + 1.058 / nd - 3.352 / std::sqrt(nd) + 3.308 / std::pow(nd, 0.25);
}

double student_t_pdf(double x, double nu) {
    const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * kPi);
    return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double mixture_pdf(int n, double x, double nu) {
    const double scale = std::sqrt(2.0 * n);
    const double u = x / scale;
    const double p = mixture_p(n);
    return (p * student_t_pdf(u, nu) + (1.0 - p) * semicircle_pdf(u)) / scale;
}

double sample_mixture(int n, Stream& rng, double nu) {
    const double scale = std::sqrt(2.0 * n);
    const double u = rng.uniform() < mixture_p(n) ? rng.student_t(nu) : sample_semicircle(rng);
    return scale * u;
}

namespace {

double propose_and_test(int n, const RejectionCalibration& calib, Stream& rng, bool& accepted) {
    const double x = sample_mixture(n, rng, calib.dof_nu);
    const double ratio = rho_pdf(n, x) / mixture_pdf(n, x, calib.dof_nu);
    if (!(ratio <= calib.bound_M))
        throw CalibrationError("rho_" + std::to_string(n) + " / proposal = " + std::to_string(ratio) +
                               " exceeds bound " + std::to_string(calib.bound_M) + " at x = " + std::to_string(x));
    accepted = rng.uniform() * calib.bound_M <= ratio;
    return x;
}

}  // namespace

RejectionCalibration calibrate(int n, double grid_half_width_pad, int grid_points, double nu) {
    require_n(n, "calibrate");
    if (grid_points < 3) throw std::invalid_argument("calibrate: grid_points must be >= 3");
    RejectionCalibration c;
    c.n = n;
    c.mixture_p = mixture_p(n);
    c.dof_nu = nu;
    c.grid_points = grid_points;
    c.grid_half_width_pad = grid_half_width_pad;

    const double half = 2.0 * std::sqrt(static_cast<double>(n)) + grid_half_width_pad;
    double max_ratio = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double x = -half + 2.0 * half * i / (grid_points - 1);
        const double ratio = rho_pdf(n, x) / mixture_pdf(n, x, nu);
        if (!std::isfinite(ratio))
            throw CalibrationError("calibrate: non-finite ratio at x = " + std::to_string(x));
        max_ratio = std::max(max_ratio, ratio);
    }
    c.grid_max = kGridSafety * max_ratio;
    c.bound_M = std::max(bound_M(n), c.grid_max);

    Stream rng(splitmix64(0xCA11B7A7EULL + static_cast<std::uint64_t>(n)));
    int accepts = 0;
    for (int t = 0; t < kAcceptanceTrials; ++t) {
        bool ok = false;
        propose_and_test(n, c, rng, ok);
        accepts += ok;
    }
    c.measured_acceptance = static_cast<double>(accepts) / kAcceptanceTrials;
    return c;
}

double sample_rho(int n, const RejectionCalibration& calib, Stream& rng, RejectionCounters* counters) {
    if (calib.n != n) throw std::invalid_argument("sample_rho: calibration is for a different n");
    while (true) {
        bool ok = false;
        const double x = propose_and_test(n, calib, rng, ok);
        if (counters) ++counters->proposals;
        if (ok) {
            if (counters) ++counters->accepts;
            return x;
        }
    }
}

nlohmann::json to_json(const RejectionCalibration& c) {
    return {{"n", c.n},
            {"p", c.mixture_p},
            {"nu", c.dof_nu},
            {"bound", c.bound_M},
            {"grid_max", c.grid_max},
            {"acceptance", c.measured_acceptance},
            {"grid_points", c.grid_points},
            {"grid_half_width_pad", c.grid_half_width_pad}};
}

RejectionCalibration calibration_from_json(const nlohmann::json& j) {
    RejectionCalibration c;
    c.n = j.at("n").get<int>();
    c.mixture_p = j.at("p").get<double>();
    c.dof_nu = j.at("nu").get<double>();
    c.bound_M = j.at("bound").get<double>();
    c.grid_max = j.value("grid_max", 0.0);
    c.measured_acceptance = j.at("acceptance").get<double>();
    c.grid_points = j.at("grid_points").get<int>();
    c.grid_half_width_pad = j.value("grid_half_width_pad", 10.0);
    if (c.n < 1 || !(c.bound_M > 1.0) || !(c.mixture_p > 0.0 && c.mixture_p < 1.0) || !(c.dof_nu > 0.0))
        throw std::invalid_argument("calibration entry out of range for n = " + std::to_string(c.n));
    return c;
}

const RejectionCalibration& CalibrationTable::get(int n) {
    std::lock_guard lock(mutex_);
    auto it = table_.find(n);
    if (it == table_.end()) it = table_.emplace(n, calibrate(n)).first;
    return it->second;
}

void CalibrationTable::insert(const RejectionCalibration& c) {
    std::lock_guard lock(mutex_);
    table_[c.n] = c;
}

std::vector<RejectionCalibration> CalibrationTable::entries() const {
    std::lock_guard lock(mutex_);
    std::vector<RejectionCalibration> out;
    for (const auto& [n, c] : table_) out.push_back(c);
    return out;
}

nlohmann::json CalibrationTable::to_json(const std::string& created) const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : entries()) {
        auto j = rmt::to_json(c);
        j["created"] = created;
        arr.push_back(std::move(j));
    }
    return arr;
}

CalibrationTable CalibrationTable::from_json(const nlohmann::json& j) {
    CalibrationTable t;
    for (const auto& e : j) t.insert(calibration_from_json(e));
    return t;
}

CalibrationTable CalibrationTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open calibration table " + path);
    return from_json(nlohmann::json::parse(in));
}

CalibrationTable& CalibrationTable::shared() {
    static CalibrationTable table;
    return table;
}

}  // namespace ghdpp::rmt
