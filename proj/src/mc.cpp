#include "ghdpp/mc.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace ghdpp::mc {

std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::Naive: return "naive";
        case Estimator::BH: return "bh";
        case Estimator::EZ: return "ez";
    }
    return "unknown";
}

Estimator parse_estimator(const std::string& name) {
    if (name == "naive") return Estimator::Naive;
    if (name == "bh") return Estimator::BH;
    if (name == "ez") return Estimator::EZ;
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

double gaussian_mass(int d) { return std::pow(2.0 * std::numbers::pi, 0.5 * d); }

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void EstimateReport::finalize() {
    mean = mc::mean(estimates);
    stddev = sample_stddev(estimates);
}

nlohmann::json EstimateReport::to_json() const {
    nlohmann::json j{{"estimator", estimator}, {"estimates", estimates}, {"mean", mean},
                     {"std", stddev},          {"n_points", n_points},   {"dim", dim},
                     {"seed", seed},           {"ill_conditioned", flagged}};
    j["truth"] = truth ? nlohmann::json(*truth) : nlohmann::json(nullptr);
    return j;
}

double naive_estimate(const Integrand& f, int N, Stream& rng) {
    if (N < 1) throw std::invalid_argument("naive_estimate: N must be >= 1");
    Eigen::VectorXd x(f.dim);
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
        for (int l = 0; l < f.dim; ++l) x[l] = rng.normal();
        sum += f(x);
    }
    return gaussian_mass(f.dim) * sum / N;
}

double bh_estimate(const Integrand& f, const dpp::DppSample& sample, const basis::KernelEval& kernel) {
    if (sample.n_points != kernel.size() || sample.dim != kernel.dim())
        throw std::invalid_argument("bh_estimate: sample does not match kernel");
    double sum = 0.0;
    for (int i = 0; i < sample.n_points; ++i) {
        const Eigen::VectorXd x = sample.points.row(i).transpose();
        const double kxx = kernel.diagonal(x);
        if (!(kxx > 0.0)) throw std::logic_error("bh_estimate: non-positive kernel diagonal");
        sum += f(x) / kxx;
    }
    return sum;
}

Eigen::VectorXd bh_estimate_values(const Eigen::MatrixXd& points, const basis::KernelEval& kernel,
                                   const Eigen::MatrixXd& values) {
    const Eigen::MatrixXd phi = kernel.feature_matrix(points);
    const Eigen::VectorXd diag = phi.rowwise().squaredNorm();
    return (values.array().colwise() / diag.array()).colwise().sum().transpose();
}

EzBatch ez_estimate_values(const Eigen::MatrixXd& points, const basis::KernelEval& kernel,
                           const Eigen::MatrixXd& values) {
    if (points.rows() != kernel.size()) throw std::invalid_argument("ez_estimate: need exactly N points");
    Eigen::MatrixXd phi = kernel.feature_matrix(points);
    Eigen::MatrixXd rhs = values;
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
        const double norm = phi.row(i).norm();
        phi.row(i) /= norm;
        rhs.row(i) /= norm;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    const auto r = qr.matrixR().diagonal().cwiseAbs();
    EzBatch out;
    out.condition = r.minCoeff() > 0.0 ? r.maxCoeff() / r.minCoeff() : std::numeric_limits<double>::infinity();
    out.ill_conditioned = !(out.condition <= kEzConditionLimit);
    const Eigen::MatrixXd y = qr.solve(rhs);
    // int phi_0 d mu = psi0^d (2 pi)^{d/2} = (2 pi)^{d/4}
    out.estimates = y.row(0).transpose() * std::pow(2.0 * std::numbers::pi, 0.25 * kernel.dim());
    return out;
}

EzResult ez_estimate(const Integrand& f, const dpp::DppSample& sample, const basis::OrderedBasis& basis) {
    if (sample.n_points != basis.size() || sample.dim != basis.dim())
        throw std::invalid_argument("ez_estimate: sample does not match basis");
    const basis::KernelEval kernel(basis);
    Eigen::MatrixXd values(sample.n_points, 1);
    for (int i = 0; i < sample.n_points; ++i) values(i, 0) = f(sample.points.row(i).transpose());
    const auto batch = ez_estimate_values(sample.points, kernel, values);
    return {batch.estimates[0], batch.condition, batch.ill_conditioned};
}

Integrand gaussian_reparam(const Integrand& f, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    const int d = f.dim;
    if (mean.size() != d || cov.rows() != d || cov.cols() != d)
        throw std::invalid_argument("gaussian_reparam: dimension mismatch");
    if (!cov.isApprox(cov.transpose(), 1e-12)) throw std::invalid_argument("gaussian_reparam: covariance not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("gaussian_reparam: covariance not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    const double mass = gaussian_mass(d);
    Integrand g;
    g.dim = d;
    g.eval = [f, L, mean, mass](const Eigen::VectorXd& x) { return f(L * x + mean) / mass; };
    return g;
}

}  // namespace ghdpp::mc
