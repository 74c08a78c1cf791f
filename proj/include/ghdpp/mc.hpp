#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ghdpp/basis.hpp"
#include "ghdpp/dpp.hpp"
#include "ghdpp/rng.hpp"

namespace ghdpp::mc {

// All estimators target the unnormalised measure d mu = e^{-|x|^2/2} dx.

struct Integrand {
    int dim = 1;
    std::function<double(const Eigen::VectorXd&)> eval;
    std::optional<double> truth;

    double operator()(const Eigen::VectorXd& x) const { return eval(x); }
};

enum class Estimator { Naive, BH, EZ };

std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& name);

/// Total mass (2 pi)^{d/2} of the unnormalised Gaussian measure.
double gaussian_mass(int d);

struct EstimateReport {
    std::string estimator;
    std::vector<double> estimates;
    double mean = 0.0;
    double stddev = 0.0;
    int n_points = 0;
    int dim = 0;
    std::uint64_t seed = 0;
    int flagged = 0;  // EZ repetitions reported as ill-conditioned
    std::optional<double> truth;

    /// Recomputes mean and sample standard deviation from `estimates`.
    void finalize();
    nlohmann::json to_json() const;
};

double mean(const std::vector<double>& v);
double sample_stddev(const std::vector<double>& v);

/// (2 pi)^{d/2} / N sum f(x_i) with x_i i.i.d. N(0, I).
double naive_estimate(const Integrand& f, int N, Stream& rng);

/// sum_i f(x_i) / K_N(x_i, x_i).
double bh_estimate(const Integrand& f, const dpp::DppSample& sample, const basis::KernelEval& kernel);

inline constexpr double kEzConditionLimit = 1e12;

struct EzResult {
    double estimate = 0.0;
    double condition = 0.0;
    bool ill_conditioned = false;
};

/// Solves Phi y = f with Phi_ij = phi_{b^{-1}(j)}(x_i) and returns y_0 (2 pi)^{d/4}.
/// Rows are scaled to unit norm before a column-pivoted QR; the scaling leaves y
/// unchanged. `condition` is |R_00| / |R_{N-1,N-1}| of the scaled system.
EzResult ez_estimate(const Integrand& f, const dpp::DppSample& sample, const basis::OrderedBasis& basis);

struct EzBatch {
    Eigen::VectorXd estimates;
    double condition = 0.0;
    bool ill_conditioned = false;
};

/// EZ for several integrands sharing one sample: `values` is N x m, column j
/// holding the j-th integrand at the sample points.
EzBatch ez_estimate_values(const Eigen::MatrixXd& points, const basis::KernelEval& kernel,
                           const Eigen::MatrixXd& values);

/// BH for several integrands sharing one sample.
Eigen::VectorXd bh_estimate_values(const Eigen::MatrixXd& points, const basis::KernelEval& kernel,
                                   const Eigen::MatrixXd& values);

/// g(x) = f(L x + mean) / (2 pi)^{d/2} with cov = L L^T (Cholesky), so that
/// int g d mu = int N(x; mean, cov) f(x) dx.
Integrand gaussian_reparam(const Integrand& f, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

}  // namespace ghdpp::mc
