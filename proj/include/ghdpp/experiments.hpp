#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ghdpp/mc.hpp"
#include "ghdpp/rng.hpp"

namespace ghdpp::experiments {

// ---------------------------------------------------------------------------
// Polynomial integration

/// m(i) = (i-1)!! for even i (m(0) = 1), 0 for odd i: the i-th standard normal moment.
double gaussian_moment(int i);

/// f(x) = sum_i a_i prod_k x_k^{i_k} over i in {0..degree}^d.
struct PolynomialIntegrand {
    int dim = 1;
    int degree = 0;
    /// (degree+1)^d coefficients, lexicographic over {0..degree}^d with the
    /// first coordinate most significant.
    std::vector<double> coeffs;

    double operator()(const Eigen::VectorXd& x) const;
    /// Integrand against the unnormalised measure, truth attached.
    mc::Integrand integrand() const;

    /// Coefficients i.i.d. U(-1, 1).
    static PolynomialIntegrand random(int dim, int degree, Stream& rng);
    static PolynomialIntegrand monomial(const std::vector<int>& exponents);
};

/// Integral against the normalised standard Gaussian.
double polynomial_truth(const PolynomialIntegrand& f);

struct PolyRow {
    std::string estimator;
    int n_points = 0;
    double mean = 0.0;  // normalised-measure estimates
    double stddev = 0.0;
    double truth = 0.0;
    int ill_conditioned = 0;
    std::vector<double> estimates;
};

struct PolyExperiment {
    PolynomialIntegrand polynomial;
    double truth = 0.0;
    std::vector<PolyRow> rows;
};

/// Naive, BH and EZ over an N grid; one DPP sample per (N, rep) is shared by BH and EZ.
PolyExperiment run_poly_experiment(int d, int degree, const std::vector<int>& n_grid, int reps, std::uint64_t seed,
                                   int threads = 1);

// ---------------------------------------------------------------------------
// Gaussian-process hyperparameter marginalisation

double softplus(double x);

inline constexpr double kGpNoiseVariance = 1e-2;

struct GpData {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
};

/// x = linspace(-4, 4, n), y = sin(x) + N(0, noise_sd^2).
GpData synthetic_sine_data(int n, double noise_sd, Stream& rng);

/// Midpoints of 50 equal cells on (-5, 5) by default.
Eigen::VectorXd test_grid(int n = 50, double lo = -5.0, double hi = 5.0);

/// Zero-mean GP with k(x, x') = v exp(-(x - x')^2 / l^2), v = softplus(theta_1),
/// l = softplus(theta_2), plus fixed observation noise.
class GpModel {
  public:
    GpModel(Eigen::VectorXd x, Eigen::VectorXd y, double noise_variance = kGpNoiseVariance);

    int size() const { return static_cast<int>(x_.size()); }
    double noise_variance() const { return noise_; }

    /// Log marginal likelihood and, if requested, its gradient in the raw parameters.
    double log_marginal_likelihood(const Eigen::Vector2d& theta, Eigen::Vector2d* grad = nullptr) const;

    struct Posterior {
        Eigen::VectorXd mean;
        Eigen::VectorXd stddev;  // latent function, noise excluded
    };
    Posterior posterior(const Eigen::Vector2d& theta, const Eigen::VectorXd& test_x) const;

  private:
    Eigen::MatrixXd gram(double v, double l) const;

    Eigen::VectorXd x_;
    Eigen::VectorXd y_;
    double noise_;
};

struct GpFit {
    Eigen::Vector2d theta = Eigen::Vector2d::Zero();
    double log_ml = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<Eigen::Vector2d> starts;
    std::vector<double> start_log_ml;
};

inline constexpr double kGpGradTolerance = 1e-6;
inline constexpr int kGpMaxIterations = 10000;

/// Multi-start (4) gradient ascent with Barzilai-Borwein steps and Armijo backtracking.
GpFit gp_fit(const Eigen::VectorXd& train_x, const Eigen::VectorXd& train_y, double noise_variance = kGpNoiseVariance);

struct MarginalMoments {
    Eigen::VectorXd mean;    // mu bar per test point
    Eigen::VectorXd stddev;  // sigma bar per test point
};

/// mu bar and sigma bar: the posterior mean and std averaged over
/// theta ~ N(theta_*, I), by the chosen estimator with N points.
MarginalMoments marginal_mean_std(const GpModel& model, const Eigen::Vector2d& theta_star,
                                  const Eigen::VectorXd& test_x, mc::Estimator estimator, int N, Stream& rng);

/// The seven query offsets, in units of sigma bar.
inline constexpr std::array<double, 7> kCdfLevels{-4.0, -1.96, -1.0, 0.0, 1.0, 1.96, 4.0};

struct CdfQuery {
    double x = 0.0;
    double y = 0.0;
    mc::Estimator estimator = mc::Estimator::EZ;
    int n_points = 20;
};

/// Psi(y) = int Phi((y - mu(theta + theta_*)) / sigma(theta + theta_*)) N(theta; 0, I) dtheta.
/// The raw estimate is returned unclamped.
double psi_cdf_estimate(const CdfQuery& query, const GpModel& model, const Eigen::Vector2d& theta_star, Stream& rng);

/// Psi at every (test point, level) for one draw of integration points.
/// `levels` is T x L; result is T x L.
Eigen::MatrixXd psi_cdf_batch(const GpModel& model, const Eigen::Vector2d& theta_star, const Eigen::VectorXd& test_x,
                              const Eigen::MatrixXd& levels, mc::Estimator estimator, int N, Stream& rng);

struct GpExperimentConfig {
    std::uint64_t seed = 0;
    int reps = 30;
    int n_train = 20;
    double data_noise_sd = 0.1;
    int n_test = 50;
    std::vector<int> n_grid{10, 20, 30, 40, 50};
    int reference_points = 4096;  // i.i.d. points used to place the query levels
    int threads = 1;
};

struct GpCdfCell {
    mc::Estimator estimator;
    int n_points = 0;
    /// Per-test-point, per-level std over reps (T x L) and mean estimate (T x L).
    Eigen::MatrixXd stddev;
    Eigen::MatrixXd mean;
};

struct GpExperiment {
    GpData data;
    GpFit fit;
    Eigen::VectorXd test_x;
    GpModel::Posterior point;
    MarginalMoments reference;  // defines the y levels
    MarginalMoments ez_marginal;  // EZ, N = 20, for the posterior figure
    Eigen::MatrixXd levels;       // T x L query values
    std::vector<GpCdfCell> cells;
};

GpExperiment run_gp_experiment(const GpExperimentConfig& config);

}  // namespace ghdpp::experiments
