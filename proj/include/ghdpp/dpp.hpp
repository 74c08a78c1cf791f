#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

#include "ghdpp/basis.hpp"
#include "ghdpp/rmt.hpp"
#include "ghdpp/rng.hpp"

namespace ghdpp::dpp {

/// Rejection counters for each stage of the sampler.
struct StageCounters {
    rmt::RejectionCounters rho;      // univariate rho_n draws
    rmt::RejectionCounters general;  // f_N from the factorised q_n
    rmt::RejectionCounters chain;    // chain-rule conditionals
    std::uint64_t jitter_events = 0;
    std::uint64_t restarts = 0;

    StageCounters& operator+=(const StageCounters& o);
};

struct DppSample {
    int dim = 0;
    int n_points = 0;
    Eigen::MatrixXd points;  // n_points x dim, one point per row
    std::uint64_t seed = 0;
    StageCounters counters;
};

/// Thrown when the conditional residual K(x,x) - |z|^2 goes clearly negative.
class DegeneracyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kResidualTolerance = 1e-8;
inline constexpr double kPivotFloor = 1e-12;
inline constexpr double kPivotJitter = 1e-10;
inline constexpr int kMaxJitterEvents = 3;

/// Accepted points of a chain-rule run and the Cholesky factor of their Gram
/// matrix K_k, extended by one row per accepted point.
class ChainState {
  public:
    explicit ChainState(int capacity, int feature_size);

    int size() const { return k_; }
    int capacity() const { return static_cast<int>(chol_.rows()); }

    /// z = L^{-1} k_k(x) for a candidate with the given feature vector.
    Eigen::VectorXd solve(const Eigen::VectorXd& features) const;

    /// Appends a point. Returns true if the new pivot needed jitter.
    bool push(const Eigen::VectorXd& features, const Eigen::VectorXd& z, double residual);

    Eigen::MatrixXd factor() const { return chol_.topLeftCorner(k_, k_); }
    Eigen::MatrixXd gram() const;

  private:
    Eigen::MatrixXd features_;  // capacity x feature_size
    Eigen::MatrixXd chol_;      // capacity x capacity, lower triangle used
    int k_ = 0;
};

/// Smallest n with n^d >= N.
int grid_side(int N, int d);

/// Point from f_{n^d}: coordinates i.i.d. from rho_n.
Eigen::VectorXd sample_f_power(int n, int d, Stream& rng, rmt::CalibrationTable& table = rmt::CalibrationTable::shared(),
                               StageCounters* counters = nullptr);

/// Gauss-Hermite projection DPP sampler for fixed (N, d).
///
/// Layers, innermost first: rho_n by mixture rejection; q_n as a product of
/// rho_n draws; f_N by rejection from q_n with bound n^d / N; then the chain
/// rule, where point k+1 is proposed from f_N and accepted with probability
/// 1 - |L^{-1} k_k(x)|^2 / K_N(x,x).
class Sampler {
  public:
    Sampler(int n_points, int dim, rmt::CalibrationTable& table = rmt::CalibrationTable::shared());

    int n_points() const { return n_points_; }
    int dim() const { return dim_; }
    int side() const { return side_; }
    const basis::KernelEval& kernel() const { return kernel_; }
    const rmt::RejectionCalibration& calibration() const { return *calib_; }

    struct Proposal {
        Eigen::VectorXd x;
        Eigen::MatrixXd rows;  // weighted psi rows, reused for the feature vector
    };

    /// Exact draw from f_N.
    Proposal propose(Stream& rng, StageCounters& counters) const;

    /// Probability of accepting a candidate given the chain so far. Exposed for tests.
    /// Accepts plain or e^{-|x|^2/4}-weighted features; the ratio is the same.
    double conditional_acceptance(const ChainState& chain, const Eigen::VectorXd& features) const;

    DppSample sample(Stream& rng) const;

  private:
    bool try_sample(Stream& rng, DppSample& out) const;

    int n_points_;
    int dim_;
    int side_;
    basis::KernelEval kernel_;
    const rmt::RejectionCalibration* calib_;
};

Eigen::VectorXd sample_f_general(int N, int d, Stream& rng, StageCounters* counters = nullptr);

DppSample sample_dpp(int N, int d, Stream& rng);

/// 1-D shortcut: the eigenvalues of an N x N GUE draw.
DppSample sample_dpp_1d_gue(int N, Stream& rng);

}  // namespace ghdpp::dpp
