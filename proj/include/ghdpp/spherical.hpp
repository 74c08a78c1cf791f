#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ghdpp/rng.hpp"

namespace ghdpp::spherical {

/// C_n^{(lambda)}(x), lambda > 0, with C_0 = 1 and C_1 = 2 lambda x.
double gegenbauer(int n, double lambda, double x);
double chebyshev_t(int n, double x);
double chebyshev_u(int n, double x);

/// Upper bound |C_n^{(lambda)}(x)| <= c_{2n,2lambda} x^2 + c_{n,lambda} (1 - x^2) on [-1, 1],
/// c_{n,lambda} = Gamma(n/2 + lambda) / (Gamma(lambda) Gamma(n/2 + 1)).
double gegenbauer_envelope(int n, double lambda, double x);

/// Degree tuple of a spherical orthonormal function on R^d, d >= 2.
/// The last entry selects the T (0) or U (1) branch of the planar factor.
class SphericalIndex {
  public:
    explicit SphericalIndex(std::vector<int> degrees);

    int dim() const { return static_cast<int>(n_.size()); }
    const std::vector<int>& degrees() const { return n_; }
    /// j is 1-based, 1 <= j <= d - 2.
    double lambda(int j) const;
    int beta(int j) const;
    /// 1/2 when n_{d-1} + n_d > 0, else 1.
    double a() const;

  private:
    std::vector<int> n_;
};

/// Gaussian-orthonormal function built from the sphere basis; depends on x only
/// through x / |x|. Throws std::domain_error at x = 0.
double phi_spherical(const SphericalIndex& index, const Eigen::VectorXd& x);

/// log of the uniform bound M on phi^2:
///   M = (1/a) prod_j (n_j + lambda_j)/lambda_j * B((d-j)/2, 1/2)/B((d-j)/2 + beta_j, 1/2)
///       * (2 lambda_j)_{n_j} / n_j!
double log_bound_M(const SphericalIndex& index);
double bound_M(const SphericalIndex& index);

struct AcceptanceReport {
    std::vector<int> index;
    double bound = 0.0;
    double log_bound = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t accepts = 0;
    std::uint64_t violations = 0;  // draws with phi^2 > M
    double max_phi_sq = 0.0;

    double acceptance() const { return trials ? static_cast<double>(accepts) / static_cast<double>(trials) : 0.0; }
    nlohmann::json to_json() const;
};

inline constexpr double kLogReportThreshold = 1e3;

/// Rejection sampler for phi^2 N(0, I) with proposal N(0, I): accept when u M <= phi^2.
AcceptanceReport acceptance_report(const SphericalIndex& index, int trials, Stream& rng);

/// One accepted draw from phi^2(x) N(x; 0, I).
Eigen::VectorXd sample(const SphericalIndex& index, Stream& rng, std::uint64_t* proposals = nullptr);

}  // namespace ghdpp::spherical
