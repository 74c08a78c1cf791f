#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ghdpp::basis {

/// psi_0 = (2 pi)^{-1/4}, the normalised constant under e^{-x^2/2} dx.
inline const double kPsi0 = std::pow(2.0 * std::numbers::pi, -0.25);

/// Length-d tuple of non-negative degrees.
struct MultiIndex {
    std::vector<int> degrees;

    std::size_t dim() const { return degrees.size(); }
    int max_degree() const;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// Ordering used for the truncated basis: max degree first, then plain
/// lexicographic order on (i_1, ..., i_d) ascending.
bool basis_order_less(const MultiIndex& a, const MultiIndex& b);

/// Orthonormal Hermite functions psi_0..psi_{out.size()-1} at x, w.r.t. e^{-x^2/2} dx.
///
/// Uses the normalised recurrence
///   psi_{j+1}(x) = x / sqrt(j+1) psi_j(x) - sqrt(j / (j+1)) psi_{j-1}(x),
/// which never forms H_j or a factorial.
void psi_row(double x, std::span<double> out);
std::vector<double> psi_row(int j_max, double x);

/// Same recurrence started from psi_0 e^{-x^2/4}: the weighted functions are
/// bounded by ~1, so squared sums stay representable far into the tails.
void weighted_psi_row(double x, std::span<double> out);

/// First N multi-indices of dimension d under the basis ordering.
class OrderedBasis {
  public:
    OrderedBasis(int dim, int size);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(indices_.size()); }
    /// Largest single-coordinate degree appearing in the basis.
    int max_degree() const { return max_degree_; }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    const MultiIndex& operator[](int i) const { return indices_[static_cast<std::size_t>(i)]; }

  private:
    int dim_;
    int max_degree_ = 0;
    std::vector<MultiIndex> indices_;
};

OrderedBasis ordered_indices(int d, int N);

/// phi_i(x) = prod_l psi_{i_l}(x_l).
double phi(const MultiIndex& index, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Evaluator for the projection kernel K_N(x, y) = sum_{b(i) < N} phi_i(x) phi_i(y).
///
/// Evaluation goes through per-point psi rows (a d x (max_degree+1) table),
/// so callers that already hold the rows for a point can reuse them for the
/// feature vector, the diagonal and cross-kernel terms.
class KernelEval {
  public:
    explicit KernelEval(OrderedBasis basis);

    const OrderedBasis& basis() const { return basis_; }
    int dim() const { return basis_.dim(); }
    int size() const { return basis_.size(); }

    /// psi rows: row l holds psi_0..psi_{max_degree}(x_l).
    Eigen::MatrixXd rows(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    /// Rows of psi_j(x_l) e^{-x_l^2/4}; features built from them are phi(x) e^{-|x|^2/4}.
    Eigen::MatrixXd weighted_rows(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::VectorXd features_from_rows(const Eigen::MatrixXd& rows) const;
    Eigen::VectorXd features(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    double operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y) const;
    double diagonal(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    /// One row of features per point (points stored row-wise).
    Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& points) const;
    Eigen::MatrixXd gram(const Eigen::MatrixXd& points) const;

  private:
    void check_point(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    OrderedBasis basis_;
    Eigen::MatrixXi flat_;  // size x dim copy of the index degrees
};

double kernel(const KernelEval& eval, const Eigen::Ref<const Eigen::VectorXd>& x,
              const Eigen::Ref<const Eigen::VectorXd>& y);

}  // namespace ghdpp::basis
