#include "ghdpp/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace ghdpp::basis {

int MultiIndex::max_degree() const {
    return degrees.empty() ? 0 : *std::max_element(degrees.begin(), degrees.end());
}

bool basis_order_less(const MultiIndex& a, const MultiIndex& b) {
    const int ma = a.max_degree();
    const int mb = b.max_degree();
    if (ma != mb) return ma < mb;
    return a.degrees < b.degrees;
}

namespace {

struct RecurrenceTable {
    static constexpr std::size_t kSize = 4096;
    std::array<double, kSize> inv_sqrt;  // 1 / sqrt(j + 1)
    std::array<double, kSize> ratio;     // sqrt(j / (j + 1))
    RecurrenceTable() {
        for (std::size_t j = 0; j < kSize; ++j) {
            const double jd = static_cast<double>(j);
            inv_sqrt[j] = 1.0 / std::sqrt(jd + 1.0);
            ratio[j] = std::sqrt(jd / (jd + 1.0));
        }
    }
};

const RecurrenceTable& recurrence_table() {
    static const RecurrenceTable table;
    return table;
}

void run_recurrence(double x, double start, std::span<double> out) {
    if (!std::isfinite(x)) throw std::domain_error("psi_row: non-finite argument");
    if (out.empty()) return;
    out[0] = start;
    if (out.size() == 1) return;
    out[1] = x * start;
    const auto& t = recurrence_table();
    const std::size_t tabulated = std::min(out.size(), RecurrenceTable::kSize);
    std::size_t j = 1;
    for (; j + 1 < tabulated; ++j) out[j + 1] = x * t.inv_sqrt[j] * out[j] - t.ratio[j] * out[j - 1];
    for (; j + 1 < out.size(); ++j) {
        const double jd = static_cast<double>(j);
        out[j + 1] = x / std::sqrt(jd + 1.0) * out[j] - std::sqrt(jd / (jd + 1.0)) * out[j - 1];
    }
}

}  // namespace

void psi_row(double x, std::span<double> out) { run_recurrence(x, kPsi0, out); }

std::vector<double> psi_row(int j_max, double x) {
    if (j_max < 0) throw std::invalid_argument("psi_row: j_max must be >= 0");
    std::vector<double> out(static_cast<std::size_t>(j_max) + 1);
    psi_row(x, out);
    return out;
}

void weighted_psi_row(double x, std::span<double> out) {
    run_recurrence(x, kPsi0 * std::exp(-0.25 * x * x), out);
}

OrderedBasis::OrderedBasis(int dim, int size) : dim_(dim) {
    if (dim < 1) throw std::invalid_argument("OrderedBasis: dim must be >= 1");
    if (size < 1) throw std::invalid_argument("OrderedBasis: size must be >= 1");
    indices_.reserve(static_cast<std::size_t>(size));
    const auto d = static_cast<std::size_t>(dim);
    for (int m = 0; static_cast<int>(indices_.size()) < size; ++m) {
        // Odometer over {0..m}^d, last coordinate fastest: lexicographic ascending.
        std::vector<int> deg(d, 0);
        while (true) {
            if (*std::max_element(deg.begin(), deg.end()) == m) {
                indices_.push_back(MultiIndex{deg});
                if (static_cast<int>(indices_.size()) == size) break;
            }
            std::size_t pos = d;
            while (pos > 0 && deg[pos - 1] == m) deg[--pos] = 0;
            if (pos == 0) break;
            ++deg[pos - 1];
        }
        max_degree_ = m;
    }
}

OrderedBasis ordered_indices(int d, int N) { return OrderedBasis(d, N); }

double phi(const MultiIndex& index, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (index.dim() != static_cast<std::size_t>(x.size()))
        throw std::invalid_argument("phi: index length does not match point dimension");
    double value = 1.0;
    for (std::size_t l = 0; l < index.dim(); ++l) {
        const auto row = psi_row(index.degrees[l], x[static_cast<Eigen::Index>(l)]);
        value *= row.back();
    }
    return value;
}

KernelEval::KernelEval(OrderedBasis basis) : basis_(std::move(basis)), flat_(basis_.size(), basis_.dim()) {
    for (int i = 0; i < basis_.size(); ++i)
        for (int l = 0; l < basis_.dim(); ++l) flat_(i, l) = basis_[i].degrees[static_cast<std::size_t>(l)];
}

void KernelEval::check_point(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim()) throw std::invalid_argument("KernelEval: point dimension mismatch");
}

Eigen::MatrixXd KernelEval::rows(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    check_point(x);
    const int width = basis_.max_degree() + 1;
    Eigen::MatrixXd out(dim(), width);
    std::vector<double> buf(static_cast<std::size_t>(width));
    for (int l = 0; l < dim(); ++l) {
        psi_row(x[l], buf);
        for (int j = 0; j < width; ++j) out(l, j) = buf[static_cast<std::size_t>(j)];
    }
    return out;
}

Eigen::MatrixXd KernelEval::weighted_rows(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    check_point(x);
    const int width = basis_.max_degree() + 1;
    Eigen::MatrixXd out(dim(), width);
    std::vector<double> buf(static_cast<std::size_t>(width));
    for (int l = 0; l < dim(); ++l) {
        weighted_psi_row(x[l], buf);
        for (int j = 0; j < width; ++j) out(l, j) = buf[static_cast<std::size_t>(j)];
    }
    return out;
}

Eigen::VectorXd KernelEval::features_from_rows(const Eigen::MatrixXd& rows) const {
    Eigen::VectorXd f(size());
    for (int i = 0; i < size(); ++i) {
        double v = 1.0;
        for (int l = 0; l < dim(); ++l) v *= rows(l, flat_(i, l));
        f[i] = v;
    }
    return f;
}

Eigen::VectorXd KernelEval::features(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return features_from_rows(rows(x));
}

double KernelEval::operator()(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y) const {
    return features(x).dot(features(y));
}

double KernelEval::diagonal(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return features(x).squaredNorm();
}

Eigen::MatrixXd KernelEval::feature_matrix(const Eigen::MatrixXd& points) const {
    Eigen::MatrixXd out(points.rows(), size());
    for (Eigen::Index p = 0; p < points.rows(); ++p) out.row(p) = features(points.row(p).transpose()).transpose();
    return out;
}

Eigen::MatrixXd KernelEval::gram(const Eigen::MatrixXd& points) const {
    const Eigen::MatrixXd f = feature_matrix(points);
    return f * f.transpose();
}

double kernel(const KernelEval& eval, const Eigen::Ref<const Eigen::VectorXd>& x,
              const Eigen::Ref<const Eigen::VectorXd>& y) {
    return eval(x, y);
}

}  // namespace ghdpp::basis
