#include "ghdpp/spherical.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ghdpp::spherical {

double gegenbauer(int n, double lambda, double x) {
    if (n < 0) throw std::invalid_argument("gegenbauer: negative degree");
    if (!(lambda > 0.0)) throw std::invalid_argument("gegenbauer: lambda must be > 0");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = 2.0 * lambda * x;
    for (int k = 1; k < n; ++k) {
        const double next = (2.0 * x * (k + lambda) * cur - (k + 2.0 * lambda - 1.0) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

double chebyshev(int n, double x, double first) {
    if (n < 0) throw std::invalid_argument("chebyshev: negative degree");
    if (n == 0) return 1.0;
    double prev = 1.0;
    double cur = first;
    for (int k = 1; k < n; ++k) {
        const double next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double log_pochhammer(double a, int k) { return std::lgamma(a + k) - std::lgamma(a); }

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double envelope_coeff(double n, double lambda) {
    return std::exp(std::lgamma(n / 2.0 + lambda) - std::lgamma(lambda) - std::lgamma(n / 2.0 + 1.0));
}

// r^n P(t / r) for a degree-n polynomial P of parity n; the limit at r = 0 is 0 unless n = 0.
double homogeneous(double r, int n, double ratio_value) { return n == 0 ? 1.0 : std::pow(r, n) * ratio_value; }

}  // namespace

double chebyshev_t(int n, double x) { return chebyshev(n, x, x); }
double chebyshev_u(int n, double x) { return chebyshev(n, x, 2.0 * x); }

double gegenbauer_envelope(int n, double lambda, double x) {
    return envelope_coeff(2.0 * n, 2.0 * lambda) * x * x + envelope_coeff(n, lambda) * (1.0 - x * x);
}

SphericalIndex::SphericalIndex(std::vector<int> degrees) : n_(std::move(degrees)) {
    if (n_.size() < 2) throw std::invalid_argument("SphericalIndex: dimension must be >= 2");
    for (int v : n_)
        if (v < 0) throw std::invalid_argument("SphericalIndex: degrees must be non-negative");
    if (n_.back() > 1) throw std::invalid_argument("SphericalIndex: last degree must be 0 or 1");
}

int SphericalIndex::beta(int j) const {
    return std::accumulate(n_.begin() + j, n_.end(), 0);
}

double SphericalIndex::lambda(int j) const { return (dim() - j - 1) / 2.0 + beta(j); }

double SphericalIndex::a() const {
    const auto d = n_.size();
    return n_[d - 2] + n_[d - 1] > 0 ? 0.5 : 1.0;
}

double phi_spherical(const SphericalIndex& index, const Eigen::VectorXd& x) {
    const int d = index.dim();
    if (x.size() != d) throw std::invalid_argument("phi_spherical: dimension mismatch");
    const double norm = x.norm();
    if (!(norm > 0.0)) throw std::domain_error("phi_spherical: direction undefined at x = 0");
    const Eigen::VectorXd e = x / norm;
    const auto& n = index.degrees();

    // Planar factor g_{s, n_d} in the last two coordinates.
    const int s = n[static_cast<std::size_t>(d - 2)];
    const double u = e[d - 2];
    const double w = e[d - 1];
    const double rho = std::hypot(u, w);
    double chi;
    if (n.back() == 0) {
        chi = rho > 0.0 ? homogeneous(rho, s, chebyshev_t(s, u / rho)) : (s == 0 ? 1.0 : 0.0);
    } else {
        chi = rho > 0.0 ? w * std::pow(rho, s) * chebyshev_u(s, u / rho) : 0.0;
    }

    double log_norm_sq = -std::log(index.a());
    for (int j = 1; j <= d - 2; ++j) {
        const int nj = n[static_cast<std::size_t>(j - 1)];
        const double lam = index.lambda(j);
        const int b = index.beta(j);
        const double r = e.tail(d - j + 1).norm();
        chi *= r > 0.0 ? homogeneous(r, nj, gegenbauer(nj, lam, e[j - 1] / r)) : (nj == 0 ? 1.0 : 0.0);
        log_norm_sq += std::lgamma(nj + 1.0) + log_pochhammer((d - j + 1) / 2.0, b) + std::log(nj + lam) -
                       std::log(lam) - log_pochhammer(2.0 * lam, nj) - log_pochhammer((d - j) / 2.0, b);
    }
    return std::exp(0.5 * log_norm_sq) * chi;
}

double log_bound_M(const SphericalIndex& index) {
    const int d = index.dim();
    const auto& n = index.degrees();
    double log_m = -std::log(index.a());
    for (int j = 1; j <= d - 2; ++j) {
        const int nj = n[static_cast<std::size_t>(j - 1)];
        const double lam = index.lambda(j);
        const double half = (d - j) / 2.0;
        log_m += std::log(nj + lam) - std::log(lam) + log_beta(half, 0.5) - log_beta(half + index.beta(j), 0.5) +
                 log_pochhammer(2.0 * lam, nj) - std::lgamma(nj + 1.0);
    }
    return log_m;
}

double bound_M(const SphericalIndex& index) { return std::exp(log_bound_M(index)); }

nlohmann::json AcceptanceReport::to_json() const {
    nlohmann::json j{{"index", index},         {"log_M", log_bound},     {"acceptance", acceptance()},
                     {"trials", trials},       {"accepts", accepts},     {"violations", violations},
                     {"max_phi_sq", max_phi_sq}};
    j["M"] = bound > kLogReportThreshold ? nlohmann::json(nullptr) : nlohmann::json(bound);
    return j;
}

AcceptanceReport acceptance_report(const SphericalIndex& index, int trials, Stream& rng) {
    if (trials < 1) throw std::invalid_argument("acceptance_report: trials must be >= 1");
    AcceptanceReport rep;
    rep.index = index.degrees();
    rep.log_bound = log_bound_M(index);
    rep.bound = std::exp(rep.log_bound);
    Eigen::VectorXd x(index.dim());
    for (int t = 0; t < trials; ++t) {
        for (int l = 0; l < index.dim(); ++l) x[l] = rng.normal();
        const double p = phi_spherical(index, x);
        const double sq = p * p;
        const double u = rng.uniform();
        ++rep.trials;
        rep.max_phi_sq = std::max(rep.max_phi_sq, sq);
        if (sq > rep.bound) ++rep.violations;
        if (u * rep.bound <= sq) ++rep.accepts;
    }
    return rep;
}

Eigen::VectorXd sample(const SphericalIndex& index, Stream& rng, std::uint64_t* proposals) {
    const double m = bound_M(index);
    Eigen::VectorXd x(index.dim());
    while (true) {
        for (int l = 0; l < index.dim(); ++l) x[l] = rng.normal();
        const double p = phi_spherical(index, x);
        if (proposals) ++*proposals;
        if (rng.uniform() * m <= p * p) return x;
    }
}

}  // namespace ghdpp::spherical
