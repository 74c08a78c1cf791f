#include "ghdpp/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ghdpp/dpp.hpp"
#include "ghdpp/parallel.hpp"

namespace ghdpp::experiments {

double gaussian_moment(int i) {
    if (i < 0) throw std::invalid_argument("gaussian_moment: negative order");
    if (i % 2) return 0.0;
    double m = 1.0;
    for (int k = i - 1; k > 1; k -= 2) m *= k;
    return m;
}

namespace {

std::size_t term_count(int dim, int degree) {
    std::size_t count = 1;
    for (int k = 0; k < dim; ++k) count *= static_cast<std::size_t>(degree + 1);
    return count;
}

// Calls fn(term, exponents) for every multi-index in {0..degree}^dim, lexicographic.
template <class Fn>
void for_each_term(int dim, int degree, Fn&& fn) {
    std::vector<int> e(static_cast<std::size_t>(dim), 0);
    const std::size_t count = term_count(dim, degree);
    for (std::size_t t = 0; t < count; ++t) {
        fn(t, e);
        for (int k = dim - 1; k >= 0; --k) {
            auto& v = e[static_cast<std::size_t>(k)];
            if (++v <= degree) break;
            v = 0;
        }
    }
}

}  // namespace

double PolynomialIntegrand::operator()(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd powers(dim, degree + 1);
    for (int k = 0; k < dim; ++k) {
        powers(k, 0) = 1.0;
        for (int e = 1; e <= degree; ++e) powers(k, e) = powers(k, e - 1) * x[k];
    }
    double sum = 0.0;
    for_each_term(dim, degree, [&](std::size_t t, const std::vector<int>& e) {
        const double a = coeffs[t];
        if (a == 0.0) return;
        double term = a;
        for (int k = 0; k < dim; ++k) term *= powers(k, e[static_cast<std::size_t>(k)]);
        sum += term;
    });
    return sum;
}

mc::Integrand PolynomialIntegrand::integrand() const {
    mc::Integrand f;
    f.dim = dim;
    f.eval = [p = *this](const Eigen::VectorXd& x) { return p(x); };
    f.truth = polynomial_truth(*this) * mc::gaussian_mass(dim);
    return f;
}

PolynomialIntegrand PolynomialIntegrand::random(int dim, int degree, Stream& rng) {
    if (dim < 1 || degree < 0) throw std::invalid_argument("PolynomialIntegrand: bad dimension or degree");
    PolynomialIntegrand p{dim, degree, std::vector<double>(term_count(dim, degree))};
    for (auto& a : p.coeffs) a = 2.0 * rng.uniform() - 1.0;
    return p;
}

PolynomialIntegrand PolynomialIntegrand::monomial(const std::vector<int>& exponents) {
    if (exponents.empty()) throw std::invalid_argument("monomial: empty exponent list");
    const int dim = static_cast<int>(exponents.size());
    const int degree = *std::max_element(exponents.begin(), exponents.end());
    PolynomialIntegrand p{dim, degree, std::vector<double>(term_count(dim, degree), 0.0)};
    for_each_term(dim, degree, [&](std::size_t t, const std::vector<int>& e) {
        if (e == exponents) p.coeffs[t] = 1.0;
    });
    return p;
}

double polynomial_truth(const PolynomialIntegrand& f) {
    double sum = 0.0;
    for_each_term(f.dim, f.degree, [&](std::size_t t, const std::vector<int>& e) {
        double term = f.coeffs[t];
        for (int i : e) term *= gaussian_moment(i);
        sum += term;
    });
    return sum;
}

PolyExperiment run_poly_experiment(int d, int degree, const std::vector<int>& n_grid, int reps, std::uint64_t seed,
                                   int threads) {
    const Stream root(seed);
    Stream coeff_rng = root.derive(0);
    PolyExperiment out;
    out.polynomial = PolynomialIntegrand::random(d, degree, coeff_rng);
    out.truth = polynomial_truth(out.polynomial);
    const mc::Integrand f = out.polynomial.integrand();
    const double mass = mc::gaussian_mass(d);

    for (int N : n_grid) {
        const dpp::Sampler sampler(N, d);
        std::vector<double> naive(static_cast<std::size_t>(reps)), bh(naive), ez(naive);
        std::vector<int> flagged(static_cast<std::size_t>(reps), 0);
        const Stream n_root = root.derive(1).derive(static_cast<std::uint64_t>(N));
        parallel_for(reps, threads, [&](int r) {
            const Stream rep = n_root.derive(static_cast<std::uint64_t>(r));
            Stream dpp_rng = rep.derive(0);
            Stream iid_rng = rep.derive(1);
            const auto sample = sampler.sample(dpp_rng);
            const auto i = static_cast<std::size_t>(r);
            naive[i] = mc::naive_estimate(f, N, iid_rng) / mass;
            bh[i] = mc::bh_estimate(f, sample, sampler.kernel()) / mass;
            const auto res = mc::ez_estimate(f, sample, sampler.kernel().basis());
            ez[i] = res.estimate / mass;
            flagged[i] = res.ill_conditioned;
        });
        auto push = [&](const std::string& name, std::vector<double> values, int n_flagged) {
            PolyRow row;
            row.estimator = name;
            row.n_points = N;
            row.mean = mc::mean(values);
            row.stddev = mc::sample_stddev(values);
            row.truth = out.truth;
            row.ill_conditioned = n_flagged;
            row.estimates = std::move(values);
            out.rows.push_back(std::move(row));
        };
        push("naive", std::move(naive), 0);
        push("bh", std::move(bh), 0);
        int total_flagged = 0;
        for (int v : flagged) total_flagged += v;
        push("ez", std::move(ez), total_flagged);
    }
    return out;
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

constexpr std::array<double, 6> kJitterLadder{0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};

Eigen::LLT<Eigen::MatrixXd> factor_with_jitter(const Eigen::MatrixXd& k) {
    for (double jitter : kJitterLadder) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(kj);
        if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0) return llt;
    }
    throw std::runtime_error("GP Gram matrix is not positive definite even with jitter 1e-4");
}

}  // namespace

GpData synthetic_sine_data(int n, double noise_sd, Stream& rng) {
    GpData data;
    data.x = Eigen::VectorXd::LinSpaced(n, -4.0, 4.0);
    data.y.resize(n);
    for (int i = 0; i < n; ++i) data.y[i] = std::sin(data.x[i]) + noise_sd * rng.normal();
    return data;
}

Eigen::VectorXd test_grid(int n, double lo, double hi) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * (i + 0.5) / n;
    return x;
}

GpModel::GpModel(Eigen::VectorXd x, Eigen::VectorXd y, double noise_variance)
    : x_(std::move(x)), y_(std::move(y)), noise_(noise_variance) {
    if (x_.size() != y_.size()) throw std::invalid_argument("GpModel: input and target sizes differ");
}

Eigen::MatrixXd GpModel::gram(double v, double l) const {
    const int n = size();
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double r = x_[i] - x_[j];
            k(i, j) = v * std::exp(-r * r / (l * l));
        }
    return k;
}

double GpModel::log_marginal_likelihood(const Eigen::Vector2d& theta, Eigen::Vector2d* grad) const {
    const double v = softplus(theta[0]);
    const double l = softplus(theta[1]);
    const int n = size();
    const Eigen::MatrixXd kf = gram(v, l);
    Eigen::MatrixXd k = kf;
    k.diagonal().array() += noise_;
    const auto llt = factor_with_jitter(k);
    const Eigen::VectorXd alpha = llt.solve(y_);
    const Eigen::MatrixXd lmat = llt.matrixL();
    const double log_det = 2.0 * lmat.diagonal().array().log().sum();
    const double value = -0.5 * y_.dot(alpha) - 0.5 * log_det - 0.5 * n * std::log(2.0 * std::numbers::pi);
    if (grad) {
        const Eigen::MatrixXd w = alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(n, n));
        Eigen::MatrixXd dk_dl(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double r = x_[i] - x_[j];
                dk_dl(i, j) = kf(i, j) * 2.0 * r * r / (l * l * l);
            }
        const double g_v = 0.5 * (w.cwiseProduct(kf).sum() / v);
        const double g_l = 0.5 * w.cwiseProduct(dk_dl).sum();
        (*grad)[0] = g_v * sigmoid(theta[0]);
        (*grad)[1] = g_l * sigmoid(theta[1]);
    }
    return value;
}

GpModel::Posterior GpModel::posterior(const Eigen::Vector2d& theta, const Eigen::VectorXd& test_x) const {
    const double v = softplus(theta[0]);
    const double l = softplus(theta[1]);
    const auto t = test_x.size();
    Posterior post;
    if (size() == 0) {
        post.mean = Eigen::VectorXd::Zero(t);
        post.stddev = Eigen::VectorXd::Constant(t, std::sqrt(v));
        return post;
    }
    Eigen::MatrixXd k = gram(v, l);
    k.diagonal().array() += noise_;
    const auto llt = factor_with_jitter(k);
    Eigen::MatrixXd cross(size(), t);
    for (int i = 0; i < size(); ++i)
        for (Eigen::Index j = 0; j < t; ++j) {
            const double r = x_[i] - test_x[j];
            cross(i, j) = v * std::exp(-r * r / (l * l));
        }
    post.mean = cross.transpose() * llt.solve(y_);
    const Eigen::MatrixXd half = llt.matrixL().solve(cross);
    const Eigen::ArrayXd var = v - half.colwise().squaredNorm().transpose().array();
    post.stddev = var.max(0.0).sqrt().matrix();
    return post;
}

GpFit gp_fit(const Eigen::VectorXd& train_x, const Eigen::VectorXd& train_y, double noise_variance) {
    if (train_x.size() < 5) throw std::invalid_argument("gp_fit: need at least 5 training points");
    const GpModel model(train_x, train_y, noise_variance);
    auto evaluate = [&](const Eigen::Vector2d& th, Eigen::Vector2d& g) {
        try {
            return model.log_marginal_likelihood(th, &g);
        } catch (const std::runtime_error&) {
            g.setZero();
            return -std::numeric_limits<double>::infinity();
        }
    };

    GpFit best;
    best.log_ml = -std::numeric_limits<double>::infinity();
    const std::array<Eigen::Vector2d, 4> starts{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, 0.5),
                                                Eigen::Vector2d(-1.0, 1.5), Eigen::Vector2d(2.0, -0.5)};
    std::vector<Eigen::Vector2d> start_list;
    std::vector<double> start_values;
    for (const auto& start : starts) {
        Eigen::Vector2d theta = start;
        Eigen::Vector2d g;
        double f = evaluate(theta, g);
        start_list.push_back(start);
        start_values.push_back(f);
        double step = 0.1;
        int it = 0;
        bool converged = false;
        for (; it < kGpMaxIterations; ++it) {
            if (g.cwiseAbs().maxCoeff() < kGpGradTolerance) {
                converged = true;
                break;
            }
            double t = step;
            Eigen::Vector2d theta_new, g_new;
            double f_new = -std::numeric_limits<double>::infinity();
            bool moved = false;
            while (t > 1e-16) {
                theta_new = theta + t * g;
                f_new = evaluate(theta_new, g_new);
                if (f_new >= f + 1e-4 * t * g.squaredNorm()) {
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if (!moved) break;
            const Eigen::Vector2d s = theta_new - theta;
            const Eigen::Vector2d yv = g_new - g;
            const double sy = s.dot(yv);
            step = sy < 0.0 ? std::clamp(s.squaredNorm() / -sy, 1e-8, 1e3) : std::min(2.0 * t, 1e3);
            theta = theta_new;
            g = g_new;
            f = f_new;
        }
        if (f > best.log_ml) {
            best.theta = theta;
            best.log_ml = f;
            best.iterations = it;
            best.converged = converged;
        }
    }
    best.starts = std::move(start_list);
    best.start_log_ml = std::move(start_values);
    if (!best.converged)
        std::cerr << "warning: gp_fit did not reach gradient tolerance; returning best point found\n";
    return best;
}

namespace {

Eigen::MatrixXd draw_points(mc::Estimator estimator, int N, Stream& rng) {
    if (estimator == mc::Estimator::Naive) {
        Eigen::MatrixXd pts(N, 2);
        for (int i = 0; i < N; ++i)
            for (int l = 0; l < 2; ++l) pts(i, l) = rng.normal();
        return pts;
    }
    return dpp::Sampler(N, 2).sample(rng).points;
}

// Integrals against N(0, I_2) of each column of `values`.
Eigen::VectorXd integrate_columns(mc::Estimator estimator, const Eigen::MatrixXd& points, const Eigen::MatrixXd& values) {
    const double mass = mc::gaussian_mass(2);
    switch (estimator) {
        case mc::Estimator::Naive: return values.colwise().mean().transpose();
        case mc::Estimator::BH: {
            const basis::KernelEval kernel(basis::OrderedBasis(2, static_cast<int>(points.rows())));
            return mc::bh_estimate_values(points, kernel, values) / mass;
        }
        case mc::Estimator::EZ: {
            const basis::KernelEval kernel(basis::OrderedBasis(2, static_cast<int>(points.rows())));
            const auto batch = mc::ez_estimate_values(points, kernel, values);
            return batch.estimates / mass;
        }
    }
    return {};
}

void posterior_at_points(const GpModel& model, const Eigen::Vector2d& theta_star, const Eigen::VectorXd& test_x,
                         const Eigen::MatrixXd& points, Eigen::MatrixXd& mu, Eigen::MatrixXd& sigma) {
    mu.resize(points.rows(), test_x.size());
    sigma.resize(points.rows(), test_x.size());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Eigen::Vector2d theta = theta_star + points.row(i).transpose();
        const auto post = model.posterior(theta, test_x);
        mu.row(i) = post.mean.transpose();
        sigma.row(i) = post.stddev.transpose();
    }
}

}  // namespace

MarginalMoments marginal_mean_std(const GpModel& model, const Eigen::Vector2d& theta_star,
                                  const Eigen::VectorXd& test_x, mc::Estimator estimator, int N, Stream& rng) {
    const Eigen::MatrixXd points = draw_points(estimator, N, rng);
    Eigen::MatrixXd mu, sigma;
    posterior_at_points(model, theta_star, test_x, points, mu, sigma);
    return {integrate_columns(estimator, points, mu), integrate_columns(estimator, points, sigma)};
}

Eigen::MatrixXd psi_cdf_batch(const GpModel& model, const Eigen::Vector2d& theta_star, const Eigen::VectorXd& test_x,
                              const Eigen::MatrixXd& levels, mc::Estimator estimator, int N, Stream& rng) {
    const auto t_count = test_x.size();
    const auto l_count = levels.cols();
    if (levels.rows() != t_count) throw std::invalid_argument("psi_cdf_batch: levels must have one row per test point");
    const Eigen::MatrixXd points = draw_points(estimator, N, rng);
    Eigen::MatrixXd mu, sigma;
    posterior_at_points(model, theta_star, test_x, points, mu, sigma);
    Eigen::MatrixXd values(points.rows(), t_count * l_count);
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (Eigen::Index t = 0; t < t_count; ++t) {
            if (!(sigma(i, t) > 0.0)) throw std::logic_error("psi_cdf: non-positive posterior std");
            for (Eigen::Index l = 0; l < l_count; ++l)
                values(i, t * l_count + l) = normal_cdf((levels(t, l) - mu(i, t)) / sigma(i, t));
        }
    const Eigen::VectorXd flat = integrate_columns(estimator, points, values);
    Eigen::MatrixXd out(t_count, l_count);
    for (Eigen::Index t = 0; t < t_count; ++t)
        for (Eigen::Index l = 0; l < l_count; ++l) out(t, l) = flat[t * l_count + l];
    return out;
}

double psi_cdf_estimate(const CdfQuery& query, const GpModel& model, const Eigen::Vector2d& theta_star, Stream& rng) {
    if (!std::isfinite(query.y)) throw std::invalid_argument("psi_cdf_estimate: query level must be finite");
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, query.x);
    const Eigen::MatrixXd level = Eigen::MatrixXd::Constant(1, 1, query.y);
    return psi_cdf_batch(model, theta_star, x, level, query.estimator, query.n_points, rng)(0, 0);
}

GpExperiment run_gp_experiment(const GpExperimentConfig& config) {
    const Stream root(config.seed);
    GpExperiment out;
    Stream data_rng = root.derive(0);
    out.data = synthetic_sine_data(config.n_train, config.data_noise_sd, data_rng);
    out.fit = gp_fit(out.data.x, out.data.y);
    const GpModel model(out.data.x, out.data.y);
    out.test_x = test_grid(config.n_test);
    out.point = model.posterior(out.fit.theta, out.test_x);

    Stream ref_rng = root.derive(1);
    out.reference = marginal_mean_std(model, out.fit.theta, out.test_x, mc::Estimator::Naive,
                                      config.reference_points, ref_rng);
    Stream ez_rng = root.derive(2);
    out.ez_marginal = marginal_mean_std(model, out.fit.theta, out.test_x, mc::Estimator::EZ, 20, ez_rng);

    const auto t_count = out.test_x.size();
    const auto l_count = static_cast<Eigen::Index>(kCdfLevels.size());
    out.levels.resize(t_count, l_count);
    for (Eigen::Index t = 0; t < t_count; ++t)
        for (Eigen::Index l = 0; l < l_count; ++l)
            out.levels(t, l) = out.reference.mean[t] + kCdfLevels[static_cast<std::size_t>(l)] * out.reference.stddev[t];

    for (auto estimator : {mc::Estimator::Naive, mc::Estimator::BH, mc::Estimator::EZ}) {
        for (int N : config.n_grid) {
            const Stream cell_root =
                root.derive(10).derive(static_cast<std::uint64_t>(estimator)).derive(static_cast<std::uint64_t>(N));
            std::vector<Eigen::MatrixXd> runs(static_cast<std::size_t>(config.reps));
            parallel_for(config.reps, config.threads, [&](int r) {
                Stream rng = cell_root.derive(static_cast<std::uint64_t>(r));
                runs[static_cast<std::size_t>(r)] =
                    psi_cdf_batch(model, out.fit.theta, out.test_x, out.levels, estimator, N, rng);
            });
            GpCdfCell cell{estimator, N, Eigen::MatrixXd(t_count, l_count), Eigen::MatrixXd(t_count, l_count)};
            for (Eigen::Index t = 0; t < t_count; ++t)
                for (Eigen::Index l = 0; l < l_count; ++l) {
                    std::vector<double> v;
                    for (const auto& run : runs) v.push_back(run(t, l));
                    cell.mean(t, l) = mc::mean(v);
                    cell.stddev(t, l) = mc::sample_stddev(v);
                }
            out.cells.push_back(std::move(cell));
        }
    }
    return out;
}

}  // namespace ghdpp::experiments
