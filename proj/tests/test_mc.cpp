#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ghdpp/experiments.hpp"
#include "ghdpp/mc.hpp"
#include "oracles.hpp"

using namespace ghdpp;

namespace {

mc::Integrand make(int d, std::function<double(const Eigen::VectorXd&)> f) { return mc::Integrand{d, std::move(f), {}}; }

double se_of(const std::vector<double>& v) { return oracle::stddev(v) / std::sqrt(static_cast<double>(v.size())); }

}  // namespace

TEST_CASE("estimator names") {
    CHECK(mc::parse_estimator("ez") == mc::Estimator::EZ);
    CHECK(mc::to_string(mc::Estimator::BH) == "bh");
    CHECK_THROWS(mc::parse_estimator("quadrature"));
}

TEST_CASE("naive estimator") {
    Stream rng(1);
    for (int d : {1, 2, 3})
        CHECK(mc::naive_estimate(make(d, [](const Eigen::VectorXd&) { return 1.0; }), 17, rng) ==
              doctest::Approx(std::pow(2 * std::numbers::pi, d / 2.0)).epsilon(1e-14));

    std::vector<double> sq, cross;
    for (int i = 0; i < 100000; ++i) {
        const double x = rng.normal(), y = rng.normal();
        sq.push_back(std::sqrt(2 * std::numbers::pi) * x * x);
        cross.push_back(2 * std::numbers::pi * x * y);
    }
    Stream r2(2);
    const double est = mc::naive_estimate(make(1, [](const Eigen::VectorXd& x) { return x[0] * x[0]; }), 100000, r2);
    CHECK(std::abs(est - std::sqrt(2 * std::numbers::pi)) < 3 * se_of(sq));
    const double est2 = mc::naive_estimate(make(2, [](const Eigen::VectorXd& x) { return x[0] * x[1]; }), 100000, r2);
    CHECK(std::abs(est2) < 3 * se_of(cross));
}

TEST_CASE("BH with f = K(x,x) returns N") {
    Stream rng(3);
    const auto s = dpp::sample_dpp(12, 2, rng);
    const basis::KernelEval k(basis::ordered_indices(2, 12));
    const auto f = make(2, [&k](const Eigen::VectorXd& x) { return k.diagonal(x); });
    CHECK(mc::bh_estimate(f, s, k) == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("BH is unbiased for x^2") {
    Stream rng(4);
    const basis::KernelEval k(basis::ordered_indices(1, 50));
    const auto f = make(1, [](const Eigen::VectorXd& x) { return x[0] * x[0]; });
    std::vector<double> est;
    for (int r = 0; r < 100; ++r) est.push_back(mc::bh_estimate(f, dpp::sample_dpp(50, 1, rng), k));
    CHECK(std::abs(oracle::mean(est) - std::sqrt(2 * std::numbers::pi)) < 3 * se_of(est) + 1e-12);
}

TEST_CASE("EZ recovers integrals exactly in the span") {
    Stream rng(5);
    const auto basis1 = basis::ordered_indices(1, 6);
    const auto psi3 = make(1, [](const Eigen::VectorXd& x) { return basis::psi_row(3, x[0])[3]; });
    for (int r = 0; r < 5; ++r) {
        const auto s = dpp::sample_dpp(6, 1, rng);
        CHECK(std::abs(mc::ez_estimate(psi3, s, basis1).estimate) < 1e-8);
    }
    experiments::PolynomialIntegrand p{1, 5, {0.3, -0.2, 0.5, 0.7, -0.1, 0.4}};
    const auto f = p.integrand();
    std::vector<double> est;
    for (int r = 0; r < 30; ++r) {
        const auto res = mc::ez_estimate(f, dpp::sample_dpp(6, 1, rng), basis1);
        CHECK(std::abs(res.estimate - *f.truth) <= 1e-6 * (1 + std::abs(*f.truth)));
        CHECK_FALSE(res.ill_conditioned);
        est.push_back(res.estimate);
    }
    CHECK(oracle::stddev(est) < 1e-8);
}

TEST_CASE("EZ in 2-D needs the full index set") {
    Stream rng(6);
    Stream crng(60);
    const auto p = experiments::PolynomialIntegrand::random(2, 5, crng);
    const auto f = p.integrand();
    const auto b20 = basis::ordered_indices(2, 20);
    const auto b36 = basis::ordered_indices(2, 36);
    double worst20 = 0.0, worst36 = 0.0;
    for (int r = 0; r < 10; ++r) {
        worst20 = std::max(worst20, std::abs(mc::ez_estimate(f, dpp::sample_dpp(20, 2, rng), b20).estimate - *f.truth));
        worst36 = std::max(worst36, std::abs(mc::ez_estimate(f, dpp::sample_dpp(36, 2, rng), b36).estimate - *f.truth));
    }
    CHECK(worst20 > 1e-3);
    CHECK(worst36 <= 1e-6 * (1 + std::abs(*f.truth)));
}

TEST_CASE("batch forms agree with single-integrand forms") {
    Stream rng(7);
    const auto s = dpp::sample_dpp(10, 2, rng);
    const basis::KernelEval k(basis::ordered_indices(2, 10));
    const auto f = make(2, [](const Eigen::VectorXd& x) { return std::cos(x[0]) * x[1] * x[1]; });
    Eigen::MatrixXd vals(10, 1);
    for (int i = 0; i < 10; ++i) vals(i, 0) = f(s.points.row(i).transpose());
    CHECK(mc::bh_estimate_values(s.points, k, vals)[0] == doctest::Approx(mc::bh_estimate(f, s, k)).epsilon(1e-12));
    CHECK(mc::ez_estimate_values(s.points, k, vals).estimates[0] ==
          doctest::Approx(mc::ez_estimate(f, s, k.basis()).estimate).epsilon(1e-9));
}

TEST_CASE("gaussian reparametrisation") {
    const auto one = make(1, [](const Eigen::VectorXd&) { return 1.0; });
    Stream rng(8);
    const auto g0 = mc::gaussian_reparam(one, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    CHECK(mc::naive_estimate(g0, 10, rng) == doctest::Approx(1.0).epsilon(1e-14));

    const auto id = make(1, [](const Eigen::VectorXd& x) { return x[0]; });
    const auto g1 = mc::gaussian_reparam(id, Eigen::VectorXd::Constant(1, 2.0), Eigen::MatrixXd::Constant(1, 1, 9.0));
    // The naive estimator of g1 has per-draw sd 3.
    CHECK(std::abs(mc::naive_estimate(g1, 100000, rng) - 2.0) < 3 * 3.0 / std::sqrt(1e5));

    Eigen::Matrix2d cov = Eigen::Vector2d(4.0, 1.0).asDiagonal();
    const auto sq = make(2, [](const Eigen::VectorXd& x) { return x[0] * x[0]; });
    const auto g2 = mc::gaussian_reparam(sq, Eigen::Vector2d(1.0, -1.0), cov);
    // x1 ~ N(1, 4): Var(x1^2) = 2*16 + 4*1*4 = 48.
    CHECK(std::abs(mc::naive_estimate(g2, 100000, rng) - 5.0) < 3 * std::sqrt(48.0 / 1e5));

    // EZ is exact here since g2 is a quadratic.
    const auto s = dpp::sample_dpp(9, 2, rng);
    CHECK(mc::ez_estimate(g2, s, basis::ordered_indices(2, 9)).estimate == doctest::Approx(5.0).epsilon(1e-9));

    Eigen::Matrix2d bad;
    bad << 1, 2, 2, 1;
    CHECK_THROWS(mc::gaussian_reparam(sq, Eigen::Vector2d::Zero(), bad));
}

TEST_CASE("report statistics are recomputed from estimates") {
    mc::EstimateReport r;
    r.estimates = {1.0, 2.0, 4.0};
    r.finalize();
    CHECK(r.mean == doctest::Approx(7.0 / 3));
    CHECK(r.stddev == doctest::Approx(oracle::stddev(r.estimates)));
    const auto j = r.to_json();
    CHECK(j["estimates"].size() == 3);
}
