#include "ghdpp/dpp.hpp"

#include <cmath>
#include <iostream>

namespace ghdpp::dpp {

StageCounters& StageCounters::operator+=(const StageCounters& o) {
    rho += o.rho;
    general += o.general;
    chain += o.chain;
    jitter_events += o.jitter_events;
    restarts += o.restarts;
    return *this;
}

ChainState::ChainState(int capacity, int feature_size)
    : features_(capacity, feature_size), chol_(Eigen::MatrixXd::Zero(capacity, capacity)) {}

Eigen::VectorXd ChainState::solve(const Eigen::VectorXd& features) const {
    if (k_ == 0) return Eigen::VectorXd();
    const Eigen::VectorXd kk = features_.topRows(k_) * features;
    return chol_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solve(kk);
}

bool ChainState::push(const Eigen::VectorXd& features, const Eigen::VectorXd& z, double residual) {
    if (k_ >= capacity()) throw std::logic_error("ChainState: capacity exceeded");
    double pivot = std::sqrt(std::max(residual, 0.0));
    const bool jittered = pivot < kPivotFloor;
    if (jittered) pivot += kPivotJitter;
    features_.row(k_) = features.transpose();
    if (k_ > 0) chol_.row(k_).head(k_) = z.transpose();
    chol_(k_, k_) = pivot;
    ++k_;
    return jittered;
}

Eigen::MatrixXd ChainState::gram() const {
    const auto f = features_.topRows(k_);
    return f * f.transpose();
}

int grid_side(int N, int d) {
    if (N < 1 || d < 1) throw std::invalid_argument("grid_side: N and d must be >= 1");
    auto power = [d](int n) {
        double p = 1.0;
        for (int i = 0; i < d; ++i) p *= n;
        return p;
    };
    int n = std::max(1, static_cast<int>(std::lround(std::pow(static_cast<double>(N), 1.0 / d))));
    while (power(n) < N) ++n;
    while (n > 1 && power(n - 1) >= N) --n;
    return n;
}

Eigen::VectorXd sample_f_power(int n, int d, Stream& rng, rmt::CalibrationTable& table, StageCounters* counters) {
    if (n < 1 || d < 1) throw std::invalid_argument("sample_f_power: n and d must be >= 1");
    const auto& calib = table.get(n);
    Eigen::VectorXd x(d);
    for (int l = 0; l < d; ++l) x[l] = rmt::sample_rho(n, calib, rng, counters ? &counters->rho : nullptr);
    return x;
}

Sampler::Sampler(int n_points, int dim, rmt::CalibrationTable& table)
    : n_points_(n_points),
      dim_(dim),
      side_(grid_side(n_points, dim)),
      kernel_(basis::OrderedBasis(dim, n_points)),
      calib_(&table.get(side_)) {}

Sampler::Proposal Sampler::propose(Stream& rng, StageCounters& counters) const {
    double full = 1.0;
    for (int l = 0; l < dim_; ++l) full *= side_;
    const bool perfect_power = static_cast<double>(n_points_) == full;
    while (true) {
        Proposal p;
        p.x.resize(dim_);
        for (int l = 0; l < dim_; ++l) p.x[l] = rmt::sample_rho(side_, *calib_, rng, &counters.rho);
        // Weighted rows keep K(x, x) finite far out in the tails; every ratio
        // below is unchanged by the per-point factor e^{-|x|^2/2}.
        p.rows = kernel_.weighted_rows(p.x);
        ++counters.general.proposals;
        if (perfect_power) {
            ++counters.general.accepts;
            return p;
        }
        // f_N / (M q_n) = sum_{b<N} phi^2 / sum_{b<n^d} phi^2; the denominator factorises.
        const double truncated = kernel_.features_from_rows(p.rows).squaredNorm();
        double complete = 1.0;
        for (int l = 0; l < dim_; ++l) complete *= p.rows.row(l).head(side_).squaredNorm();
        if (!(complete > 0.0)) continue;  // underflow beyond |x| ~ 50
        const double ratio = truncated / complete;
        if (ratio > 1.0 + 1e-12) throw std::logic_error("sample_f_general: acceptance ratio exceeds 1");
        if (rng.uniform() <= ratio) {
            ++counters.general.accepts;
            return p;
        }
    }
}

double Sampler::conditional_acceptance(const ChainState& chain, const Eigen::VectorXd& features) const {
    const double kxx = features.squaredNorm();
    if (chain.size() == 0) return 1.0;
    const Eigen::VectorXd z = chain.solve(features);
    return (kxx - z.squaredNorm()) / kxx;
}

bool Sampler::try_sample(Stream& rng, DppSample& out) const {
    ChainState chain(n_points_, kernel_.size());
    out.points.resize(n_points_, dim_);
    int jitter = 0;
    while (chain.size() < n_points_) {
        auto p = propose(rng, out.counters);
        const Eigen::VectorXd f = kernel_.features_from_rows(p.rows);
        const double kxx = f.squaredNorm();
        if (!(kxx > 0.0) || !std::isfinite(kxx)) continue;
        Eigen::VectorXd z = chain.solve(f);
        const double residual = kxx - (chain.size() ? z.squaredNorm() : 0.0);
        if (residual < -kResidualTolerance * std::max(1.0, kxx))
            throw DegeneracyError("chain-rule residual " + std::to_string(residual) + " is negative");
        ++out.counters.chain.proposals;
        if (!std::isfinite(residual)) throw DegeneracyError("chain-rule residual is not finite");
        if (!(rng.uniform() * kxx <= residual)) continue;
        ++out.counters.chain.accepts;
        for (int i = 0; i < chain.size(); ++i)
            if (out.points.row(i).transpose() == p.x) return false;
        if (chain.push(f, z, residual)) {
            ++out.counters.jitter_events;
            std::cerr << "warning: jitter added to chain-rule pivot (N=" << n_points_ << ", d=" << dim_ << ")\n";
            if (++jitter >= kMaxJitterEvents) return false;
        }
        out.points.row(chain.size() - 1) = p.x.transpose();
    }
    return true;
}

DppSample Sampler::sample(Stream& rng) const {
    DppSample out;
    out.dim = dim_;
    out.n_points = n_points_;
    out.seed = rng.key();
    constexpr int kMaxRestarts = 20;
    for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
        bool ok = false;
        try {
            ok = try_sample(rng, out);
        } catch (const DegeneracyError& e) {
            std::cerr << "warning: " << e.what() << "; restarting sample\n";
        }
        if (ok) return out;
        ++out.counters.restarts;
    }
    throw std::runtime_error("sample_dpp: too many restarts");
}

Eigen::VectorXd sample_f_general(int N, int d, Stream& rng, StageCounters* counters) {
    Sampler sampler(N, d);
    StageCounters local;
    auto p = sampler.propose(rng, counters ? *counters : local);
    return p.x;
}

DppSample sample_dpp(int N, int d, Stream& rng) { return Sampler(N, d).sample(rng); }

DppSample sample_dpp_1d_gue(int N, Stream& rng) {
    DppSample out;
    out.dim = 1;
    out.n_points = N;
    out.seed = rng.key();
    const auto spectrum = rmt::sample_gue_spectrum(N, rng);
    out.points = Eigen::Map<const Eigen::VectorXd>(spectrum.eigenvalues.data(), N);
    return out;
}

}  // namespace ghdpp::dpp
