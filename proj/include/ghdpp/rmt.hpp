#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghdpp/rng.hpp"

namespace ghdpp::rmt {

/// Raised when a proposal ratio exceeds the stored rejection bound.
class CalibrationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class GueMethod { Tridiagonal, Dense };

struct SpectrumSample {
    int n = 0;
    std::vector<double> eigenvalues;  // unordered
};

/// Spectrum of an n x n GUE matrix, density prop. to exp(-Tr X^2 / 2).
///
/// Tridiagonal: the beta = 2 model with N(0,1) diagonal and sub-diagonal
/// chi_{2(n-k)} / sqrt(2), solved as a real symmetric tridiagonal problem.
/// Dense: full complex Hermitian draw (kept as a cross-check).
SpectrumSample sample_gue_spectrum(int n, Stream& rng, GueMethod method = GueMethod::Tridiagonal);

/// Single-eigenvalue marginal of the n x n GUE:
/// (1/n) e^{-x^2/2} sum_{j<n} psi_j(x)^2.
double rho_pdf(int n, double x);

/// Draw from rho_n through a GUE spectrum and a uniform pick. Slow; test oracle.
double sample_rho_oracle(int n, Stream& rng);

/// Wigner semicircle (1/pi) sqrt(2 - x^2) on [-sqrt2, sqrt2].
double semicircle_pdf(double x);

/// Bound on semicircle(radius 2) / r, r = 1/2 [N(-1, 0.8^2) + N(1, 0.8^2)].
inline constexpr double kSemicircleBound = 1.42;

struct RejectionCounters {
    std::uint64_t proposals = 0;
    std::uint64_t accepts = 0;

    double rate() const { return proposals ? static_cast<double>(accepts) / static_cast<double>(proposals) : 0.0; }
    RejectionCounters& operator+=(const RejectionCounters& o) {
        proposals += o.proposals;
        accepts += o.accepts;
        return *this;
    }
};

double sample_semicircle(Stream& rng, RejectionCounters* counters = nullptr);

inline constexpr double kStudentDof = 10.0;

/// Fitted mixture weight p(n), clamped into (0, 1).
double mixture_p(int n);
/// Fitted rejection bound M(n).
double bound_M(int n);

/// Student-t density with nu degrees of freedom.
double student_t_pdf(double x, double nu);

/// Proposal h for rho_n in x, built in the rescaled coordinate u = x / sqrt(2n):
/// (1/sqrt(2n)) [p g_nu(u) + (1-p) rho_SC(u)].
double mixture_pdf(int n, double x, double nu = kStudentDof);
double sample_mixture(int n, Stream& rng, double nu = kStudentDof);

struct RejectionCalibration {
    int n = 0;
    double mixture_p = 0.0;
    double dof_nu = kStudentDof;
    double bound_M = 0.0;
    /// Inflated grid maximum of rho_n / h before taking max with the fit.
    double grid_max = 0.0;
    double measured_acceptance = 0.0;
    int grid_points = 0;
    double grid_half_width_pad = 0.0;
};

inline constexpr int kDefaultGridPoints = 20001;
inline constexpr double kGridSafety = 1.02;
inline constexpr int kAcceptanceTrials = 10000;

/// Grid-verified bound for rho_n / h on (-2 sqrt n - pad, 2 sqrt n + pad).
/// Deterministic: the acceptance estimate uses a stream keyed by n.
RejectionCalibration calibrate(int n, double grid_half_width_pad = 10.0, int grid_points = kDefaultGridPoints,
                               double nu = kStudentDof);

/// Exact draw from rho_n by rejection against the mixture proposal.
/// Throws CalibrationError if a proposal exceeds the stored bound.
double sample_rho(int n, const RejectionCalibration& calib, Stream& rng, RejectionCounters* counters = nullptr);

nlohmann::json to_json(const RejectionCalibration& c);
RejectionCalibration calibration_from_json(const nlohmann::json& j);

/// Thread-safe n -> calibration cache. Entries missing from a loaded table are
/// computed on demand with default grid settings.
class CalibrationTable {
  public:
    CalibrationTable() = default;
    CalibrationTable(CalibrationTable&& other) noexcept : table_(std::move(other.table_)) {}
    CalibrationTable& operator=(CalibrationTable&& other) noexcept {
        std::scoped_lock lock(mutex_, other.mutex_);
        table_ = std::move(other.table_);
        return *this;
    }

    const RejectionCalibration& get(int n);
    void insert(const RejectionCalibration& c);
    std::vector<RejectionCalibration> entries() const;

    nlohmann::json to_json(const std::string& created) const;
    static CalibrationTable from_json(const nlohmann::json& j);
    static CalibrationTable load(const std::string& path);

    /// Process-wide default cache (pure function of n, so sharing is safe).
    static CalibrationTable& shared();

  private:
    mutable std::mutex mutex_;
    std::map<int, RejectionCalibration> table_;
};

}  // namespace ghdpp::rmt
