#include "ghdpp/rng.hpp"

#include <cmath>

namespace ghdpp {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Stream Stream::derive(std::uint64_t tag) const {
    return Stream(splitmix64(splitmix64(key_) ^ ((tag + 1) * 0x9E3779B97F4A7C15ULL)));
}

double Stream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double Stream::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

double Stream::chi(double dof) { return std::sqrt(std::chi_squared_distribution<double>(dof)(engine_)); }

double Stream::student_t(double dof) {
    // Z / sqrt(V / nu), V ~ chi^2_nu
    const double z = normal();
    const double v = std::chi_squared_distribution<double>(dof)(engine_);
    return z / std::sqrt(v / dof);
}

std::size_t Stream::index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

double Stream::exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }

std::uint64_t Stream::poisson(double mean) { return std::poisson_distribution<std::uint64_t>(mean)(engine_); }

}  // namespace ghdpp
