#pragma once

#include <cstdint>
#include <random>

namespace ghdpp {

/// SplitMix64 finaliser. Used for seed derivation only.
std::uint64_t splitmix64(std::uint64_t x);

/// Random stream with a deterministic derivation rule.
///
/// A stream is identified by a 64-bit key. The root key is the user seed;
/// `derive(tag)` produces the child key splitmix64(splitmix64(key) ^ (tag * golden)).
/// Harnesses derive one child per repetition (tag = rep index) and, inside a
/// repetition, one child per stage, so serial and parallel runs draw identical
/// numbers. A stream must not be shared between threads.
class Stream {
  public:
    explicit Stream(std::uint64_t key) : key_(key), engine_(splitmix64(key)) {}

    std::uint64_t key() const { return key_; }
    Stream derive(std::uint64_t tag) const;

    double uniform();  // [0, 1)
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    double chi(double dof);
    double student_t(double dof);
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    double exponential(double rate);
    std::uint64_t poisson(double mean);

    std::mt19937_64& engine() { return engine_; }

  private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
};

}  // namespace ghdpp
