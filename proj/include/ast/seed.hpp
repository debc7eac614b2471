#pragma once

#include <cstdint>
#include <vector>

// Seeded pseudorandomness utilities shared by the simulators and solvers.
//
// Everything that must replay bit-exactly is built on two primitives:
//
//   * mix64        -- the splitmix64 finalizer, an invertible avalanche mix
//   * SplitMix64   -- the splitmix64 sequence generator seeded via mix64
//
// Standard-library distributions are deliberately avoided on these paths:
// std::normal_distribution and std::uniform_*_distribution have
// implementation-defined algorithms, so the same seed could produce
// different draws under a different standard library. The uniform and
// normal mappings below are fixed by this header.

namespace ast {

/// Action seed handed to a simulator step. One seed drives all stochastic
/// choices of that step.
using Seed = std::uint64_t;

/// A root-to-leaf path of step seeds; replaying it reproduces a trajectory.
using SeedSequence = std::vector<Seed>;

/// splitmix64 finalizer (Steele, Lea, Flood 2014). Full-avalanche, bijective.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Decorrelated substream root for (base, index) pairs. Used for per-search
/// seeds, per-aircraft noise streams, and similar fan-outs.
constexpr std::uint64_t derive_stream(std::uint64_t base, std::uint64_t index) noexcept {
    return mix64(base ^ mix64(index + 0x632be59bd9b4e019ull));
}

/// Map 64 random bits to a double in [0, 1) with 53-bit resolution.
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Inverse standard normal CDF, Acklam's rational approximation
/// (peak relative error ~1.15e-9). Deterministic composition of +,*,/,
/// sqrt and log only.
double inverse_normal_cdf(double p);

/// Standard normal density.
double normal_pdf(double x);

/// Log of the normal density with standard deviation sigma.
double log_normal_pdf(double x, double sigma);

/// splitmix64 sequence generator. Simulators derive one of these per step
/// (or per step and aircraft) from the action seed, so a step's draws are a
/// pure function of (state, seed).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(mix64(seed)) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_unit() noexcept { return to_unit_interval(next()); }

    /// Uniform in [lo, hi).
    double next_in(double lo, double hi) noexcept { return lo + (hi - lo) * next_unit(); }

    /// Standard normal via inverse-CDF of a uniform (monotone in the
    /// underlying uniform; the half-open interval is nudged to (0, 1)).
    double next_normal();

private:
    std::uint64_t state_;
};

}  // namespace ast
