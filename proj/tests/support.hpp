#pragma once

// Shared helpers for the unit tests: a seeded generator and a tiny
// property-check loop that reports the failing trial.

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    /// Strictly increasing abscissae starting at `start`.
    std::vector<double> increasing(std::size_t n, double start, double min_gap, double max_gap) {
        std::vector<double> v{start};
        while (v.size() < n) {
            v.push_back(v.back() + uniform(min_gap, max_gap));
        }
        return v;
    }

private:
    std::mt19937_64 rng_;
};

/// Runs `body(gen, trial)` for `trials` trials with a fixed seed.
template <typename Body>
void for_all(int trials, std::uint64_t seed, Body&& body) {
    Gen gen(seed);
    for (int trial = 0; trial < trials; ++trial) {
        CAPTURE(trial);
        body(gen, trial);
    }
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::abs(b);
}

} // namespace testing
