#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace pooledcs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/**
 * Deterministic, splittable random stream.
 *
 * A stream is keyed by a master seed and a path of 64-bit labels (trial
 * index, purpose tag, ...). The key is folded through splitmix64 and seeds a
 * xoshiro256** state, so streams with distinct paths share no state and can
 * be created independently on any thread.
 *
 * Satisfies UniformRandomBitGenerator.
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t master_seed,
                       std::initializer_list<std::uint64_t> path = {});
    RngStream(std::uint64_t master_seed, const std::vector<std::uint64_t>& path);

    /// Child stream whose path is this stream's path plus `label`.
    RngStream derive(std::uint64_t label) const;

    std::uint64_t master_seed() const noexcept { return seed_; }
    const std::vector<std::uint64_t>& path() const noexcept { return path_; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    double standard_normal();

private:
    void seed_state();

    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
    std::array<std::uint64_t, 4> state_{};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Returns 1 with probability q. Throws ParameterError unless 0 < q < 1.
int sample_bernoulli(RngStream& stream, double q);

double sample_standard_normal(RngStream& stream);

/// Bit pattern of a double, for use as a stream label. Both zeros map to 0.
std::uint64_t label_of(double value) noexcept;

/**
 * Largest eigenvalue of MᵀM by power iteration from the normalized all-ones
 * vector. Stops once two successive Rayleigh quotients agree to relative
 * tolerance `tol`; throws ConvergenceError (carrying the last estimate)
 * after `max_iter` iterations.
 */
double spectral_norm_sq(const Matrix& m, double tol = 1e-10, int max_iter = 10000);

}  // namespace pooledcs
