#pragma once

#include "pooledcs/numerics.hpp"
#include "pooledcs/pooling.hpp"

#include <iosfwd>
#include <string_view>
#include <vector>

namespace pooledcs {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Ground-truth generator settings. round(f_s * p) entries ("infected") are
/// drawn from hi_range, the rest from lo_range.
struct SignalSpec {
    Index p = 0;
    double f_s = 0.0;
    Interval hi_range{1.0, 1000.0};
    Interval lo_range{0.0, 0.2};

    /// round(f_s * p), half-up.
    Index sparsity() const;
    void validate() const;
};

/// Multiplicative noise: y_j = (A x)_j (1 + q_a)^{w_j}, w_j ~ N(0, sigma^2).
struct NoiseParams {
    double sigma = 0.05;
    double q_a = 0.95;

    /// sigma * ln(1 + q_a)
    double kappa() const;
    /// sigma >= 1 leaves the low-variance regime the linearization relies on.
    bool sigma_warning() const { return sigma >= 1.0; }
    void validate() const;
};

enum class NoiseModel { exact, linearized };

std::string_view to_string(NoiseModel model);
NoiseModel noise_model_from_string(std::string_view name);

struct GroundTruth {
    Vector x_star;
    std::vector<Index> support;  // sorted ascending

    Index s() const { return static_cast<Index>(support.size()); }
};

GroundTruth generate_signal(const SignalSpec& spec, RngStream& stream);

/// Exact multiplicative model. x must be nonnegative.
Vector measure_exact(const PoolingMatrix& a, const Vector& x, const NoiseParams& noise,
                     RngStream& stream);

/// First-order expansion: y_j = (Ax)_j + (Ax)_j ln(1+q_a) w_j. Entries can be
/// negative for extreme w_j.
Vector measure_linearized(const PoolingMatrix& a, const Vector& x, const NoiseParams& noise,
                          RngStream& stream);

Vector measure(NoiseModel model, const PoolingMatrix& a, const Vector& x,
               const NoiseParams& noise, RngStream& stream);

/// One value per line, shortest round-trip formatting.
void write_vector(std::ostream& out, const Vector& v);
Vector read_vector(std::istream& in);

}  // namespace pooledcs
