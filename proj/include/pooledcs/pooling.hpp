#pragma once

#include "pooledcs/numerics.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pooledcs {

/// Binary n×p pool-membership matrix: entry (l, k) is 1 iff sample k is in
/// pool l. Entries are Bernoulli(q) when produced by
/// generate_pooling_matrix.
class PoolingMatrix {
public:
    /// Throws ParameterError if any entry is not 0/1 or q is outside (0, 1).
    PoolingMatrix(Matrix membership, double q);

    const Matrix& membership() const noexcept { return a_; }
    double q() const noexcept { return q_; }
    Index pools() const noexcept { return a_.rows(); }
    Index samples() const noexcept { return a_.cols(); }

private:
    Matrix a_;
    double q_;
};

/// Recentered and rescaled pair (Ã, ỹ) fed to the estimators.
struct SurrogateSystem {
    Matrix a_tilde;
    Vector y_tilde;
    double source_q = 0.0;
};

/// Restricted-eigenvalue parameters for Ã. Only reported as diagnostics.
struct RecParams {
    double kappa1 = 0.0;
    double kappa2 = 0.25;
    double c_rec = 1.0;
};

/// Empty pools (all-zero rows) and samples tested in fewer than two pools.
struct PoolingDiagnostics {
    std::vector<Index> empty_pools;
    std::vector<Index> undercovered_samples;

    std::size_t warning_count() const noexcept {
        return empty_pools.size() + undercovered_samples.size();
    }
    bool clean() const noexcept { return warning_count() == 0; }
    std::string describe() const;
};

/// i.i.d. Bernoulli(q) entries, returned as drawn (degenerate draws are kept).
/// Requires n >= 2, p >= 2, n < p and q in (0, 1).
PoolingMatrix generate_pooling_matrix(Index n, Index p, double q, RngStream& stream);

/// Ã[l,k] = (A[l,k] - q) / sqrt(n q (1-q)).
Matrix surrogate_matrix(const PoolingMatrix& a);

/// ỹ_j = (n y_j - Σ_l y_l) / ((n-1) sqrt(n q (1-q))). Requires n = |y| >= 2.
Vector surrogate_measurements(const Vector& y, Index n, double q);

SurrogateSystem make_surrogate(const PoolingMatrix& a, const Vector& y);

RecParams rec_parameters(Index n, Index p, double q, double c_rec = 1.0);

PoolingDiagnostics validate_pooling(const PoolingMatrix& a);

/// Plain-text format: a header line "n p q" followed by n lines of p
/// space-separated 0/1 digits.
void write_pooling_matrix(std::ostream& out, const PoolingMatrix& a);
PoolingMatrix read_pooling_matrix(std::istream& in);

}  // namespace pooledcs
