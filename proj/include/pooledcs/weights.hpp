#pragma once

#include "pooledcs/numerics.hpp"
#include "pooledcs/pooling.hpp"
#include "pooledcs/simulate.hpp"

#include <string>
#include <vector>

namespace pooledcs {

/// Inputs shared by the LASSO and weighted-LASSO weight formulas.
struct WeightParams {
    Index n = 0;
    Index p = 0;
    double q = 0.5;
    NoiseParams noise;
    /// Tail level; weights use 3 ln p.
    double theta = 0.0;
    /// Constant multiplying the recentering term. 126 is valid for n >= 20.
    double c_const = 126.0;
    /// Compute weights even when A1-A3 fail; failures stay in the report.
    bool force = false;

    static WeightParams standard(Index n, Index p, double q, NoiseParams noise);
};

struct AssumptionCheck {
    std::string name;
    bool passed = false;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string message;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool forced = false;

    bool all_passed() const;
    const AssumptionCheck* find(const std::string& name) const;
    /// One line per check: "A1 PASS lhs=... rhs=... (message)".
    std::string describe() const;
};

/// g(θ) = ln(1 / (1 - (1 - e^{-θ})^{1/n})).
double g_theta(double theta, Index n);

/// κ sqrt(2θ) / (1 - κ sqrt(2 g(θ))), the multiplier of sqrt(Σ r_l² y_l²) in
/// the Gaussian tail bound. Throws AssumptionError when κ sqrt(2 g(θ)) >= 1.
double noise_tail_factor(double kappa, double theta, Index n);

/// Bernstein radius C_{n,θ} = sqrt(2 n q (1-q) θ) + max(q, 1-q) θ / 3.
double c_n_theta(Index n, double q, double theta);

/// Sufficient noise level for A3 at every n < p and q_a <= 1:
/// 1 / (2 ln 2 sqrt(2 ln p)).
double sigma_bound_simplified(double p);

/// Evaluates A1 (nq >= 12 max(q,1-q) ln p), A2 (p >= 2),
/// A3 (κ sqrt(2 g(3 ln p)) < 1) and the c = 126 => n >= 20 proviso. Never
/// throws on a failing check.
AssumptionReport check_assumptions(const WeightParams& params);

/**
 * High-probability over-estimate of ‖x*‖₁ at tail level params.theta:
 *
 *   (Σy + sqrt(Σy²) κ sqrt(2θ) / (1 - κ sqrt(2 g(θ)))) / (nq - C_{n,θ})
 *
 * which at θ = 3 ln p is the estimator used by both weight formulas.
 * Throws AssumptionError when the denominator is not positive (A1) or
 * κ sqrt(2 g(θ)) >= 1 (A3).
 */
double lambda_hat(const Vector& y, const WeightParams& params);

/// Column-k view R_k of the n×p gradient-direction matrix
///   R[l,k] = (n A[l,k] - Σ_l' A[l',k]) / (n (n-1) q (1-q)),
/// and its elementwise square R̄.
struct RMatrices {
    Matrix r;
    Matrix r_bar;
};

RMatrices r_matrices(const PoolingMatrix& a);

/// W = max entry of R̄ᵀA (a p×p matrix).
double w_statistic(const PoolingMatrix& a, const RMatrices& rm);

enum class WeightKind { uniform, per_coordinate };

struct WeightSet {
    WeightKind kind = WeightKind::uniform;
    double beta = 0.0;      // uniform kind
    Vector beta_k;          // per-coordinate kind
    double lambda_hat = 0.0;
    double w = 0.0;         // uniform kind only
    double theta = 0.0;
    double c_const = 0.0;
    double kappa = 0.0;
    AssumptionReport report;

    /// β_k for every coordinate (β repeated for the uniform kind).
    Vector per_coordinate(Index p) const;
};

WeightSet beta_lasso(const PoolingMatrix& a, const Vector& y, const WeightParams& params);
WeightSet beta_lasso(const PoolingMatrix& a, const Vector& y, const WeightParams& params,
                     const RMatrices& rm);

WeightSet beta_wlasso(const PoolingMatrix& a, const Vector& y, const WeightParams& params);
WeightSet beta_wlasso(const PoolingMatrix& a, const Vector& y, const WeightParams& params,
                      const RMatrices& rm);

/// Ãᵀ(ỹ - Ãx*): the quantity the weights must dominate coordinatewise.
Vector gradient_at_truth(const Matrix& a_tilde, const Vector& y_tilde, const Vector& x_star);

}  // namespace pooledcs
