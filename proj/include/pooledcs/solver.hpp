#pragma once

#include "pooledcs/numerics.hpp"

#include <string_view>
#include <vector>

namespace pooledcs {

/**
 * min_x ‖ỹ - Ãx‖² + γ Σ_k β_k |x_k|
 *
 * Non-owning: the matrix and vectors must outlive the problem.
 */
struct LassoProblem {
    const Matrix& a_tilde;
    const Vector& y_tilde;
    const Vector& weights;  // β_k, one per column
    double gamma = 1.0;
    /// 2 ‖Ã‖² for FISTA's step size; computed on demand when 0.
    double lipschitz = 0.0;

    /// γ β_k
    double penalty(Index k) const { return gamma * weights[k]; }
    void validate() const;
};

enum class Algorithm { fista, coordinate_descent };

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);

struct SolverConfig {
    int max_iter = 50000;
    double tol_obj = 1e-10;  // relative objective change
    double tol_kkt = 1e-8;
    bool nonnegative = false;
    Algorithm algorithm = Algorithm::coordinate_descent;
};

struct SolverResult {
    Vector x_hat;
    int iterations = 0;
    double final_objective = 0.0;
    double kkt_residual = 0.0;
    bool converged = false;
    /// Objective after every iteration (sweep for coordinate descent).
    std::vector<double> objective_trace;
};

/// sign(v) max(|v| - t, 0); exactly 0 when |v| == t.
double soft_threshold(double v, double t);

double objective(const LassoProblem& problem, const Vector& x);

/**
 * Subgradient optimality residual with g = 2Ãᵀ(Ãx - ỹ):
 * |g_k + γβ_k sign(x_k)| for x_k != 0, max(|g_k| - γβ_k, 0) for x_k = 0.
 * With `nonnegative`, zero coordinates only need g_k + γβ_k >= 0 and
 * negative coordinates are infeasible (residual +inf).
 */
double kkt_residual(const LassoProblem& problem, const Vector& x, bool nonnegative = false);

/// Accelerated proximal gradient with step 1/L, L = 2 ‖Ã‖², restarted
/// whenever the objective increases. Starts from x0 when given, else 0.
SolverResult solve_fista(const LassoProblem& problem, const SolverConfig& config,
                         const Vector* x0 = nullptr);

/// Cyclic exact coordinate minimization.
SolverResult solve_coordinate_descent(const LassoProblem& problem, const SolverConfig& config,
                                      const Vector* x0 = nullptr);

/// Dispatches on config.algorithm.
SolverResult solve(const LassoProblem& problem, const SolverConfig& config,
                   const Vector* x0 = nullptr);

}  // namespace pooledcs
