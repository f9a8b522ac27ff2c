#include "pooledcs/solver.hpp"

#include "pooledcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pooledcs {

namespace {

double relative_change(double before, double after) {
    const double scale = std::max(std::abs(after), std::numeric_limits<double>::min());
    return std::abs(before - after) / scale;
}

double prox(double v, double t, bool nonnegative) {
    if (nonnegative) {
        return std::max(v - t, 0.0);
    }
    return soft_threshold(v, t);
}

double penalty_sum(const LassoProblem& problem, const Vector& x) {
    double total = 0.0;
    for (Index k = 0; k < x.size(); ++k) {
        total += problem.penalty(k) * std::abs(x[k]);
    }
    return total;
}

}  // namespace

void LassoProblem::validate() const {
    if (a_tilde.rows() != y_tilde.size() || a_tilde.cols() != weights.size()) {
        throw ParameterError("LassoProblem: shape mismatch between A, y and weights");
    }
    if (!(gamma >= 0.0)) {
        throw ParameterError("LassoProblem: gamma must be nonnegative");
    }
    for (Index k = 0; k < weights.size(); ++k) {
        if (!(weights[k] >= 0.0) || !std::isfinite(weights[k])) {
            throw ParameterError("LassoProblem: weights must be finite and nonnegative");
        }
    }
}

std::string_view to_string(Algorithm algorithm) {
    return algorithm == Algorithm::fista ? "fista" : "coordinate_descent";
}

Algorithm algorithm_from_string(std::string_view name) {
    if (name == "fista") {
        return Algorithm::fista;
    }
    if (name == "coordinate_descent" || name == "cd") {
        return Algorithm::coordinate_descent;
    }
    throw ParameterError("unknown solver algorithm \"" + std::string(name) + "\"");
}

namespace {

void check_start(const LassoProblem& problem, const Vector* x0) {
    if (x0 && x0->size() != problem.a_tilde.cols()) {
        throw ParameterError("solver: starting point has the wrong length");
    }
}

}  // namespace

double soft_threshold(double v, double t) {
    if (v > t) {
        return v - t;
    }
    if (v < -t) {
        return v + t;
    }
    return 0.0;
}

double objective(const LassoProblem& problem, const Vector& x) {
    return (problem.y_tilde - problem.a_tilde * x).squaredNorm() + penalty_sum(problem, x);
}

double kkt_residual(const LassoProblem& problem, const Vector& x, bool nonnegative) {
    const Vector g = 2.0 * (problem.a_tilde.transpose() * (problem.a_tilde * x - problem.y_tilde));
    double worst = 0.0;
    for (Index k = 0; k < x.size(); ++k) {
        const double lam = problem.penalty(k);
        double r = 0.0;
        if (nonnegative) {
            if (x[k] > 0.0) {
                r = std::abs(g[k] + lam);
            } else if (x[k] == 0.0) {
                r = std::max(-(g[k] + lam), 0.0);
            } else {
                r = std::numeric_limits<double>::infinity();
            }
        } else if (x[k] != 0.0) {
            r = std::abs(g[k] + lam * (x[k] > 0.0 ? 1.0 : -1.0));
        } else {
            r = std::max(std::abs(g[k]) - lam, 0.0);
        }
        worst = std::max(worst, r);
    }
    return worst;
}

SolverResult solve_fista(const LassoProblem& problem, const SolverConfig& config,
                         const Vector* x0) {
    problem.validate();
    check_start(problem, x0);
    const Matrix& a = problem.a_tilde;
    const Vector& y = problem.y_tilde;
    const Index p = a.cols();

    SolverResult result;
    result.x_hat = x0 ? *x0 : Vector::Zero(p);
    const double lipschitz =
        problem.lipschitz > 0.0 ? problem.lipschitz : 2.0 * spectral_norm_sq(a, 1e-10, 100000);
    if (lipschitz == 0.0) {
        result.final_objective = objective(problem, result.x_hat);
        result.kkt_residual = kkt_residual(problem, result.x_hat, config.nonnegative);
        result.converged = result.kkt_residual <= config.tol_kkt;
        return result;
    }
    const double step = 1.0 / lipschitz;

    Vector x = result.x_hat;
    Vector z = x;
    Vector x_next(p);
    double t = 1.0;
    double obj = objective(problem, x);

    int iter = 0;
    while (iter < config.max_iter) {
        ++iter;
        const Vector grad = 2.0 * (a.transpose() * (a * z - y));
        for (Index k = 0; k < p; ++k) {
            x_next[k] = prox(z[k] - step * grad[k], step * problem.penalty(k), config.nonnegative);
        }
        const double obj_next = objective(problem, x_next);
        if (obj_next > obj && t > 1.0) {
            // Momentum overshot: drop it and take a plain proximal step next.
            t = 1.0;
            z = x;
            result.objective_trace.push_back(obj);
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = x_next + ((t - 1.0) / t_next) * (x_next - x);
        const double rel = relative_change(obj, obj_next);
        x = x_next;
        obj = obj_next;
        t = t_next;
        result.objective_trace.push_back(obj);

        if (rel <= config.tol_obj) {
            const double kkt = kkt_residual(problem, x, config.nonnegative);
            if (kkt <= config.tol_kkt) {
                result.converged = true;
                break;
            }
        }
    }

    result.x_hat = x;
    result.iterations = iter;
    result.final_objective = obj;
    result.kkt_residual = kkt_residual(problem, x, config.nonnegative);
    result.converged = result.converged && result.kkt_residual <= config.tol_kkt;
    return result;
}

SolverResult solve_coordinate_descent(const LassoProblem& problem, const SolverConfig& config,
                                      const Vector* x0) {
    problem.validate();
    check_start(problem, x0);
    const Matrix& a = problem.a_tilde;
    const Vector& y = problem.y_tilde;
    const Index p = a.cols();

    const Vector col_sq = a.colwise().squaredNorm().transpose();
    Vector x = x0 ? *x0 : Vector::Zero(p);
    Vector residual = x0 ? Vector(y - a * x) : y;  // y - A x
    double obj = objective(problem, x);

    SolverResult result;
    int sweep = 0;
    while (sweep < config.max_iter) {
        ++sweep;
        for (Index k = 0; k < p; ++k) {
            if (col_sq[k] == 0.0) {
                x[k] = 0.0;
                continue;
            }
            // Minimizer of col_sq (x_k - rho / col_sq)^2 + λ_k |x_k|.
            const double rho = a.col(k).dot(residual) + col_sq[k] * x[k];
            const double updated =
                prox(rho, 0.5 * problem.penalty(k), config.nonnegative) / col_sq[k];
            const double delta = updated - x[k];
            if (delta != 0.0) {
                residual.noalias() -= delta * a.col(k);
                x[k] = updated;
            }
        }
        const double obj_next = residual.squaredNorm() + penalty_sum(problem, x);
        const double rel = relative_change(obj, obj_next);
        obj = obj_next;
        result.objective_trace.push_back(obj);

        if (rel <= config.tol_obj) {
            residual = y - a * x;
            const double kkt = kkt_residual(problem, x, config.nonnegative);
            if (kkt <= config.tol_kkt) {
                result.converged = true;
                break;
            }
        }
    }

    result.x_hat = x;
    result.iterations = sweep;
    result.final_objective = objective(problem, x);
    result.kkt_residual = kkt_residual(problem, x, config.nonnegative);
    result.converged = result.converged && result.kkt_residual <= config.tol_kkt;
    return result;
}

SolverResult solve(const LassoProblem& problem, const SolverConfig& config, const Vector* x0) {
    if (config.max_iter < 1 || !(config.tol_obj > 0.0) || !(config.tol_kkt > 0.0)) {
        throw ParameterError("SolverConfig: max_iter and tolerances must be positive");
    }
    return config.algorithm == Algorithm::fista ? solve_fista(problem, config, x0)
                                                : solve_coordinate_descent(problem, config, x0);
}

}  // namespace pooledcs
