#include "pooledcs/weights.hpp"

#include "pooledcs/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pooledcs {

namespace {

double max_q(double q) { return std::max(q, 1.0 - q); }

void require_consistent(const PoolingMatrix& a, const Vector& y, const WeightParams& params) {
    if (params.n != a.pools() || params.p != a.samples() || y.size() != a.pools()) {
        std::ostringstream msg;
        msg << "weights: shape mismatch (params n=" << params.n << " p=" << params.p
            << ", matrix " << a.pools() << "x" << a.samples() << ", |y|=" << y.size() << ")";
        throw ParameterError(msg.str());
    }
    if (params.q != a.q()) {
        throw ParameterError("weights: params.q differs from the pooling matrix q");
    }
}

AssumptionReport gate(const WeightParams& params) {
    AssumptionReport report = check_assumptions(params);
    report.forced = params.force;
    if (!report.all_passed() && !params.force) {
        throw AssumptionError("weights: assumptions violated\n" + report.describe());
    }
    return report;
}

double noise_factor(const WeightParams& params) {
    return noise_tail_factor(params.noise.kappa(), params.theta, params.n);
}

// c (θ/n + max(q², (1-q)²) θ² / (n² q (1-q))) Λ̂
double recentering_term(const WeightParams& params, double lambda) {
    const double n = static_cast<double>(params.n);
    const double q = params.q;
    const double m = max_q(q);
    const double theta = params.theta;
    return params.c_const * (theta / n + m * m * theta * theta / (n * n * q * (1.0 - q))) * lambda;
}

}  // namespace

WeightParams WeightParams::standard(Index n, Index p, double q, NoiseParams noise) {
    WeightParams params;
    params.n = n;
    params.p = p;
    params.q = q;
    params.noise = noise;
    params.theta = 3.0 * std::log(static_cast<double>(p));
    return params;
}

bool AssumptionReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
    for (const auto& check : checks) {
        if (check.name == name) {
            return &check;
        }
    }
    return nullptr;
}

std::string AssumptionReport::describe() const {
    std::ostringstream out;
    for (const auto& c : checks) {
        out << c.name << ' ' << (c.passed ? "PASS" : "FAIL") << " lhs=" << c.lhs
            << " rhs=" << c.rhs << " (" << c.message << ")\n";
    }
    if (forced && !all_passed()) {
        out << "forced: weights computed despite failing checks\n";
    }
    return out.str();
}

double g_theta(double theta, Index n) {
    if (!(theta > 0.0)) {
        throw ParameterError("g_theta: theta must be positive");
    }
    if (n < 1) {
        throw ParameterError("g_theta: n must be at least 1");
    }
    const double nd = static_cast<double>(n);
    // 1 - (1 - e^{-θ})^{1/n} ≈ e^{-θ}/n once e^{-θ} underflows.
    if (theta > 700.0) {
        return theta + std::log(nd);
    }
    const double root = std::log1p(-std::exp(-theta)) / nd;  // ln (1 - e^{-θ})^{1/n}
    return -std::log(-std::expm1(root));
}

double noise_tail_factor(double kappa, double theta, Index n) {
    const double slack = 1.0 - kappa * std::sqrt(2.0 * g_theta(theta, n));
    if (!(slack > 0.0)) {
        throw AssumptionError("A3 violated: kappa * sqrt(2 g(theta)) >= 1");
    }
    return kappa * std::sqrt(2.0 * theta) / slack;
}

double c_n_theta(Index n, double q, double theta) {
    if (n < 1 || !(theta >= 0.0)) {
        throw ParameterError("c_n_theta: need n >= 1 and theta >= 0");
    }
    const double nd = static_cast<double>(n);
    return std::sqrt(2.0 * nd * q * (1.0 - q) * theta) + max_q(q) * theta / 3.0;
}

double sigma_bound_simplified(double p) {
    if (!(p >= 2.0)) {
        throw ParameterError("sigma_bound_simplified: p must be at least 2");
    }
    return 1.0 / (2.0 * std::numbers::ln2 * std::sqrt(2.0 * std::log(p)));
}

AssumptionReport check_assumptions(const WeightParams& params) {
    AssumptionReport report;
    const double n = static_cast<double>(params.n);
    const double p = static_cast<double>(params.p);
    const double q = params.q;
    const double log_p = p > 0.0 ? std::log(p) : 0.0;

    {
        AssumptionCheck a1{"A1", false, n * q, 12.0 * max_q(q) * log_p, "nq >= 12 max(q,1-q) ln p"};
        a1.passed = a1.lhs >= a1.rhs;
        report.checks.push_back(a1);
    }
    {
        AssumptionCheck a2{"A2", params.p >= 2, p, 2.0, "p >= 2"};
        report.checks.push_back(a2);
    }
    {
        AssumptionCheck a3{"A3", false, params.noise.sigma, 0.0,
                           "sigma < [sqrt2 ln(1+q_a)]^-1 g(3 ln p)^-1/2"};
        if (params.n >= 1 && params.p >= 2) {
            const double g = g_theta(3.0 * log_p, params.n);
            a3.rhs = 1.0 / (std::sqrt(2.0) * std::log1p(params.noise.q_a) * std::sqrt(g));
            a3.passed = a3.lhs < a3.rhs;
        } else {
            a3.message += "; undefined for n < 1 or p < 2";
        }
        report.checks.push_back(a3);
    }
    {
        AssumptionCheck c126{"C126", true, n, 20.0, "c = 126 requires n >= 20"};
        if (params.c_const == 126.0) {
            c126.passed = params.n >= 20;
        } else {
            c126.message = "c != 126, proviso not applicable";
        }
        report.checks.push_back(c126);
    }
    {
        AssumptionCheck theta{"THETA", params.theta > 1.0, params.theta, 1.0, "theta > 1"};
        report.checks.push_back(theta);
    }
    return report;
}

double lambda_hat(const Vector& y, const WeightParams& params) {
    if (params.n < 1 || y.size() != params.n) {
        throw ParameterError("lambda_hat: |y| must equal n");
    }
    const double denom = static_cast<double>(params.n) * params.q -
                         c_n_theta(params.n, params.q, params.theta);
    if (!(denom > 0.0)) {
        std::ostringstream msg;
        msg << "A1 violated: lambda_hat denominator nq - C_{n,theta} = " << denom << " <= 0";
        throw AssumptionError(msg.str());
    }
    const double factor = noise_factor(params);
    return (y.sum() + std::sqrt(y.squaredNorm()) * factor) / denom;
}

RMatrices r_matrices(const PoolingMatrix& a) {
    const Index n = a.pools();
    if (n < 2) {
        throw ParameterError("r_matrices: need at least 2 pools");
    }
    const double q = a.q();
    const double nd = static_cast<double>(n);
    const double denom = nd * (nd - 1.0) * q * (1.0 - q);
    const Matrix& m = a.membership();
    const Eigen::RowVectorXd col_sums = m.colwise().sum();

    RMatrices rm;
    rm.r = ((nd * m).rowwise() - col_sums) / denom;
    rm.r_bar = rm.r.cwiseProduct(rm.r);
    return rm;
}

double w_statistic(const PoolingMatrix& a, const RMatrices& rm) {
    if (rm.r_bar.rows() != a.pools() || rm.r_bar.cols() != a.samples()) {
        throw ParameterError("w_statistic: R-bar shape does not match the pooling matrix");
    }
    const Matrix cross = rm.r_bar.transpose() * a.membership();
    return cross.maxCoeff();
}

Vector WeightSet::per_coordinate(Index p) const {
    if (kind == WeightKind::uniform) {
        return Vector::Constant(p, beta);
    }
    return beta_k;
}

WeightSet beta_lasso(const PoolingMatrix& a, const Vector& y, const WeightParams& params) {
    return beta_lasso(a, y, params, r_matrices(a));
}

WeightSet beta_lasso(const PoolingMatrix& a, const Vector& y, const WeightParams& params,
                     const RMatrices& rm) {
    require_consistent(a, y, params);
    WeightSet set;
    set.kind = WeightKind::uniform;
    set.report = gate(params);
    set.theta = params.theta;
    set.c_const = params.c_const;
    set.kappa = params.noise.kappa();
    set.lambda_hat = lambda_hat(y, params);
    set.w = w_statistic(a, rm);
    set.beta = set.kappa * set.lambda_hat * std::sqrt(2.0 * params.theta * set.w) +
               recentering_term(params, set.lambda_hat);
    return set;
}

WeightSet beta_wlasso(const PoolingMatrix& a, const Vector& y, const WeightParams& params) {
    return beta_wlasso(a, y, params, r_matrices(a));
}

WeightSet beta_wlasso(const PoolingMatrix& a, const Vector& y, const WeightParams& params,
                      const RMatrices& rm) {
    require_consistent(a, y, params);
    WeightSet set;
    set.kind = WeightKind::per_coordinate;
    set.report = gate(params);
    set.theta = params.theta;
    set.c_const = params.c_const;
    set.kappa = params.noise.kappa();
    set.lambda_hat = lambda_hat(y, params);

    const Vector y2 = y.cwiseProduct(y);
    const Vector projected = rm.r_bar.transpose() * y2;
    const double factor = noise_factor(params);
    const double shared = recentering_term(params, set.lambda_hat);
    set.beta_k = (projected.array().sqrt() * factor + shared).matrix();
    return set;
}

Vector gradient_at_truth(const Matrix& a_tilde, const Vector& y_tilde, const Vector& x_star) {
    if (a_tilde.rows() != y_tilde.size() || a_tilde.cols() != x_star.size()) {
        throw ParameterError("gradient_at_truth: shape mismatch");
    }
    return a_tilde.transpose() * (y_tilde - a_tilde * x_star);
}

}  // namespace pooledcs
