#pragma once

#include "pooledcs/config.hpp"
#include "pooledcs/pooling.hpp"
#include "pooledcs/simulate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pooledcs {

/// Empirical frequency of a tail event against its theoretical bound.
struct TailReport {
    std::string name;
    std::uint64_t trials = 0;
    std::uint64_t violations = 0;
    std::optional<double> empirical_rate;  // empty when trials == 0
    double theoretical_rate = 0.0;
    /// 4 sqrt(r (1-r) / trials) at the theoretical rate r.
    double monte_carlo_4sigma = 0.0;

    static TailReport make(std::string name, std::uint64_t trials, std::uint64_t violations,
                           double theoretical_rate);
    /// empirical_rate <= theoretical_rate + monte_carlo_4sigma.
    bool passed() const;
    std::string describe() const;
};

/// Violation rate of |Ãᵀ(ỹ - Ãx*)|_k > β_k for both weight kinds.
struct C1Report {
    TailReport lasso;   // any coordinate above the uniform β
    TailReport wlasso;  // any coordinate above its β_k
    /// Coordinate-level violations of β_k summed over trials.
    std::uint64_t wlasso_coordinate_violations = 0;
    Index p = 0;
    /// Trials whose weights could not be computed.
    std::uint64_t skipped = 0;
    double max_rate = 0.01;

    bool passed() const;
    std::string describe() const;
};

C1Report validate_c1(const ExperimentConfig& config, const Cell& cell, std::uint64_t trials);

struct LambdaCoverage {
    std::uint64_t trials = 0;
    std::uint64_t invalid = 0;  // Λ̂ undefined (assumption failure)
    std::uint64_t valid = 0;
    std::optional<double> min_ratio;
    std::optional<double> max_ratio;
    std::optional<double> mean_ratio;
    std::optional<double> fraction_under;   // Λ̂ < ‖x*‖₁
    std::optional<double> fraction_over_2;  // Λ̂ > 2‖x*‖₁
    std::optional<double> mean_l1;
    std::optional<double> sd_l1;
    std::optional<double> mean_lambda;
    std::optional<double> sd_lambda;

    /// At most 1% undercoverage and no ratio above 2.
    bool passed() const;
    std::string describe() const;
};

LambdaCoverage validate_lambda_hat(const ExperimentConfig& config, const Cell& cell,
                                   std::uint64_t trials);

/// P(S_n <= nq - θ max(q,1-q)/3 - sqrt(2θ n q (1-q))) against e^{-θ}, with
/// S_n a sum of n Bernoulli(q) draws.
TailReport validate_bernstein(Index n, double q, double theta, std::uint64_t trials,
                              RngStream stream);

struct GaussianSettings {
    Index n = 50;
    Index p = 200;
    double q = 0.5;
    double f_s = 0.05;
    NoiseParams noise;
    double theta = 2.0;
    std::uint64_t trials = 100'000;
    NoiseModel model = NoiseModel::linearized;
};

struct GaussianReport {
    TailReport two_sided;  // column of R, bound 3e^{-θ}
    TailReport one_sided;  // same column, upper tail, bound 2e^{-θ}
    TailReport ones;       // direction -1_n (the Λ̂ event), bound 2e^{-θ}
    double radius_factor = 0.0;

    bool passed() const;
    std::string describe() const;
};

/**
 * Fixes A and x* from `stream`, then redraws the noise `trials` times and
 * counts |R_kᵀ(y - Ax*)| >= sqrt(R̄_kᵀ y²) κ sqrt(2θ) / (1 - κ sqrt(2 g(θ)))
 * for column k = 0, its upper tail, and the -1_n direction.
 * Throws AssumptionError when κ sqrt(2 g(θ)) >= 1.
 */
GaussianReport validate_gaussian_concentration(const GaussianSettings& settings,
                                               RngStream stream);

/// Counts violations of Σ_l s_l (Σ_m a_{l,m} x_m)² <= max_m(Σ_l s_l a_{l,m}) ‖x‖₁²
/// over random nonnegative s, binary a and real x of random small dimensions.
TailReport validate_auxiliary_inequality(std::uint64_t instances, RngStream stream);

/// Counts violations of R̄_kᵀ(Ax*)² <= ‖x*‖₁² W over random pooling instances.
TailReport validate_dominance(Index n, Index p, double q, double f_s, std::uint64_t instances,
                              RngStream stream);

struct SurrogateIdentityReport {
    std::uint64_t draws = 0;
    double max_gram_deviation = 0.0;  // max |mean(ÃᵀÃ) - I|
    double max_mean_gradient = 0.0;   // max_k |mean (Ãᵀ(ỹ - Ãx*))_k|
    double max_gradient_magnitude = 0.0;  // largest single |(Ãᵀ(ỹ - Ãx*))_k| seen

    bool passed(double tolerance = 0.05) const;
    std::string describe() const;
};

/// Averages ÃᵀÃ and the gradient at x* over fresh A (and noise) with x*
/// fixed from the first draw.
SurrogateIdentityReport validate_surrogate_identities(Index n, Index p, double q,
                                                      std::uint64_t draws, RngStream stream,
                                                      NoiseModel model = NoiseModel::linearized);

/// γ(γ+2)/(γ-2). Throws ParameterError for γ <= 2.
double rho_gamma(double gamma);

struct Prop3Inputs {
    double gamma = 4.0;
    double epsilon = 0.1;
    RecParams rec;
    std::vector<Index> support;
    Vector beta_k;       // per-coordinate weights (constant for LASSO)
    double c_universal = 1.0;
};

/// Error bounds up to the unknown universal constant c (c_universal).
struct Prop3Bound {
    double rho = 0.0;
    double beta_s_norm = 0.0;  // ‖β_S‖₂
    double beta_min = 0.0;
    double beta_max = 0.0;
    Index s = 0;
    /// (c ρ / ε²) ‖β_S‖₂ and whether ‖β_S‖₂ <= β_min (κ₂ - ε) / (κ₁ ρ).
    double wlasso_bound = 0.0;
    bool wlasso_gate = false;
    /// (c ρ / ε²) β_max √s and whether √s <= (κ₂ - ε) / (κ₁ ρ).
    double lasso_bound = 0.0;
    bool lasso_gate = false;
};

/// Throws ParameterError for γ <= 2, ε <= 0, ε >= κ₂ or an out-of-range
/// support index.
Prop3Bound prop3_bound(const Prop3Inputs& inputs);

struct TrendCell {
    Index n = 0;
    double f_s = 0.0;
    Estimator estimator = Estimator::lasso;
    std::optional<double> gamma;
    std::optional<double> mean_rrmse;
};

struct ScalePoint {
    double scale = 1.0;
    Estimator estimator = Estimator::lasso;
    std::optional<double> mean_rrmse;
    /// Largest per-trial |RRMSE - RRMSE at the first scale|.
    std::optional<double> max_paired_difference;
};

struct TrendReport {
    double q = 0.5;
    std::vector<TrendCell> cells;
    bool decreasing_in_n = false;
    bool increasing_in_f_s = false;
    Index scale_n = 0;
    double scale_f_s = 0.0;
    std::vector<ScalePoint> scale_series;
    bool flat_in_scale = false;
    double scale_tolerance = 1e-6;

    bool passed() const { return decreasing_in_n && increasing_in_f_s && flat_in_scale; }
    std::string describe() const;
};

/**
 * Full pipeline over n_list × f_s_list at q_list[0] and sigma, plus the
 * signal-scale series of config.validation.scale_series at
 * (n_list[middle], f_s_list[0]) with paired streams.
 */
TrendReport validate_trends(const ExperimentConfig& config);

}  // namespace pooledcs
