#pragma once

#include "pooledcs/simulate.hpp"
#include "pooledcs/solver.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pooledcs {

enum class Estimator { lasso, wlasso };

std::string_view to_string(Estimator estimator);
Estimator estimator_from_string(std::string_view name);

/// One (n, f_s, q, sigma) combination of a sweep.
struct Cell {
    Index n = 0;
    double f_s = 0.0;
    double q = 0.5;
    double sigma = 0.05;
};

/// Parameters of the Monte-Carlo validators that are not part of a sweep.
struct ValidationSettings {
    double theta = 2.0;
    Index bernstein_n = 100;
    double bernstein_q = 0.5;
    std::uint64_t bernstein_trials = 1'000'000;
    Index gaussian_n = 50;
    Index gaussian_p = 200;
    double gaussian_f_s = 0.05;
    std::uint64_t gaussian_trials = 100'000;
    std::uint64_t c1_trials = 200;
    std::uint64_t lambda_trials = 1000;
    std::vector<double> scale_series{1.0, 4.0, 16.0};
};

struct ExperimentConfig {
    Index p = 1000;
    std::vector<Index> n_list{150, 200, 300, 375, 500};
    std::vector<double> f_s_list{0.02, 0.04, 0.08, 0.15};
    std::vector<double> q_list{0.05, 0.1, 0.25, 0.5, 0.75};
    double sigma = 0.05;
    std::vector<double> sigma_list;  // overrides sigma when non-empty
    double q_a = 0.95;
    int trials = 200;
    int cv_runs = 5;
    std::vector<double> gamma_grid = default_gamma_grid();
    std::vector<Estimator> estimators{Estimator::lasso, Estimator::wlasso};
    double threshold = 0.2;
    NoiseModel noise_model = NoiseModel::exact;
    std::uint64_t seed = 20230611;
    bool force_assumptions = false;
    double c_const = 126.0;
    double c_rec = 1.0;
    /// Multiplies every generated ground truth.
    double signal_scale = 1.0;
    SolverConfig solver = default_solver();
    /// Worker threads; 0 means hardware concurrency.
    unsigned threads = 0;
    ValidationSettings validation;

    /// 24 geometric points on [1e-5, 64].
    static std::vector<double> default_gamma_grid();
    /// FISTA; the nearly interpolating small-γ fits stall coordinate descent.
    static SolverConfig default_solver();
    /// Full-size grid (p = 1000, 200 trials).
    static ExperimentConfig paper();
    /// p = 400, 30 trials: finishes in minutes on one core.
    static ExperimentConfig desk();
    static ExperimentConfig preset(std::string_view name);

    /// Every cell in sweep order: sigma, then q, then n, then f_s.
    std::vector<Cell> cells() const;
    std::vector<double> sigmas() const;
    NoiseParams noise(const Cell& cell) const { return NoiseParams{cell.sigma, q_a}; }
    void validate() const;
};

/// Parses a JSON document. An optional "preset" key selects the base
/// configuration; every other key overrides a field. Unknown keys throw
/// ConfigError.
ExperimentConfig config_from_json(std::string_view text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

/// Parses "n=200,q=0.5,fs=0.04[,sigma=0.05]"; missing keys fall back to the
/// first value of the corresponding config list.
Cell parse_cell(std::string_view text, const ExperimentConfig& config);

}  // namespace pooledcs
