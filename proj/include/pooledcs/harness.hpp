#pragma once

#include "pooledcs/config.hpp"
#include "pooledcs/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pooledcs {

/// One row of trials.csv: one (trial, estimator) pair.
struct TrialRecord {
    std::uint64_t trial_index = 0;
    Index n = 0;
    Index p = 0;
    double q = 0.0;
    double f_s = 0.0;
    double sigma = 0.0;
    double q_a = 0.0;
    Estimator estimator = Estimator::lasso;
    double gamma = 0.0;
    std::optional<double> rrmse;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> lambda_hat;
    double l1_norm_true = 0.0;
    std::optional<bool> c1_violated;
    std::size_t pooling_warnings = 0;
    std::optional<int> solver_iterations;
    std::optional<bool> converged;
    NoiseModel noise_model = NoiseModel::exact;
    /// Empty unless the trial was skipped; not written to CSV.
    std::string skip_reason;

    bool skipped() const { return !skip_reason.empty(); }
};

using GammaChoice = std::map<Estimator, double>;

/// Solves min ‖ỹ - Ãx‖² + γ Σ β_k |x_k| after dividing ỹ and β by the
/// power of two nearest below ‖ỹ‖∞, then rescales x̂. Power-of-two changes
/// of the signal scale therefore give bit-identical relative errors. x0, in
/// original units, is an optional warm start; a positive `lipschitz`
/// (2 ‖Ã‖²) skips recomputing FISTA's step size.
SolverResult solve_normalized(const Matrix& a_tilde, const Vector& y_tilde, const Vector& beta,
                              double gamma, const SolverConfig& config,
                              const Vector* x0 = nullptr, double lipschitz = 0.0);

/// Deterministic in (seed, cell, trial_index). Estimators without an entry in
/// `gammas` are left out.
std::vector<TrialRecord> run_trial(const ExperimentConfig& config, const Cell& cell,
                                   std::uint64_t trial_index, const GammaChoice& gammas);

/// γ minimizing mean preliminary RRMSE per estimator (ties go to the smaller
/// γ). Throws ConfigError for an estimator whose preliminary trials were all
/// skipped.
GammaChoice cross_validate_gamma(const ExperimentConfig& config, const Cell& cell);

/// Mean and sample standard deviation of the present values.
struct Summary {
    std::size_t count = 0;
    std::optional<double> mean;
    std::optional<double> sd;
};

Summary summarize(const std::vector<std::optional<double>>& values);

struct CellAggregate {
    Cell cell;
    Index p = 0;
    double q_a = 0.0;
    Estimator estimator = Estimator::lasso;
    std::optional<double> gamma;
    std::size_t trials = 0;
    Summary rrmse;
    Summary sensitivity;
    Summary specificity;
    Summary lambda_hat;
    Summary l1_norm_true;
    std::optional<double> c1_violation_rate;
    std::optional<double> converged_rate;
    NoiseModel noise_model = NoiseModel::exact;
    std::string status = "ok";
};

std::vector<CellAggregate> aggregate(const ExperimentConfig& config, const Cell& cell,
                                     const GammaChoice& gammas,
                                     const std::vector<TrialRecord>& records,
                                     const std::map<Estimator, std::string>& failures = {});

struct CellResult {
    Cell cell;
    GammaChoice gammas;
    std::vector<TrialRecord> records;
    std::vector<CellAggregate> aggregates;
};

/// Cross-validation followed by config.trials trials for one cell.
CellResult run_cell(const ExperimentConfig& config, const Cell& cell);

struct SweepResult {
    std::vector<TrialRecord> records;
    std::vector<CellAggregate> aggregates;
};

/// Every cell of the config. Work is spread over config.threads workers;
/// results are folded in cell and trial order, so output does not depend on
/// scheduling. A cell whose cross-validation fails is reported in the
/// aggregates and the sweep continues.
SweepResult run_sweep(const ExperimentConfig& config);

extern const char* const kTrialCsvHeader;
extern const char* const kAggregateCsvHeader;

void write_trial_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_aggregate_csv(std::ostream& out, const std::vector<CellAggregate>& aggregates);

/// Writes trials.csv; IoError names the path on failure.
void emit_csv(const std::vector<TrialRecord>& records, const std::string& path);
void emit_aggregate_csv(const std::vector<CellAggregate>& aggregates, const std::string& path);

}  // namespace pooledcs
