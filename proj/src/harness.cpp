#include "pooledcs/harness.hpp"

#include "pooledcs/error.hpp"
#include "pooledcs/format.hpp"
#include "pooledcs/metrics.hpp"
#include "pooledcs/pipeline.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace pooledcs {

const char* const kTrialCsvHeader =
    "trial_index,n,p,q,f_s,sigma,q_a,estimator,gamma,rrmse,sensitivity,specificity,lambda_hat,"
    "l1_norm_true,c1_violated,pooling_warnings,solver_iterations,converged,noise_model";

const char* const kAggregateCsvHeader =
    "n,p,q,f_s,sigma,q_a,estimator,gamma,trials,valid_trials,rrmse_mean,rrmse_sd,"
    "sensitivity_mean,sensitivity_sd,specificity_mean,specificity_sd,lambda_hat_mean,"
    "lambda_hat_sd,l1_norm_true_mean,l1_norm_true_sd,c1_violation_rate,converged_rate,"
    "noise_model,status";

namespace {

using detail::parallel_for;
using detail::worker_count;

struct Prepared {
    TrialInstance instance;
    SurrogateSystem system;
    Vector gradient;
    std::map<Estimator, WeightSet> weights;
    std::map<Estimator, std::string> skipped;
};

Prepared prepare(const ExperimentConfig& config, const Cell& cell, RngStream stream) {
    TrialInstance instance = generate_instance(config, cell, std::move(stream));
    SurrogateSystem system = make_surrogate(instance.a, instance.y);
    Vector gradient = gradient_at_truth(system.a_tilde, system.y_tilde, instance.truth.x_star);
    Prepared out{std::move(instance), std::move(system), std::move(gradient), {}, {}};
    if (config.estimators.empty()) {
        return out;
    }

    const WeightParams params = weight_params(config, cell);
    const RMatrices rm = r_matrices(out.instance.a);
    for (Estimator e : config.estimators) {
        try {
            out.weights.emplace(e, e == Estimator::lasso
                                       ? beta_lasso(out.instance.a, out.instance.y, params, rm)
                                       : beta_wlasso(out.instance.a, out.instance.y, params, rm));
        } catch (const AssumptionError& err) {
            out.skipped.emplace(e, err.what());
        }
    }
    return out;
}

std::optional<double> rrmse_or_na(const Vector& x_star, const Vector& x_hat) {
    try {
        return rrmse(x_star, x_hat);
    } catch (const MetricError&) {
        return std::nullopt;
    }
}

TrialRecord base_record(const ExperimentConfig& config, const Cell& cell,
                        std::uint64_t trial_index, Estimator e, double gamma,
                        const Prepared& prep) {
    TrialRecord r;
    r.trial_index = trial_index;
    r.n = cell.n;
    r.p = config.p;
    r.q = cell.q;
    r.f_s = cell.f_s;
    r.sigma = cell.sigma;
    r.q_a = config.q_a;
    r.estimator = e;
    r.gamma = gamma;
    r.l1_norm_true = prep.instance.truth.x_star.lpNorm<1>();
    r.pooling_warnings = prep.instance.diagnostics.warning_count();
    r.noise_model = config.noise_model;
    return r;
}

TrialRecord evaluate(const ExperimentConfig& config, const Cell& cell, std::uint64_t trial_index,
                     Estimator e, double gamma, const Prepared& prep) {
    TrialRecord r = base_record(config, cell, trial_index, e, gamma, prep);
    const auto skip = prep.skipped.find(e);
    if (skip != prep.skipped.end()) {
        r.skip_reason = skip->second;
        return r;
    }
    const WeightSet& w = prep.weights.at(e);
    const Vector beta = w.per_coordinate(config.p);
    const SolverResult result =
        solve_normalized(prep.system.a_tilde, prep.system.y_tilde, beta, gamma, config.solver);

    const Vector& x_star = prep.instance.truth.x_star;
    r.rrmse = rrmse_or_na(x_star, result.x_hat);
    const Confusion c = confusion(classify(x_star, config.threshold),
                                  classify(result.x_hat, config.threshold));
    r.sensitivity = sensitivity(c);
    r.specificity = specificity(c);
    r.lambda_hat = w.lambda_hat;
    r.c1_violated = (prep.gradient.array().abs() > beta.array()).any();
    r.solver_iterations = result.iterations;
    r.converged = result.converged;
    return r;
}

std::string format_opt(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
}

std::string format_flag(const std::optional<bool>& v) {
    return v ? std::string(*v ? "1" : "0") : std::string("NA");
}

}  // namespace

SolverResult solve_normalized(const Matrix& a_tilde, const Vector& y_tilde, const Vector& beta,
                              double gamma, const SolverConfig& config, const Vector* x0,
                              double lipschitz) {
    double scale = 1.0;
    if (y_tilde.size() > 0) {
        const double m = y_tilde.cwiseAbs().maxCoeff();
        if (m > 0.0 && std::isfinite(m)) {
            int e = 0;
            std::frexp(m, &e);
            scale = std::ldexp(1.0, e - 1);
        }
    }
    const Vector y = y_tilde / scale;
    const Vector w = beta / scale;
    const LassoProblem problem{a_tilde, y, w, gamma, lipschitz};
    std::optional<Vector> start;
    if (x0) {
        start = *x0 / scale;
    }
    SolverResult result = solve(problem, config, start ? &*start : nullptr);
    result.x_hat *= scale;
    result.final_objective *= scale * scale;
    result.kkt_residual *= scale;
    for (double& v : result.objective_trace) {
        v *= scale * scale;
    }
    return result;
}

std::vector<TrialRecord> run_trial(const ExperimentConfig& config, const Cell& cell,
                                   std::uint64_t trial_index, const GammaChoice& gammas) {
    std::vector<TrialRecord> out;
    bool any = false;
    for (Estimator e : config.estimators) {
        any = any || gammas.count(e) > 0;
    }
    if (!any) {
        return out;
    }
    const Prepared prep =
        prepare(config, cell, trial_stream(config, cell, StreamPurpose::trial, trial_index));
    for (Estimator e : config.estimators) {
        const auto g = gammas.find(e);
        if (g != gammas.end()) {
            out.push_back(evaluate(config, cell, trial_index, e, g->second, prep));
        }
    }
    return out;
}

GammaChoice cross_validate_gamma(const ExperimentConfig& config, const Cell& cell) {
    if (config.cv_runs < 1) {
        throw ConfigError("cv_runs must be at least 1");
    }
    GammaChoice choice;
    if (config.estimators.empty()) {
        return choice;
    }

    std::vector<Prepared> runs;
    for (int r = 0; r < config.cv_runs; ++r) {
        runs.push_back(prepare(
            config, cell,
            trial_stream(config, cell, StreamPurpose::cross_validation,
                         static_cast<std::uint64_t>(r))));
    }

    std::string failures;
    for (Estimator e : config.estimators) {
        std::vector<const Prepared*> usable;
        for (const auto& run : runs) {
            if (run.weights.count(e) > 0) {
                usable.push_back(&run);
            }
        }
        if (usable.empty()) {
            failures += std::string(to_string(e)) + ": all preliminary trials skipped (" +
                        runs.front().skipped.at(e) + "); ";
            continue;
        }
        if (config.gamma_grid.size() == 1) {
            choice[e] = config.gamma_grid.front();
            continue;
        }

        // Each run walks the grid from the largest γ down, warm-starting every
        // solve from the previous solution.
        const std::size_t grid = config.gamma_grid.size();
        std::vector<std::size_t> order(grid);
        for (std::size_t i = 0; i < grid; ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
            return config.gamma_grid[l] > config.gamma_grid[r];
        });
        std::vector<double> total(grid, 0.0);
        std::vector<std::size_t> count(grid, 0);
        for (const Prepared* run : usable) {
            const Vector beta = run->weights.at(e).per_coordinate(config.p);
            const double lipschitz =
                config.solver.algorithm == Algorithm::fista
                    ? 2.0 * spectral_norm_sq(run->system.a_tilde, 1e-10, 100000)
                    : 0.0;
            std::optional<Vector> previous;
            for (std::size_t i : order) {
                SolverResult result = solve_normalized(
                    run->system.a_tilde, run->system.y_tilde, beta, config.gamma_grid[i],
                    config.solver, previous ? &*previous : nullptr, lipschitz);
                if (const auto err = rrmse_or_na(run->instance.truth.x_star, result.x_hat)) {
                    total[i] += *err;
                    ++count[i];
                }
                previous = std::move(result.x_hat);
            }
        }

        double best_gamma = 0.0;
        double best_error = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t i = 0; i < grid; ++i) {
            if (count[i] == 0) {
                continue;
            }
            const double gamma = config.gamma_grid[i];
            const double mean = total[i] / static_cast<double>(count[i]);
            if (!found || mean < best_error || (mean == best_error && gamma < best_gamma)) {
                best_error = mean;
                best_gamma = gamma;
                found = true;
            }
        }
        if (!found) {
            failures += std::string(to_string(e)) + ": RRMSE undefined on every preliminary run; ";
            continue;
        }
        choice[e] = best_gamma;
    }
    if (!failures.empty() && choice.empty()) {
        throw ConfigError("cross-validation failed: " + failures);
    }
    return choice;
}

Summary summarize(const std::vector<std::optional<double>>& values) {
    Summary s;
    double sum = 0.0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++s.count;
        }
    }
    if (s.count == 0) {
        return s;
    }
    const double mean = sum / static_cast<double>(s.count);
    s.mean = mean;
    if (s.count > 1) {
        double ss = 0.0;
        for (const auto& v : values) {
            if (v) {
                ss += (*v - mean) * (*v - mean);
            }
        }
        s.sd = std::sqrt(ss / static_cast<double>(s.count - 1));
    }
    return s;
}

std::vector<CellAggregate> aggregate(const ExperimentConfig& config, const Cell& cell,
                                     const GammaChoice& gammas,
                                     const std::vector<TrialRecord>& records,
                                     const std::map<Estimator, std::string>& failures) {
    std::vector<CellAggregate> out;
    for (Estimator e : config.estimators) {
        CellAggregate agg;
        agg.cell = cell;
        agg.p = config.p;
        agg.q_a = config.q_a;
        agg.estimator = e;
        agg.noise_model = config.noise_model;
        if (const auto g = gammas.find(e); g != gammas.end()) {
            agg.gamma = g->second;
        }
        if (const auto f = failures.find(e); f != failures.end()) {
            agg.status = "failed: " + f->second;
        }

        std::vector<std::optional<double>> rr, sens, spec, lam, l1, c1, conv;
        for (const auto& r : records) {
            if (r.estimator != e) {
                continue;
            }
            ++agg.trials;
            rr.push_back(r.rrmse);
            sens.push_back(r.sensitivity);
            spec.push_back(r.specificity);
            lam.push_back(r.lambda_hat);
            l1.push_back(r.l1_norm_true);
            if (r.c1_violated) {
                c1.push_back(*r.c1_violated ? 1.0 : 0.0);
            }
            if (r.converged) {
                conv.push_back(*r.converged ? 1.0 : 0.0);
            }
        }
        agg.rrmse = summarize(rr);
        agg.sensitivity = summarize(sens);
        agg.specificity = summarize(spec);
        agg.lambda_hat = summarize(lam);
        agg.l1_norm_true = summarize(l1);
        agg.c1_violation_rate = summarize(c1).mean;
        agg.converged_rate = summarize(conv).mean;
        if (agg.status == "ok" && agg.trials > 0 && agg.rrmse.count == 0) {
            agg.status = "skipped: assumptions failed on every trial";
        }
        out.push_back(std::move(agg));
    }
    return out;
}

namespace {

struct CvOutcome {
    GammaChoice gammas;
    std::map<Estimator, std::string> failures;
};

CvOutcome cross_validate_recorded(const ExperimentConfig& config, const Cell& cell) {
    CvOutcome out;
    try {
        out.gammas = cross_validate_gamma(config, cell);
    } catch (const Error& e) {
        for (Estimator est : config.estimators) {
            out.failures[est] = e.what();
        }
        return out;
    }
    for (Estimator est : config.estimators) {
        if (out.gammas.count(est) == 0) {
            out.failures[est] = "cross-validation failed (all preliminary trials skipped)";
        }
    }
    return out;
}

}  // namespace

CellResult run_cell(const ExperimentConfig& config, const Cell& cell) {
    const CvOutcome cv = cross_validate_recorded(config, cell);
    CellResult result{cell, cv.gammas, {}, {}};
    if (!cv.gammas.empty()) {
        std::vector<std::vector<TrialRecord>> per_trial(static_cast<std::size_t>(config.trials));
        parallel_for(per_trial.size(), worker_count(config), [&](std::size_t i) {
            per_trial[i] = run_trial(config, cell, i, cv.gammas);
        });
        for (auto& rows : per_trial) {
            result.records.insert(result.records.end(), rows.begin(), rows.end());
        }
    }
    result.aggregates = aggregate(config, cell, cv.gammas, result.records, cv.failures);
    return result;
}

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    const std::vector<Cell> cells = config.cells();
    const unsigned threads = worker_count(config);

    std::vector<CvOutcome> cv(cells.size());
    parallel_for(cells.size(), threads,
                 [&](std::size_t i) { cv[i] = cross_validate_recorded(config, cells[i]); });

    const auto trials = static_cast<std::size_t>(config.trials);
    std::vector<std::vector<TrialRecord>> rows(cells.size() * trials);
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const std::size_t c = i / trials;
        if (!cv[c].gammas.empty()) {
            rows[i] = run_trial(config, cells[c], i % trials, cv[c].gammas);
        }
    });

    SweepResult out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<TrialRecord> cell_rows;
        for (std::size_t t = 0; t < trials; ++t) {
            auto& r = rows[c * trials + t];
            cell_rows.insert(cell_rows.end(), r.begin(), r.end());
        }
        auto aggs = aggregate(config, cells[c], cv[c].gammas, cell_rows, cv[c].failures);
        out.records.insert(out.records.end(), cell_rows.begin(), cell_rows.end());
        out.aggregates.insert(out.aggregates.end(), aggs.begin(), aggs.end());
    }
    return out;
}

void write_trial_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << kTrialCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.trial_index << ',' << r.n << ',' << r.p << ',' << format_double(r.q) << ','
            << format_double(r.f_s) << ',' << format_double(r.sigma) << ','
            << format_double(r.q_a) << ',' << to_string(r.estimator) << ','
            << format_double(r.gamma) << ',' << format_opt(r.rrmse) << ','
            << format_opt(r.sensitivity) << ',' << format_opt(r.specificity) << ','
            << format_opt(r.lambda_hat) << ',' << format_double(r.l1_norm_true) << ','
            << format_flag(r.c1_violated) << ',' << r.pooling_warnings << ','
            << (r.solver_iterations ? std::to_string(*r.solver_iterations) : "NA") << ','
            << format_flag(r.converged) << ',' << to_string(r.noise_model) << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const std::vector<CellAggregate>& aggregates) {
    out << kAggregateCsvHeader << '\n';
    for (const auto& a : aggregates) {
        out << a.cell.n << ',' << a.p << ',' << format_double(a.cell.q) << ','
            << format_double(a.cell.f_s) << ',' << format_double(a.cell.sigma) << ','
            << format_double(a.q_a) << ',' << to_string(a.estimator) << ','
            << format_opt(a.gamma) << ',' << a.trials << ',' << a.rrmse.count << ','
            << format_opt(a.rrmse.mean) << ',' << format_opt(a.rrmse.sd) << ','
            << format_opt(a.sensitivity.mean) << ',' << format_opt(a.sensitivity.sd) << ','
            << format_opt(a.specificity.mean) << ',' << format_opt(a.specificity.sd) << ','
            << format_opt(a.lambda_hat.mean) << ',' << format_opt(a.lambda_hat.sd) << ','
            << format_opt(a.l1_norm_true.mean) << ',' << format_opt(a.l1_norm_true.sd) << ','
            << format_opt(a.c1_violation_rate) << ',' << format_opt(a.converged_rate) << ','
            << to_string(a.noise_model) << ',';
        // Status text may contain commas or quotes.
        std::string status = a.status;
        std::replace(status.begin(), status.end(), '\n', ' ');
        std::string quoted = "\"";
        for (char ch : status) {
            quoted += ch;
            if (ch == '"') {
                quoted += '"';
            }
        }
        out << quoted << "\"\n";
    }
}

namespace {

template <typename Rows, typename Writer>
void write_file(const std::string& path, const Rows& rows, Writer writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open \"" + path + "\" for writing");
    }
    writer(out, rows);
    out.flush();
    if (!out) {
        throw IoError("write to \"" + path + "\" failed");
    }
}

}  // namespace

void emit_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    write_file(path, records, [](std::ostream& o, const auto& r) { write_trial_csv(o, r); });
}

void emit_aggregate_csv(const std::vector<CellAggregate>& aggregates, const std::string& path) {
    write_file(path, aggregates,
               [](std::ostream& o, const auto& a) { write_aggregate_csv(o, a); });
}

}  // namespace pooledcs
