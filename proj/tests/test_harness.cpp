#include "pooledcs/error.hpp"
#include "pooledcs/harness.hpp"
#include "pooledcs/metrics.hpp"
#include "pooledcs/pipeline.hpp"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pcs = pooledcs;
using ::testing::HasSubstr;

namespace {

pcs::ExperimentConfig small_config() {
    pcs::ExperimentConfig c;
    c.p = 100;
    c.n_list = {80};
    c.f_s_list = {0.05};
    c.q_list = {0.5};
    c.trials = 3;
    c.cv_runs = 2;
    c.gamma_grid = {0.003, 0.03, 0.3};
    c.threads = 1;
    return c;
}

std::string trial_csv(const std::vector<pcs::TrialRecord>& rows) {
    std::ostringstream out;
    pcs::write_trial_csv(out, rows);
    return out.str();
}

std::string aggregate_csv(const std::vector<pcs::CellAggregate>& rows) {
    std::ostringstream out;
    pcs::write_aggregate_csv(out, rows);
    return out.str();
}

}  // namespace

TEST(Config, Defaults) {
    const pcs::ExperimentConfig c;
    EXPECT_EQ(c.p, 1000);
    EXPECT_EQ(c.n_list, (std::vector<pcs::Index>{150, 200, 300, 375, 500}));
    EXPECT_EQ(c.f_s_list, (std::vector<double>{0.02, 0.04, 0.08, 0.15}));
    EXPECT_EQ(c.q_list, (std::vector<double>{0.05, 0.1, 0.25, 0.5, 0.75}));
    EXPECT_EQ(c.sigma, 0.05);
    EXPECT_EQ(c.q_a, 0.95);
    EXPECT_EQ(c.trials, 200);
    EXPECT_EQ(c.cv_runs, 5);
    EXPECT_EQ(c.threshold, 0.2);
    EXPECT_EQ(c.c_const, 126.0);
    EXPECT_EQ(c.estimators.size(), 2u);
    EXPECT_EQ(c.gamma_grid.size(), 24u);
    EXPECT_NEAR(c.gamma_grid.front(), 1e-5, 1e-18);
    EXPECT_NEAR(c.gamma_grid.back(), 64.0, 1e-12);
    for (std::size_t i = 1; i < c.gamma_grid.size(); ++i) {
        EXPECT_NEAR(c.gamma_grid[i] / c.gamma_grid[i - 1], c.gamma_grid[1] / c.gamma_grid[0],
                    1e-12);
    }
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.cells().size(), 5u * 4u * 5u);
}

TEST(Config, CellOrder) {
    pcs::ExperimentConfig c = small_config();
    c.n_list = {80, 90};
    c.f_s_list = {0.02, 0.04};
    c.q_list = {0.3, 0.5};
    c.sigma_list = {0.0, 0.05};
    const auto cells = c.cells();
    ASSERT_EQ(cells.size(), 16u);
    EXPECT_EQ(cells[0].sigma, 0.0);
    EXPECT_EQ(cells[0].q, 0.3);
    EXPECT_EQ(cells[0].n, 80);
    EXPECT_EQ(cells[0].f_s, 0.02);
    EXPECT_EQ(cells[1].f_s, 0.04);
    EXPECT_EQ(cells[2].n, 90);
    EXPECT_EQ(cells[4].q, 0.5);
    EXPECT_EQ(cells[8].sigma, 0.05);
}

TEST(Config, Presets) {
    const auto desk = pcs::ExperimentConfig::preset("desk");
    EXPECT_EQ(desk.p, 400);
    EXPECT_EQ(desk.trials, 30);
    EXPECT_EQ(pcs::ExperimentConfig::preset("paper").p, 1000);
    EXPECT_THROW(pcs::ExperimentConfig::preset("huge"), pcs::ConfigError);
}

TEST(Config, JsonOverridesAndNesting) {
    const auto c = pcs::config_from_json(
        R"({"preset": "desk", "trials": 7, "q_list": [0.25], "estimators": ["wlasso"],
            "solver": {"algorithm": "cd", "tol_kkt": 1e-7}, "validation": {"theta": 3.5},
            "noise_model": "linearized"})");
    EXPECT_EQ(c.p, 400);
    EXPECT_EQ(c.trials, 7);
    EXPECT_EQ(c.q_list, std::vector<double>{0.25});
    ASSERT_EQ(c.estimators.size(), 1u);
    EXPECT_EQ(c.estimators[0], pcs::Estimator::wlasso);
    EXPECT_EQ(c.solver.algorithm, pcs::Algorithm::coordinate_descent);
    EXPECT_EQ(c.solver.tol_kkt, 1e-7);
    EXPECT_EQ(c.validation.theta, 3.5);
    EXPECT_EQ(c.noise_model, pcs::NoiseModel::linearized);
}

TEST(Config, JsonRejectsBadInput) {
    EXPECT_THROW(pcs::config_from_json(R"({"trails": 3})"), pcs::ConfigError);
    EXPECT_THROW(pcs::config_from_json(R"({"solver": {"speed": 1}})"), pcs::ConfigError);
    EXPECT_THROW(pcs::config_from_json(R"({"trials": "many"})"), pcs::ConfigError);
    EXPECT_THROW(pcs::config_from_json(R"([1, 2])"), pcs::ConfigError);
    EXPECT_THROW(pcs::config_from_json("{"), pcs::ConfigError);
    EXPECT_THROW(pcs::config_from_json(R"({"gamma_grid": [0.1, 0]})"), pcs::ConfigError);
    EXPECT_THROW(pcs::config_from_json(R"({"q_list": [1.0]})"), pcs::ConfigError);
    EXPECT_THROW(pcs::config_from_json(R"({"estimators": ["ridge"]})"), pcs::ConfigError);
    try {
        pcs::config_from_json(R"({"trails": 3})");
    } catch (const pcs::ConfigError& e) {
        EXPECT_THAT(e.what(), HasSubstr("trails"));
    }
}

TEST(Config, JsonRoundTrip) {
    pcs::ExperimentConfig c = small_config();
    c.sigma_list = {0.0, 0.1};
    c.seed = 99;
    c.force_assumptions = true;
    c.solver.nonnegative = true;
    const std::string text = pcs::config_to_json(c);
    EXPECT_EQ(pcs::config_to_json(pcs::config_from_json(text)), text);
}

TEST(Config, LoadConfigNamesMissingFile) {
    try {
        pcs::load_config("/nonexistent/where.json");
        FAIL() << "expected ConfigError";
    } catch (const pcs::ConfigError& e) {
        EXPECT_THAT(e.what(), HasSubstr("/nonexistent/where.json"));
    }
    const auto path = std::filesystem::temp_directory_path() / "pooledcs_bad_config.json";
    {
        std::ofstream out(path);
        out << R"({"p": 1})";
    }
    try {
        pcs::load_config(path.string());
        FAIL() << "expected ConfigError";
    } catch (const pcs::ConfigError& e) {
        EXPECT_THAT(e.what(), HasSubstr(path.string()));
    }
    std::filesystem::remove(path);
}

TEST(Config, ParseCell) {
    const auto c = small_config();
    const auto cell = pcs::parse_cell("n=120,q=0.25,fs=0.04,sigma=0.1", c);
    EXPECT_EQ(cell.n, 120);
    EXPECT_EQ(cell.q, 0.25);
    EXPECT_EQ(cell.f_s, 0.04);
    EXPECT_EQ(cell.sigma, 0.1);
    const auto fallback = pcs::parse_cell("n=90", c);
    EXPECT_EQ(fallback.q, 0.5);
    EXPECT_EQ(fallback.f_s, 0.05);
    EXPECT_EQ(fallback.sigma, 0.05);
    EXPECT_THROW(pcs::parse_cell("n=90,colour=3", c), pcs::ConfigError);
    EXPECT_THROW(pcs::parse_cell("n=abc", c), pcs::ConfigError);
    EXPECT_THROW(pcs::parse_cell("n", c), pcs::ConfigError);
}

TEST(EstimatorNames, RoundTrip) {
    EXPECT_EQ(pcs::to_string(pcs::Estimator::lasso), "lasso");
    EXPECT_EQ(pcs::to_string(pcs::Estimator::wlasso), "wlasso");
    EXPECT_EQ(pcs::estimator_from_string("wlasso"), pcs::Estimator::wlasso);
    EXPECT_THROW(pcs::estimator_from_string("ols"), pcs::ParameterError);
}

TEST(Csv, Headers) {
    EXPECT_STREQ(pcs::kTrialCsvHeader,
                 "trial_index,n,p,q,f_s,sigma,q_a,estimator,gamma,rrmse,sensitivity,specificity,"
                 "lambda_hat,l1_norm_true,c1_violated,pooling_warnings,solver_iterations,"
                 "converged,noise_model");
    EXPECT_EQ(trial_csv({}), std::string(pcs::kTrialCsvHeader) + "\n");
}

TEST(Csv, MissingValuesAreNa) {
    pcs::TrialRecord r;
    r.trial_index = 4;
    r.n = 80;
    r.p = 100;
    r.q = 0.5;
    r.f_s = 0.05;
    r.sigma = 0.05;
    r.q_a = 0.95;
    r.estimator = pcs::Estimator::wlasso;
    r.gamma = 0.1;
    r.l1_norm_true = 12.5;
    r.pooling_warnings = 2;
    const std::string csv = trial_csv({r});
    EXPECT_THAT(csv, HasSubstr(
                         "\n4,80,100,0.5,0.05,0.05,0.95,wlasso,0.1,NA,NA,NA,NA,12.5,NA,2,NA,NA,exact\n"));
    r.c1_violated = true;
    r.converged = false;
    r.solver_iterations = 17;
    r.rrmse = 0.25;
    EXPECT_THAT(trial_csv({r}), HasSubstr(",wlasso,0.1,0.25,NA,NA,NA,12.5,1,2,17,0,exact\n"));
}

TEST(Csv, AggregateStatusIsQuoted) {
    pcs::CellAggregate a;
    a.cell = pcs::Cell{80, 0.05, 0.5, 0.05};
    a.p = 100;
    a.q_a = 0.95;
    a.status = "failed: x, \"y\"";
    const std::string csv = aggregate_csv({a});
    EXPECT_THAT(csv, HasSubstr(",exact,\"failed: x, \"\"y\"\"\"\n"));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), pcs::kAggregateCsvHeader);
}

TEST(Csv, EmitNamesBadPath) {
    try {
        pcs::emit_csv({}, "/nonexistent/dir/trials.csv");
        FAIL() << "expected IoError";
    } catch (const pcs::IoError& e) {
        EXPECT_THAT(e.what(), HasSubstr("/nonexistent/dir/trials.csv"));
    }
}

TEST(Summarize, HandValues) {
    const auto empty = pcs::summarize({std::nullopt});
    EXPECT_EQ(empty.count, 0u);
    EXPECT_FALSE(empty.mean.has_value());
    const auto one = pcs::summarize({2.0, std::nullopt});
    EXPECT_EQ(*one.mean, 2.0);
    EXPECT_FALSE(one.sd.has_value());
    const auto s = pcs::summarize({1.0, 2.0, std::nullopt, 6.0});
    EXPECT_EQ(s.count, 3u);
    EXPECT_EQ(*s.mean, 3.0);
    EXPECT_NEAR(*s.sd, std::sqrt(7.0), 1e-15);
}

TEST(Aggregate, HandAverage) {
    const auto config = small_config();
    const pcs::Cell cell = config.cells().front();
    std::vector<pcs::TrialRecord> rows(3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].trial_index = i;
        rows[i].estimator = pcs::Estimator::lasso;
        rows[i].l1_norm_true = 10.0 * static_cast<double>(i + 1);
        rows[i].converged = true;
    }
    rows[0].rrmse = 0.1;
    rows[1].rrmse = 0.3;
    rows[0].c1_violated = true;
    rows[1].c1_violated = false;
    rows[2].skip_reason = "A1";
    const auto aggs = pcs::aggregate(config, cell, {{pcs::Estimator::lasso, 0.03}}, rows);
    ASSERT_EQ(aggs.size(), 2u);
    const auto& a = aggs[0];
    EXPECT_EQ(a.estimator, pcs::Estimator::lasso);
    EXPECT_EQ(a.trials, 3u);
    EXPECT_EQ(a.rrmse.count, 2u);
    EXPECT_NEAR(*a.rrmse.mean, 0.2, 1e-15);
    EXPECT_NEAR(*a.rrmse.sd, std::sqrt(0.02), 1e-15);
    EXPECT_EQ(*a.l1_norm_true.mean, 20.0);
    EXPECT_EQ(*a.c1_violation_rate, 0.5);
    EXPECT_EQ(*a.converged_rate, 1.0);
    EXPECT_EQ(*a.gamma, 0.03);
    EXPECT_EQ(a.status, "ok");
    EXPECT_EQ(aggs[1].trials, 0u);
    EXPECT_FALSE(aggs[1].gamma.has_value());
}

TEST(SolveNormalized, PowerOfTwoScalingIsExact) {
    pcs::RngStream s(5);
    pcs::Matrix a(20, 30);
    pcs::Vector y(20), beta(30);
    for (pcs::Index i = 0; i < 20; ++i) {
        y[i] = s.standard_normal();
        for (pcs::Index j = 0; j < 30; ++j) {
            a(i, j) = s.standard_normal();
        }
    }
    for (pcs::Index j = 0; j < 30; ++j) {
        beta[j] = s.uniform(0.5, 1.5);
    }
    const auto config = pcs::ExperimentConfig::default_solver();
    const auto r1 = pcs::solve_normalized(a, y, beta, 0.2, config);
    const pcs::Vector y8 = 8.0 * y;
    const pcs::Vector b8 = 8.0 * beta;
    const auto r8 = pcs::solve_normalized(a, y8, b8, 0.2, config);
    for (pcs::Index j = 0; j < 30; ++j) {
        EXPECT_EQ(r8.x_hat[j], 8.0 * r1.x_hat[j]);
    }
    EXPECT_EQ(r8.iterations, r1.iterations);
}

TEST(RunTrial, DeterministicAndIndexed) {
    const auto config = small_config();
    const pcs::Cell cell = config.cells().front();
    const pcs::GammaChoice g{{pcs::Estimator::lasso, 0.03}, {pcs::Estimator::wlasso, 0.03}};
    const auto a = pcs::run_trial(config, cell, 5, g);
    const auto b = pcs::run_trial(config, cell, 5, g);
    const auto c = pcs::run_trial(config, cell, 6, g);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(trial_csv(a), trial_csv(b));
    EXPECT_NE(trial_csv(a), trial_csv(c));
    EXPECT_EQ(a[0].estimator, pcs::Estimator::lasso);
    EXPECT_EQ(a[1].estimator, pcs::Estimator::wlasso);
    EXPECT_EQ(a[0].l1_norm_true, a[1].l1_norm_true);
    EXPECT_EQ(*a[0].lambda_hat, *a[1].lambda_hat);
    EXPECT_TRUE(*a[0].converged);
    EXPECT_EQ(a[0].trial_index, 5u);

    const auto only = pcs::run_trial(config, cell, 5, {{pcs::Estimator::wlasso, 0.03}});
    ASSERT_EQ(only.size(), 1u);
    EXPECT_EQ(trial_csv(only), trial_csv({a[1]}));
    EXPECT_TRUE(pcs::run_trial(config, cell, 5, {}).empty());
}

// Without noise the only error left is the surrogate's recentering, so
// recovery is close and every positive is found.
TEST(RunTrial, NoiselessRecoveryIsAccurate) {
    auto config = small_config();
    config.sigma = 0.0;
    const pcs::Cell cell = config.cells().front();
    const auto rows = pcs::run_trial(config, cell, 0,
                                     {{pcs::Estimator::lasso, 1e-4}, {pcs::Estimator::wlasso, 1e-4}});
    for (const auto& r : rows) {
        ASSERT_TRUE(r.rrmse.has_value());
        EXPECT_LE(*r.rrmse, 0.1) << pcs::to_string(r.estimator);
        EXPECT_EQ(*r.sensitivity, 1.0);
    }
}

TEST(RunTrial, AssumptionFailureGivesNaRow) {
    auto config = small_config();
    config.q_list = {0.1};
    const pcs::Cell cell = config.cells().front();
    const auto rows = pcs::run_trial(config, cell, 0, {{pcs::Estimator::lasso, 0.03}});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].skipped());
    EXPECT_FALSE(rows[0].rrmse.has_value());
    EXPECT_GT(rows[0].l1_norm_true, 0.0);
}

TEST(CrossValidation, PicksFromGrid) {
    auto config = small_config();
    const pcs::Cell cell = config.cells().front();
    const auto g = pcs::cross_validate_gamma(config, cell);
    ASSERT_EQ(g.size(), 2u);
    for (const auto& [e, gamma] : g) {
        EXPECT_NE(std::find(config.gamma_grid.begin(), config.gamma_grid.end(), gamma),
                  config.gamma_grid.end());
    }
    EXPECT_EQ(pcs::cross_validate_gamma(config, cell), g);

    config.gamma_grid = {0.7};
    const auto single = pcs::cross_validate_gamma(config, cell);
    EXPECT_EQ(single.at(pcs::Estimator::lasso), 0.7);
    EXPECT_EQ(single.at(pcs::Estimator::wlasso), 0.7);
}

// The chosen γ must minimize the mean preliminary RRMSE, recomputed here with
// cold-started coordinate descent.
TEST(CrossValidation, MatchesDirectMinimization) {
    auto config = small_config();
    config.estimators = {pcs::Estimator::wlasso};
    config.gamma_grid = {0.001, 0.01, 0.1, 1.0};
    const pcs::Cell cell = config.cells().front();
    const double chosen = pcs::cross_validate_gamma(config, cell).at(pcs::Estimator::wlasso);

    std::vector<double> mean(config.gamma_grid.size(), 0.0);
    const pcs::WeightParams params = pcs::weight_params(config, cell);
    for (int r = 0; r < config.cv_runs; ++r) {
        const auto inst = pcs::generate_instance(
            config, cell,
            pcs::trial_stream(config, cell, pcs::StreamPurpose::cross_validation,
                              static_cast<std::uint64_t>(r)));
        const auto sys = pcs::make_surrogate(inst.a, inst.y);
        const pcs::Vector beta = pcs::beta_wlasso(inst.a, inst.y, params).beta_k;
        for (std::size_t i = 0; i < config.gamma_grid.size(); ++i) {
            const pcs::LassoProblem problem{sys.a_tilde, sys.y_tilde, beta, config.gamma_grid[i]};
            pcs::SolverConfig cd;
            cd.tol_kkt = 1e-10;
            const auto x = pcs::solve(problem, cd).x_hat;
            mean[i] += pcs::rrmse(inst.truth.x_star, x) / config.cv_runs;
        }
    }
    const auto best = std::min_element(mean.begin(), mean.end()) - mean.begin();
    EXPECT_EQ(chosen, config.gamma_grid[static_cast<std::size_t>(best)]);
}

TEST(CrossValidation, AllSkippedThrows) {
    auto config = small_config();
    config.q_list = {0.1};
    EXPECT_THROW(pcs::cross_validate_gamma(config, config.cells().front()), pcs::ConfigError);
}

TEST(RunCell, AggregatesMatchRecords) {
    const auto config = small_config();
    const auto result = pcs::run_cell(config, config.cells().front());
    ASSERT_EQ(result.records.size(), 6u);
    ASSERT_EQ(result.aggregates.size(), 2u);
    double sum = 0.0;
    int count = 0;
    for (const auto& r : result.records) {
        if (r.estimator == pcs::Estimator::lasso && r.rrmse) {
            sum += *r.rrmse;
            ++count;
        }
    }
    EXPECT_NEAR(*result.aggregates[0].rrmse.mean, sum / count, 1e-15);
    EXPECT_EQ(result.aggregates[0].status, "ok");
}

TEST(RunSweep, ScheduleIndependent) {
    auto config = small_config();
    config.n_list = {70, 80};
    config.trials = 2;
    config.threads = 1;
    const auto one = pcs::run_sweep(config);
    config.threads = 3;
    const auto three = pcs::run_sweep(config);
    EXPECT_EQ(trial_csv(one.records), trial_csv(three.records));
    EXPECT_EQ(aggregate_csv(one.aggregates), aggregate_csv(three.aggregates));
    EXPECT_EQ(one.records.size(), 8u);
}

TEST(RunSweep, FailedCellIsReportedAndSweepContinues) {
    auto config = small_config();
    config.q_list = {0.1, 0.5};
    config.trials = 1;
    const auto result = pcs::run_sweep(config);
    ASSERT_EQ(result.aggregates.size(), 4u);
    EXPECT_THAT(result.aggregates[0].status, HasSubstr("failed"));
    EXPECT_EQ(result.aggregates[0].trials, 0u);
    EXPECT_EQ(result.aggregates[2].status, "ok");
    EXPECT_EQ(result.records.size(), 2u);
}
