#include "pooledcs/pooledcs.h"

#include "pooledcs/config.hpp"
#include "pooledcs/error.hpp"
#include "pooledcs/format.hpp"
#include "pooledcs/harness.hpp"
#include "pooledcs/pipeline.hpp"
#include "pooledcs/validate.hpp"
#include "pooledcs/weights.hpp"

#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

struct pcs_config {
    pooledcs::ExperimentConfig value;
};

struct pcs_text {
    std::string value;
};

namespace {

thread_local std::string last_error;

pcs_status fail(pcs_status status, const std::string& message) {
    last_error = message;
    return status;
}

// Runs fn, translating library exceptions into status codes.
template <typename Fn>
pcs_status guarded(Fn&& fn) {
    last_error.clear();
    try {
        fn();
        return PCS_OK;
    } catch (const pooledcs::ConfigError& e) {
        return fail(PCS_CONFIG_ERROR, e.what());
    } catch (const pooledcs::IoError& e) {
        return fail(PCS_IO_ERROR, e.what());
    } catch (const pooledcs::AssumptionError& e) {
        return fail(PCS_ASSUMPTION_ERROR, e.what());
    } catch (const pooledcs::ParameterError& e) {
        return fail(PCS_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PCS_RUNTIME_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return fail(PCS_RUNTIME_ERROR, e.what());
    } catch (...) {
        return fail(PCS_RUNTIME_ERROR, "unknown error");
    }
}

pcs_text* make_text(std::string s) {
    return new pcs_text{std::move(s)};
}

pooledcs::PoolingMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw pooledcs::IoError("cannot open matrix file \"" + path + "\"");
    }
    try {
        return pooledcs::read_pooling_matrix(in);
    } catch (const pooledcs::IoError& e) {
        throw pooledcs::IoError(path + ": " + e.what());
    }
}

pooledcs::Vector read_vector_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw pooledcs::IoError("cannot open measurement file \"" + path + "\"");
    }
    try {
        return pooledcs::read_vector(in);
    } catch (const pooledcs::IoError& e) {
        throw pooledcs::IoError(path + ": " + e.what());
    }
}

std::string sweep_summary(const pooledcs::ExperimentConfig& config,
                          const pooledcs::SweepResult& result) {
    using pooledcs::format_double;
    std::ostringstream out;
    out << "cells=" << config.cells().size() << " rows=" << result.records.size() << '\n';
    for (const auto& a : result.aggregates) {
        out << "n=" << a.cell.n << " q=" << format_double(a.cell.q)
            << " f_s=" << format_double(a.cell.f_s) << " sigma=" << format_double(a.cell.sigma)
            << ' ' << pooledcs::to_string(a.estimator)
            << " gamma=" << (a.gamma ? format_double(*a.gamma) : "NA")
            << " rrmse=" << (a.rrmse.mean ? format_double(*a.rrmse.mean) : "NA")
            << " valid=" << a.rrmse.count << '/' << a.trials << ' ' << a.status << '\n';
    }
    return out.str();
}

}  // namespace

extern "C" {

const char* pcs_version(void) {
    return "1.0.0";
}

const char* pcs_last_error(void) {
    return last_error.c_str();
}

const char* pcs_text_data(const pcs_text* text) {
    return text ? text->value.c_str() : "";
}

size_t pcs_text_size(const pcs_text* text) {
    return text ? text->value.size() : 0;
}

void pcs_text_free(pcs_text* text) {
    delete text;
}

pcs_status pcs_config_load(const char* path, pcs_config** out) {
    if (!path || !out) {
        return fail(PCS_INVALID_ARGUMENT, "pcs_config_load: null argument");
    }
    return guarded([&] { *out = new pcs_config{pooledcs::load_config(path)}; });
}

pcs_status pcs_config_preset(const char* name, pcs_config** out) {
    if (!name || !out) {
        return fail(PCS_INVALID_ARGUMENT, "pcs_config_preset: null argument");
    }
    return guarded([&] { *out = new pcs_config{pooledcs::ExperimentConfig::preset(name)}; });
}

pcs_status pcs_config_set_threads(pcs_config* config, unsigned threads) {
    if (!config) {
        return fail(PCS_INVALID_ARGUMENT, "pcs_config_set_threads: null config");
    }
    config->value.threads = threads;
    return PCS_OK;
}

pcs_status pcs_config_to_json(const pcs_config* config, pcs_text** out) {
    if (!config || !out) {
        return fail(PCS_INVALID_ARGUMENT, "pcs_config_to_json: null argument");
    }
    return guarded([&] { *out = make_text(pooledcs::config_to_json(config->value)); });
}

void pcs_config_free(pcs_config* config) {
    delete config;
}

pcs_status pcs_run_sweep(const pcs_config* config, const char* out_dir, pcs_text** summary) {
    if (!config || !out_dir) {
        return fail(PCS_INVALID_ARGUMENT, "pcs_run_sweep: null argument");
    }
    return guarded([&] {
        const std::filesystem::path dir(out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            throw pooledcs::IoError("cannot create output directory \"" + dir.string() +
                                    "\": " + ec.message());
        }
        const auto result = pooledcs::run_sweep(config->value);
        pooledcs::emit_csv(result.records, (dir / "trials.csv").string());
        pooledcs::emit_aggregate_csv(result.aggregates, (dir / "aggregate.csv").string());
        if (summary) {
            *summary = make_text(sweep_summary(config->value, result));
        }
    });
}

pcs_status pcs_run_trial(const pcs_config* config, const char* cell, uint64_t index,
                         pcs_text** csv) {
    if (!config || !cell || !csv) {
        return fail(PCS_INVALID_ARGUMENT, "pcs_run_trial: null argument");
    }
    return guarded([&] {
        const auto& cfg = config->value;
        const pooledcs::Cell c = pooledcs::parse_cell(cell, cfg);
        const auto gammas = pooledcs::cross_validate_gamma(cfg, c);
        const auto records = pooledcs::run_trial(cfg, c, index, gammas);
        std::ostringstream out;
        pooledcs::write_trial_csv(out, records);
        *csv = make_text(out.str());
    });
}

pcs_status pcs_weights_from_files(const pcs_config* config, const char* matrix_path,
                                  const char* measurements_path, pcs_text** report) {
    if (!matrix_path || !measurements_path || !report) {
        return fail(PCS_INVALID_ARGUMENT, "pcs_weights_from_files: null argument");
    }
    return guarded([&] {
        using pooledcs::format_double;
        const pooledcs::ExperimentConfig cfg = config ? config->value : pooledcs::ExperimentConfig{};
        const auto a = read_matrix_file(matrix_path);
        const auto y = read_vector_file(measurements_path);
        if (y.size() != a.pools()) {
            throw pooledcs::IoError("measurement count " + std::to_string(y.size()) +
                                    " does not match the matrix's " +
                                    std::to_string(a.pools()) + " pools");
        }
        auto params = pooledcs::WeightParams::standard(a.pools(), a.samples(), a.q(),
                                                       pooledcs::NoiseParams{cfg.sigma, cfg.q_a});
        params.c_const = cfg.c_const;
        params.force = cfg.force_assumptions;
        const auto rm = pooledcs::r_matrices(a);
        const auto lasso = pooledcs::beta_lasso(a, y, params, rm);
        const auto wlasso = pooledcs::beta_wlasso(a, y, params, rm);

        std::ostringstream out;
        out << "# theta=" << format_double(lasso.theta) << '\n'
            << "# c=" << format_double(lasso.c_const) << '\n'
            << "# kappa=" << format_double(lasso.kappa) << '\n'
            << "# lambda_hat=" << format_double(lasso.lambda_hat) << '\n'
            << "# W=" << format_double(lasso.w) << '\n'
            << "# beta=" << format_double(lasso.beta) << '\n';
        std::istringstream checks(lasso.report.describe());
        for (std::string line; std::getline(checks, line);) {
            out << "# " << line << '\n';
        }
        out << "# beta_k (one per sample)\n";
        pooledcs::write_vector(out, wlasso.beta_k);
        *report = make_text(out.str());
    });
}

pcs_status pcs_validate(const pcs_config* config, const char* which, pcs_text** report,
                        int* passed) {
    if (!config || !which || !report || !passed) {
        return fail(PCS_INVALID_ARGUMENT, "pcs_validate: null argument");
    }
    const std::string kind(which);
    return guarded([&] {
        using namespace pooledcs;
        const ExperimentConfig& cfg = config->value;
        const ValidationSettings& v = cfg.validation;
        const Cell cell = cfg.cells().front();
        const Cell origin{0, 0.0, 0.0, 0.0};
        std::string text;
        bool ok = false;
        if (kind == "c1") {
            const auto r = validate_c1(cfg, cell, v.c1_trials);
            text = r.describe();
            ok = r.passed();
        } else if (kind == "lambda") {
            const auto r = validate_lambda_hat(cfg, cell, v.lambda_trials);
            text = r.describe();
            ok = r.passed();
        } else if (kind == "bernstein") {
            const auto r = validate_bernstein(
                v.bernstein_n, v.bernstein_q, v.theta, v.bernstein_trials,
                trial_stream(cfg, origin, StreamPurpose::bernstein, 0));
            text = r.describe();
            ok = r.passed();
        } else if (kind == "gaussian") {
            GaussianSettings s;
            s.n = v.gaussian_n;
            s.p = v.gaussian_p;
            s.q = cfg.q_list.front();
            s.f_s = v.gaussian_f_s;
            s.noise = NoiseParams{cfg.sigmas().front(), cfg.q_a};
            s.theta = v.theta;
            s.trials = v.gaussian_trials;
            const auto r = validate_gaussian_concentration(
                s, trial_stream(cfg, origin, StreamPurpose::gaussian, 0));
            text = r.describe();
            ok = r.passed();
        } else if (kind == "trends") {
            const auto r = validate_trends(cfg);
            text = r.describe();
            ok = r.passed();
        } else if (kind == "auxiliary") {
            const auto r = validate_auxiliary_inequality(
                10'000, trial_stream(cfg, origin, StreamPurpose::auxiliary, 0));
            text = r.describe();
            ok = r.passed();
        } else if (kind == "surrogate") {
            const auto r = validate_surrogate_identities(
                40, 50, 0.3, 10'000,
                trial_stream(cfg, origin, StreamPurpose::surrogate, 0));
            text = r.describe();
            ok = r.passed();
        } else {
            throw ParameterError("unknown validation \"" + kind + "\"");
        }
        *report = make_text(text + '\n');
        *passed = ok ? 1 : 0;
    });
}

}  // extern "C"
