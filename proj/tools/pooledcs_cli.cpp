#include "pooledcs/pooledcs.h"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

using ConfigPtr = std::unique_ptr<pcs_config, decltype(&pcs_config_free)>;
using TextPtr = std::unique_ptr<pcs_text, decltype(&pcs_text_free)>;

int exit_code(pcs_status status) {
    switch (status) {
    case PCS_OK:
        return kExitOk;
    case PCS_CONFIG_ERROR:
        return kExitConfig;
    case PCS_INVALID_ARGUMENT:
        return kExitUsage;
    default:
        return kExitRuntime;
    }
}

int report_error(pcs_status status) {
    std::cerr << "error: " << pcs_last_error() << '\n';
    return exit_code(status);
}

struct ConfigSource {
    std::string path;
    std::string preset;
    std::optional<unsigned> threads;
};

// Loads the config from --config (or --preset) and applies --threads.
pcs_status open_config(const ConfigSource& src, ConfigPtr& out) {
    pcs_config* raw = nullptr;
    pcs_status st = PCS_OK;
    if (!src.path.empty()) {
        st = pcs_config_load(src.path.c_str(), &raw);
    } else {
        st = pcs_config_preset(src.preset.empty() ? "paper" : src.preset.c_str(), &raw);
    }
    if (st != PCS_OK) {
        return st;
    }
    out.reset(raw);
    return src.threads ? pcs_config_set_threads(raw, *src.threads) : PCS_OK;
}

void add_config_options(CLI::App* cmd, ConfigSource& src) {
    auto* config = cmd->add_option("--config", src.path, "JSON experiment config");
    cmd->add_option("--preset", src.preset, "Base configuration: paper or desk")
        ->check(CLI::IsMember({"paper", "desk"}))
        ->excludes(config);
    cmd->add_option("--threads", src.threads, "Worker threads (0 = all cores); overrides the config");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pooled-testing compressed sensing experiments"};
    app.require_subcommand(1);

    ConfigSource sweep_src;
    std::string out_dir;
    auto* sweep = app.add_subcommand("sweep", "Run every cell and write trials.csv, aggregate.csv");
    add_config_options(sweep, sweep_src);
    sweep->add_option("--out", out_dir, "Output directory")->required();

    ConfigSource trial_src;
    std::string cell;
    std::uint64_t index = 0;
    auto* trial = app.add_subcommand("trial", "Print the CSV rows of one trial");
    add_config_options(trial, trial_src);
    trial->add_option("--cell", cell, "Cell, e.g. n=200,q=0.5,fs=0.04")->required();
    trial->add_option("--index", index, "Trial index")->required();

    ConfigSource weights_src;
    std::string matrix_path;
    std::string y_path;
    auto* weights = app.add_subcommand("weights", "Weights for a stored matrix and measurements");
    add_config_options(weights, weights_src);
    weights->add_option("--matrix", matrix_path, "Pooling matrix file")->required();
    weights->add_option("--measurements", y_path, "Measurement vector file")->required();

    ConfigSource validate_src;
    std::string which;
    auto* validate = app.add_subcommand("validate", "Monte-Carlo check of a bound");
    validate
        ->add_option("check", which, "c1, lambda, bernstein, gaussian, trends, auxiliary, surrogate")
        ->required()
        ->check(CLI::IsMember(
            {"c1", "lambda", "bernstein", "gaussian", "trends", "auxiliary", "surrogate"}));
    add_config_options(validate, validate_src);

    auto* version = app.add_subcommand("version", "Print the library version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (version->parsed()) {
        std::cout << pcs_version() << '\n';
        return kExitOk;
    }

    ConfigPtr config(nullptr, &pcs_config_free);
    pcs_text* raw = nullptr;

    if (sweep->parsed()) {
        if (const auto st = open_config(sweep_src, config); st != PCS_OK) {
            return report_error(st);
        }
        if (const auto st = pcs_run_sweep(config.get(), out_dir.c_str(), &raw); st != PCS_OK) {
            return report_error(st);
        }
        TextPtr text(raw, &pcs_text_free);
        std::cout << pcs_text_data(text.get());
        return kExitOk;
    }

    if (trial->parsed()) {
        if (const auto st = open_config(trial_src, config); st != PCS_OK) {
            return report_error(st);
        }
        if (const auto st = pcs_run_trial(config.get(), cell.c_str(), index, &raw); st != PCS_OK) {
            return report_error(st);
        }
        TextPtr text(raw, &pcs_text_free);
        std::cout << pcs_text_data(text.get());
        return kExitOk;
    }

    if (weights->parsed()) {
        if (const auto st = open_config(weights_src, config); st != PCS_OK) {
            return report_error(st);
        }
        const auto st =
            pcs_weights_from_files(config.get(), matrix_path.c_str(), y_path.c_str(), &raw);
        if (st != PCS_OK) {
            // Assumption failures carry the full check report.
            return report_error(st == PCS_INVALID_ARGUMENT ? PCS_RUNTIME_ERROR : st);
        }
        TextPtr text(raw, &pcs_text_free);
        std::cout << pcs_text_data(text.get());
        return kExitOk;
    }

    if (validate->parsed()) {
        if (const auto st = open_config(validate_src, config); st != PCS_OK) {
            return report_error(st);
        }
        int passed = 0;
        if (const auto st = pcs_validate(config.get(), which.c_str(), &raw, &passed);
            st != PCS_OK) {
            return report_error(st == PCS_INVALID_ARGUMENT ? PCS_RUNTIME_ERROR : st);
        }
        TextPtr text(raw, &pcs_text_free);
        std::cout << pcs_text_data(text.get());
        return passed ? kExitOk : kExitRuntime;
    }
    return kExitUsage;
}
