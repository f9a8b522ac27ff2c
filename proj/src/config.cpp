#include "pooledcs/config.hpp"

#include "pooledcs/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace pooledcs {

namespace {

using nlohmann::json;

template <typename T>
T get_as(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key \"" + key + "\": " + e.what());
    }
}

Index get_count(const json& value, const std::string& key) {
    if (!value.is_number_integer()) {
        throw ConfigError("config key \"" + key + "\": expected an integer");
    }
    return get_as<Index>(value, key);
}

std::vector<Index> get_counts(const json& value, const std::string& key) {
    if (!value.is_array()) {
        throw ConfigError("config key \"" + key + "\": expected an array");
    }
    std::vector<Index> out;
    for (const auto& v : value) {
        out.push_back(get_count(v, key));
    }
    return out;
}

std::vector<double> get_reals(const json& value, const std::string& key) {
    if (!value.is_array()) {
        throw ConfigError("config key \"" + key + "\": expected an array");
    }
    std::vector<double> out;
    for (const auto& v : value) {
        if (!v.is_number()) {
            throw ConfigError("config key \"" + key + "\": expected numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

double get_real(const json& value, const std::string& key) {
    if (!value.is_number()) {
        throw ConfigError("config key \"" + key + "\": expected a number");
    }
    return value.get<double>();
}

void apply_solver(SolverConfig& solver, const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("config key \"solver\": expected an object");
    }
    for (const auto& [key, value] : doc.items()) {
        if (key == "max_iter") {
            solver.max_iter = static_cast<int>(get_count(value, "solver.max_iter"));
        } else if (key == "tol_obj") {
            solver.tol_obj = get_real(value, "solver.tol_obj");
        } else if (key == "tol_kkt") {
            solver.tol_kkt = get_real(value, "solver.tol_kkt");
        } else if (key == "nonnegative") {
            solver.nonnegative = get_as<bool>(value, "solver.nonnegative");
        } else if (key == "algorithm") {
            try {
                solver.algorithm = algorithm_from_string(get_as<std::string>(value, key));
            } catch (const ParameterError& e) {
                throw ConfigError(e.what());
            }
        } else {
            throw ConfigError("unknown config key \"solver." + key + "\"");
        }
    }
}

void apply_validation(ValidationSettings& v, const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("config key \"validation\": expected an object");
    }
    for (const auto& [key, value] : doc.items()) {
        const std::string full = "validation." + key;
        if (key == "theta") {
            v.theta = get_real(value, full);
        } else if (key == "bernstein_n") {
            v.bernstein_n = get_count(value, full);
        } else if (key == "bernstein_q") {
            v.bernstein_q = get_real(value, full);
        } else if (key == "bernstein_trials") {
            v.bernstein_trials = get_as<std::uint64_t>(value, full);
        } else if (key == "gaussian_n") {
            v.gaussian_n = get_count(value, full);
        } else if (key == "gaussian_p") {
            v.gaussian_p = get_count(value, full);
        } else if (key == "gaussian_f_s") {
            v.gaussian_f_s = get_real(value, full);
        } else if (key == "gaussian_trials") {
            v.gaussian_trials = get_as<std::uint64_t>(value, full);
        } else if (key == "c1_trials") {
            v.c1_trials = get_as<std::uint64_t>(value, full);
        } else if (key == "lambda_trials") {
            v.lambda_trials = get_as<std::uint64_t>(value, full);
        } else if (key == "scale_series") {
            v.scale_series = get_reals(value, full);
        } else {
            throw ConfigError("unknown config key \"" + full + "\"");
        }
    }
}

}  // namespace

std::string_view to_string(Estimator estimator) {
    return estimator == Estimator::lasso ? "lasso" : "wlasso";
}

Estimator estimator_from_string(std::string_view name) {
    if (name == "lasso") {
        return Estimator::lasso;
    }
    if (name == "wlasso") {
        return Estimator::wlasso;
    }
    throw ParameterError("unknown estimator \"" + std::string(name) + "\"");
}

std::vector<double> ExperimentConfig::default_gamma_grid() {
    constexpr int points = 24;
    const double lo = 1e-5;
    const double hi = 64.0;
    std::vector<double> grid;
    for (int i = 0; i < points; ++i) {
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
    }
    return grid;
}

SolverConfig ExperimentConfig::default_solver() {
    SolverConfig solver;
    solver.algorithm = Algorithm::fista;
    return solver;
}

ExperimentConfig ExperimentConfig::paper() {
    return ExperimentConfig{};
}

ExperimentConfig ExperimentConfig::desk() {
    ExperimentConfig c;
    c.p = 400;
    c.n_list = {80, 120, 160, 200};
    c.f_s_list = {0.02, 0.04, 0.08};
    c.q_list = {0.5};
    c.trials = 30;
    c.validation.c1_trials = 200;
    c.validation.lambda_trials = 200;
    c.validation.bernstein_trials = 100'000;
    c.validation.gaussian_trials = 20'000;
    return c;
}

ExperimentConfig ExperimentConfig::preset(std::string_view name) {
    if (name == "paper") {
        return paper();
    }
    if (name == "desk") {
        return desk();
    }
    throw ConfigError("unknown preset \"" + std::string(name) + "\"");
}

std::vector<double> ExperimentConfig::sigmas() const {
    return sigma_list.empty() ? std::vector<double>{sigma} : sigma_list;
}

std::vector<Cell> ExperimentConfig::cells() const {
    std::vector<Cell> out;
    for (double s : sigmas()) {
        for (double q : q_list) {
            for (Index n : n_list) {
                for (double f : f_s_list) {
                    out.push_back(Cell{n, f, q, s});
                }
            }
        }
    }
    return out;
}

void ExperimentConfig::validate() const {
    if (p < 2) {
        throw ConfigError("p must be at least 2");
    }
    if (n_list.empty() || f_s_list.empty() || q_list.empty() || gamma_grid.empty()) {
        throw ConfigError("n_list, f_s_list, q_list and gamma_grid must be nonempty");
    }
    for (Index n : n_list) {
        if (n < 2) {
            throw ConfigError("every n must be at least 2");
        }
    }
    for (double f : f_s_list) {
        if (!(f >= 0.0 && f < 1.0)) {
            throw ConfigError("every f_s must lie in [0, 1)");
        }
    }
    for (double q : q_list) {
        if (!(q > 0.0 && q < 1.0)) {
            throw ConfigError("every q must lie in (0, 1)");
        }
    }
    for (double s : sigmas()) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw ConfigError("sigma must be finite and nonnegative");
        }
    }
    if (!(q_a > 0.0 && q_a <= 1.0)) {
        throw ConfigError("q_a must lie in (0, 1]");
    }
    if (trials < 0) {
        throw ConfigError("trials must be nonnegative");
    }
    if (cv_runs < 1) {
        throw ConfigError("cv_runs must be at least 1");
    }
    for (double g : gamma_grid) {
        if (!(g > 0.0) || !std::isfinite(g)) {
            throw ConfigError("every gamma must be positive and finite");
        }
    }
    if (!(c_const >= 0.0) || !(c_rec > 0.0)) {
        throw ConfigError("c_const must be nonnegative and c_rec positive");
    }
    if (!(signal_scale > 0.0) || !std::isfinite(signal_scale)) {
        throw ConfigError("signal_scale must be positive");
    }
    if (solver.max_iter < 1 || !(solver.tol_obj > 0.0) || !(solver.tol_kkt > 0.0)) {
        throw ConfigError("solver settings out of range");
    }
    if (validation.scale_series.empty()) {
        throw ConfigError("validation.scale_series must be nonempty");
    }
    for (double s : validation.scale_series) {
        if (!(s > 0.0)) {
            throw ConfigError("validation.scale_series entries must be positive");
        }
    }
}

ExperimentConfig config_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }

    ExperimentConfig c;
    if (doc.contains("preset")) {
        c = ExperimentConfig::preset(get_as<std::string>(doc["preset"], "preset"));
    }
    for (const auto& [key, value] : doc.items()) {
        if (key == "preset") {
            continue;
        } else if (key == "p") {
            c.p = get_count(value, key);
        } else if (key == "n_list") {
            c.n_list = get_counts(value, key);
        } else if (key == "f_s_list") {
            c.f_s_list = get_reals(value, key);
        } else if (key == "q_list") {
            c.q_list = get_reals(value, key);
        } else if (key == "sigma") {
            c.sigma = get_real(value, key);
        } else if (key == "sigma_list") {
            c.sigma_list = get_reals(value, key);
        } else if (key == "q_a") {
            c.q_a = get_real(value, key);
        } else if (key == "trials") {
            c.trials = static_cast<int>(get_count(value, key));
        } else if (key == "cv_runs") {
            c.cv_runs = static_cast<int>(get_count(value, key));
        } else if (key == "gamma_grid") {
            c.gamma_grid = get_reals(value, key);
        } else if (key == "estimators") {
            if (!value.is_array()) {
                throw ConfigError("config key \"estimators\": expected an array");
            }
            c.estimators.clear();
            for (const auto& e : value) {
                try {
                    c.estimators.push_back(estimator_from_string(get_as<std::string>(e, key)));
                } catch (const ParameterError& err) {
                    throw ConfigError(err.what());
                }
            }
        } else if (key == "threshold") {
            c.threshold = get_real(value, key);
        } else if (key == "noise_model") {
            try {
                c.noise_model = noise_model_from_string(get_as<std::string>(value, key));
            } catch (const ParameterError& err) {
                throw ConfigError(err.what());
            }
        } else if (key == "seed") {
            c.seed = get_as<std::uint64_t>(value, key);
        } else if (key == "force_assumptions") {
            c.force_assumptions = get_as<bool>(value, key);
        } else if (key == "c_const") {
            c.c_const = get_real(value, key);
        } else if (key == "c_rec") {
            c.c_rec = get_real(value, key);
        } else if (key == "signal_scale") {
            c.signal_scale = get_real(value, key);
        } else if (key == "threads") {
            c.threads = static_cast<unsigned>(get_count(value, key));
        } else if (key == "solver") {
            apply_solver(c.solver, value);
        } else if (key == "validation") {
            apply_validation(c.validation, value);
        } else {
            throw ConfigError("unknown config key \"" + key + "\"");
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file \"" + path + "\"");
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return config_from_json(text.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string config_to_json(const ExperimentConfig& c) {
    json doc;
    doc["p"] = c.p;
    doc["n_list"] = c.n_list;
    doc["f_s_list"] = c.f_s_list;
    doc["q_list"] = c.q_list;
    doc["sigma"] = c.sigma;
    doc["sigma_list"] = c.sigma_list;
    doc["q_a"] = c.q_a;
    doc["trials"] = c.trials;
    doc["cv_runs"] = c.cv_runs;
    doc["gamma_grid"] = c.gamma_grid;
    json est = json::array();
    for (Estimator e : c.estimators) {
        est.push_back(std::string(to_string(e)));
    }
    doc["estimators"] = est;
    doc["threshold"] = c.threshold;
    doc["noise_model"] = std::string(to_string(c.noise_model));
    doc["seed"] = c.seed;
    doc["force_assumptions"] = c.force_assumptions;
    doc["c_const"] = c.c_const;
    doc["c_rec"] = c.c_rec;
    doc["signal_scale"] = c.signal_scale;
    doc["threads"] = c.threads;
    doc["solver"] = {{"max_iter", c.solver.max_iter},
                     {"tol_obj", c.solver.tol_obj},
                     {"tol_kkt", c.solver.tol_kkt},
                     {"nonnegative", c.solver.nonnegative},
                     {"algorithm", std::string(to_string(c.solver.algorithm))}};
    const auto& v = c.validation;
    doc["validation"] = {{"theta", v.theta},
                         {"bernstein_n", v.bernstein_n},
                         {"bernstein_q", v.bernstein_q},
                         {"bernstein_trials", v.bernstein_trials},
                         {"gaussian_n", v.gaussian_n},
                         {"gaussian_p", v.gaussian_p},
                         {"gaussian_f_s", v.gaussian_f_s},
                         {"gaussian_trials", v.gaussian_trials},
                         {"c1_trials", v.c1_trials},
                         {"lambda_trials", v.lambda_trials},
                         {"scale_series", v.scale_series}};
    return doc.dump(2);
}

Cell parse_cell(std::string_view text, const ExperimentConfig& config) {
    Cell cell{config.n_list.front(), config.f_s_list.front(), config.q_list.front(),
              config.sigmas().front()};
    std::string spec(text);
    std::stringstream parts(spec);
    std::string item;
    while (std::getline(parts, item, ',')) {
        if (item.empty()) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("cell entry \"" + item + "\" is not key=value");
        }
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            std::size_t used = 0;
            if (key == "n") {
                cell.n = static_cast<Index>(std::stoll(value, &used));
            } else if (key == "q") {
                cell.q = std::stod(value, &used);
            } else if (key == "fs" || key == "f_s") {
                cell.f_s = std::stod(value, &used);
            } else if (key == "sigma") {
                cell.sigma = std::stod(value, &used);
            } else {
                throw ConfigError("unknown cell key \"" + key + "\"");
            }
            if (used != value.size()) {
                throw ConfigError("cell value \"" + value + "\" is not a number");
            }
        } catch (const std::logic_error&) {
            throw ConfigError("cell value \"" + value + "\" is not a number");
        }
    }
    return cell;
}

}  // namespace pooledcs
