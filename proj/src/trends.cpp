#include "pooledcs/format.hpp"
#include "pooledcs/harness.hpp"
#include "pooledcs/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pooledcs {

namespace {

std::string opt(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
}

std::optional<double> mean_rrmse(const CellResult& r, Estimator e) {
    for (const auto& a : r.aggregates) {
        if (a.estimator == e) {
            return a.rrmse.mean;
        }
    }
    return std::nullopt;
}

// True when every value is present and the sequence is strictly increasing.
bool strictly_increasing(const std::vector<std::optional<double>>& xs) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!xs[i] || (i > 0 && !(*xs[i - 1] < *xs[i]))) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::string TrendReport::describe() const {
    std::ostringstream out;
    out << "trends at q=" << format_double(q) << '\n';
    for (const auto& c : cells) {
        out << "  n=" << c.n << " f_s=" << format_double(c.f_s) << ' ' << to_string(c.estimator)
            << " gamma=" << opt(c.gamma) << " mean_rrmse=" << opt(c.mean_rrmse) << '\n';
    }
    out << "decreasing in n: " << (decreasing_in_n ? "PASS" : "FAIL") << '\n'
        << "increasing in f_s: " << (increasing_in_f_s ? "PASS" : "FAIL") << '\n'
        << "scale series at n=" << scale_n << " f_s=" << format_double(scale_f_s) << '\n';
    for (const auto& s : scale_series) {
        out << "  scale=" << format_double(s.scale) << ' ' << to_string(s.estimator)
            << " mean_rrmse=" << opt(s.mean_rrmse)
            << " max_paired_diff=" << opt(s.max_paired_difference) << '\n';
    }
    out << "flat in scale (tol " << format_double(scale_tolerance)
        << "): " << (flat_in_scale ? "PASS" : "FAIL");
    return out.str();
}

TrendReport validate_trends(const ExperimentConfig& config) {
    config.validate();
    TrendReport report;
    report.q = config.q_list.front();
    const double sigma = config.sigmas().front();

    std::vector<Index> ns = config.n_list;
    std::vector<double> fs = config.f_s_list;
    std::sort(ns.begin(), ns.end());
    std::sort(fs.begin(), fs.end());

    // means[i][j] per estimator: n = ns[i], f_s = fs[j]
    std::map<Estimator, std::vector<std::vector<std::optional<double>>>> means;
    for (Estimator e : config.estimators) {
        means[e].assign(ns.size(), std::vector<std::optional<double>>(fs.size()));
    }
    for (std::size_t i = 0; i < ns.size(); ++i) {
        for (std::size_t j = 0; j < fs.size(); ++j) {
            const CellResult r = run_cell(config, Cell{ns[i], fs[j], report.q, sigma});
            for (Estimator e : config.estimators) {
                const auto m = mean_rrmse(r, e);
                means[e][i][j] = m;
                TrendCell c{ns[i], fs[j], e, std::nullopt, m};
                if (const auto g = r.gammas.find(e); g != r.gammas.end()) {
                    c.gamma = g->second;
                }
                report.cells.push_back(c);
            }
        }
    }

    report.decreasing_in_n = !config.estimators.empty();
    report.increasing_in_f_s = !config.estimators.empty();
    for (Estimator e : config.estimators) {
        const auto& m = means[e];
        for (std::size_t j = 0; j < fs.size(); ++j) {
            std::vector<std::optional<double>> col;
            for (std::size_t i = ns.size(); i-- > 0;) {
                col.push_back(m[i][j]);  // reversed: increasing means decreasing in n
            }
            report.decreasing_in_n = report.decreasing_in_n && strictly_increasing(col);
        }
        for (std::size_t i = 0; i < ns.size(); ++i) {
            report.increasing_in_f_s = report.increasing_in_f_s && strictly_increasing(m[i]);
        }
    }

    report.scale_n = config.n_list[config.n_list.size() / 2];
    report.scale_f_s = config.f_s_list.front();
    const Cell cell{report.scale_n, report.scale_f_s, report.q, sigma};
    std::map<Estimator, std::vector<std::optional<double>>> reference;
    report.flat_in_scale = !config.estimators.empty();
    bool first = true;
    for (double scale : config.validation.scale_series) {
        ExperimentConfig scaled = config;
        scaled.signal_scale = config.signal_scale * scale;
        const CellResult r = run_cell(scaled, cell);
        for (Estimator e : config.estimators) {
            std::vector<std::optional<double>> per_trial;
            for (const auto& rec : r.records) {
                if (rec.estimator == e) {
                    per_trial.push_back(rec.rrmse);
                }
            }
            ScalePoint point{scale, e, mean_rrmse(r, e), std::nullopt};
            if (first) {
                reference[e] = per_trial;
            }
            const auto& ref = reference[e];
            if (ref.size() == per_trial.size() && !ref.empty()) {
                double worst = 0.0;
                bool complete = true;
                for (std::size_t t = 0; t < ref.size(); ++t) {
                    if (ref[t].has_value() != per_trial[t].has_value()) {
                        complete = false;
                    } else if (ref[t]) {
                        worst = std::max(worst, std::abs(*ref[t] - *per_trial[t]));
                    }
                }
                if (complete) {
                    point.max_paired_difference = worst;
                }
            }
            report.flat_in_scale = report.flat_in_scale && point.mean_rrmse &&
                                   point.max_paired_difference &&
                                   *point.max_paired_difference <= report.scale_tolerance;
            report.scale_series.push_back(point);
        }
        first = false;
    }
    return report;
}

}  // namespace pooledcs
