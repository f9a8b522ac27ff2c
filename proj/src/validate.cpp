#include "pooledcs/validate.hpp"

#include "pooledcs/error.hpp"
#include "pooledcs/format.hpp"
#include "pooledcs/pipeline.hpp"
#include "pooledcs/weights.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pooledcs {

namespace {

std::string opt(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

// a <= b up to rounding in a sum of nonnegative terms.
bool within(double a, double b) {
    return a <= b + 1e-12 * std::max(std::abs(a), std::abs(b)) + 1e-300;
}

}  // namespace

TailReport TailReport::make(std::string name, std::uint64_t trials, std::uint64_t violations,
                            double theoretical_rate) {
    TailReport r;
    r.name = std::move(name);
    r.trials = trials;
    r.violations = violations;
    r.theoretical_rate = theoretical_rate;
    if (trials > 0) {
        const double t = static_cast<double>(trials);
        r.empirical_rate = static_cast<double>(violations) / t;
        const double rate = std::clamp(theoretical_rate, 0.0, 1.0);
        r.monte_carlo_4sigma = 4.0 * std::sqrt(rate * (1.0 - rate) / t);
    }
    return r;
}

bool TailReport::passed() const {
    return empirical_rate && *empirical_rate <= theoretical_rate + monte_carlo_4sigma;
}

std::string TailReport::describe() const {
    std::ostringstream out;
    out << name << ": trials=" << trials << " violations=" << violations
        << " empirical=" << opt(empirical_rate) << " bound=" << format_double(theoretical_rate)
        << " mc4sigma=" << format_double(monte_carlo_4sigma) << " " << verdict(passed());
    return out.str();
}

bool C1Report::passed() const {
    return lasso.empirical_rate && wlasso.empirical_rate && *lasso.empirical_rate <= max_rate &&
           *wlasso.empirical_rate <= max_rate;
}

std::string C1Report::describe() const {
    std::ostringstream out;
    out << "c1 lasso: trials=" << lasso.trials << " violations=" << lasso.violations
        << " rate=" << opt(lasso.empirical_rate) << '\n'
        << "c1 wlasso: trials=" << wlasso.trials << " violations=" << wlasso.violations
        << " rate=" << opt(wlasso.empirical_rate)
        << " coordinate_violations=" << wlasso_coordinate_violations << " of "
        << wlasso.trials * static_cast<std::uint64_t>(p) << '\n'
        << "skipped=" << skipped << " max_rate=" << format_double(max_rate) << ' '
        << verdict(passed());
    return out.str();
}

C1Report validate_c1(const ExperimentConfig& config, const Cell& cell, std::uint64_t trials) {
    struct Outcome {
        bool skipped = false;
        bool lasso = false;
        bool wlasso = false;
        std::uint64_t coordinates = 0;
    };
    std::vector<Outcome> outcomes(trials);
    const WeightParams params = weight_params(config, cell);

    detail::parallel_for(outcomes.size(), detail::worker_count(config), [&](std::size_t t) {
        const TrialInstance inst =
            generate_instance(config, cell, trial_stream(config, cell, StreamPurpose::c1, t));
        const SurrogateSystem sys = make_surrogate(inst.a, inst.y);
        const Vector grad =
            gradient_at_truth(sys.a_tilde, sys.y_tilde, inst.truth.x_star).cwiseAbs();
        const RMatrices rm = r_matrices(inst.a);
        Outcome& o = outcomes[t];
        try {
            const WeightSet lasso = beta_lasso(inst.a, inst.y, params, rm);
            const WeightSet wlasso = beta_wlasso(inst.a, inst.y, params, rm);
            o.lasso = grad.maxCoeff() > lasso.beta;
            const auto above = (grad.array() > wlasso.beta_k.array()).count();
            o.coordinates = static_cast<std::uint64_t>(above);
            o.wlasso = above > 0;
        } catch (const AssumptionError&) {
            o.skipped = true;
        }
    });

    C1Report report;
    report.p = config.p;
    std::uint64_t valid = 0, lasso = 0, wlasso = 0;
    for (const auto& o : outcomes) {
        if (o.skipped) {
            ++report.skipped;
            continue;
        }
        ++valid;
        lasso += o.lasso ? 1 : 0;
        wlasso += o.wlasso ? 1 : 0;
        report.wlasso_coordinate_violations += o.coordinates;
    }
    report.lasso = TailReport::make("c1_lasso", valid, lasso, report.max_rate);
    report.wlasso = TailReport::make("c1_wlasso", valid, wlasso, report.max_rate);
    return report;
}

bool LambdaCoverage::passed() const {
    return valid > 0 && *fraction_under <= 0.01 && *fraction_over_2 == 0.0;
}

std::string LambdaCoverage::describe() const {
    std::ostringstream out;
    out << "lambda_hat: trials=" << trials << " valid=" << valid << " invalid=" << invalid << '\n'
        << "ratio lambda_hat/l1: min=" << opt(min_ratio) << " max=" << opt(max_ratio)
        << " mean=" << opt(mean_ratio) << '\n'
        << "fraction_under=" << opt(fraction_under) << " fraction_over_2=" << opt(fraction_over_2)
        << '\n'
        << "l1_norm_true: mean=" << opt(mean_l1) << " sd=" << opt(sd_l1) << '\n'
        << "lambda_hat: mean=" << opt(mean_lambda) << " sd=" << opt(sd_lambda) << ' '
        << verdict(passed());
    return out.str();
}

LambdaCoverage validate_lambda_hat(const ExperimentConfig& config, const Cell& cell,
                                   std::uint64_t trials) {
    std::vector<std::optional<std::pair<double, double>>> values(trials);  // (l1, Λ̂)
    const WeightParams params = weight_params(config, cell);

    detail::parallel_for(values.size(), detail::worker_count(config), [&](std::size_t t) {
        const TrialInstance inst = generate_instance(
            config, cell, trial_stream(config, cell, StreamPurpose::lambda, t));
        try {
            values[t] = std::make_pair(inst.truth.x_star.lpNorm<1>(), lambda_hat(inst.y, params));
        } catch (const AssumptionError&) {
        }
    });

    LambdaCoverage c;
    c.trials = trials;
    std::vector<double> l1, lam, ratio;
    for (const auto& v : values) {
        if (!v) {
            ++c.invalid;
            continue;
        }
        l1.push_back(v->first);
        lam.push_back(v->second);
        ratio.push_back(v->second / v->first);
    }
    c.valid = ratio.size();
    if (ratio.empty()) {
        return c;
    }
    const auto count = static_cast<double>(ratio.size());
    auto mean = [](const std::vector<double>& xs) {
        double s = 0.0;
        for (double x : xs) {
            s += x;
        }
        return s / static_cast<double>(xs.size());
    };
    auto sd = [&](const std::vector<double>& xs) -> std::optional<double> {
        if (xs.size() < 2) {
            return std::nullopt;
        }
        const double m = mean(xs);
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - m) * (x - m);
        }
        return std::sqrt(ss / static_cast<double>(xs.size() - 1));
    };
    c.min_ratio = *std::min_element(ratio.begin(), ratio.end());
    c.max_ratio = *std::max_element(ratio.begin(), ratio.end());
    c.mean_ratio = mean(ratio);
    c.fraction_under =
        static_cast<double>(std::count_if(ratio.begin(), ratio.end(), [](double r) { return r < 1.0; })) /
        count;
    c.fraction_over_2 =
        static_cast<double>(std::count_if(ratio.begin(), ratio.end(), [](double r) { return r > 2.0; })) /
        count;
    c.mean_l1 = mean(l1);
    c.sd_l1 = sd(l1);
    c.mean_lambda = mean(lam);
    c.sd_lambda = sd(lam);
    return c;
}

TailReport validate_bernstein(Index n, double q, double theta, std::uint64_t trials,
                              RngStream stream) {
    if (!(theta > 0.0)) {
        throw ParameterError("validate_bernstein: theta must be positive");
    }
    if (n < 1) {
        throw ParameterError("validate_bernstein: n must be positive");
    }
    const double nd = static_cast<double>(n);
    const double cutoff = nd * q - c_n_theta(n, q, theta);
    std::uint64_t violations = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Index sum = 0;
        for (Index i = 0; i < n; ++i) {
            sum += sample_bernoulli(stream, q);
        }
        if (static_cast<double>(sum) <= cutoff) {
            ++violations;
        }
    }
    std::ostringstream name;
    name << "bernstein n=" << n << " q=" << format_double(q) << " theta=" << format_double(theta);
    return TailReport::make(name.str(), trials, violations, std::exp(-theta));
}

bool GaussianReport::passed() const {
    return two_sided.passed() && one_sided.passed() && ones.passed();
}

std::string GaussianReport::describe() const {
    std::ostringstream out;
    out << two_sided.describe() << '\n'
        << one_sided.describe() << '\n'
        << ones.describe() << '\n'
        << "radius factor=" << format_double(radius_factor) << ' ' << verdict(passed());
    return out.str();
}

GaussianReport validate_gaussian_concentration(const GaussianSettings& s, RngStream stream) {
    s.noise.validate();
    if (!(s.theta > 0.0)) {
        throw ParameterError("validate_gaussian_concentration: theta must be positive");
    }
    const double factor = noise_tail_factor(s.noise.kappa(), s.theta, s.n);

    RngStream matrix_stream = stream.derive(1);
    RngStream signal_stream = stream.derive(2);
    RngStream noise_stream = stream.derive(3);
    const PoolingMatrix a = generate_pooling_matrix(s.n, s.p, s.q, matrix_stream);
    SignalSpec spec;
    spec.p = s.p;
    spec.f_s = s.f_s;
    const GroundTruth truth = generate_signal(spec, signal_stream);
    const Vector ax = a.membership() * truth.x_star;
    const RMatrices rm = r_matrices(a);
    const Vector r = rm.r.col(0);
    const Vector r_bar = rm.r_bar.col(0);

    std::uint64_t two = 0, one = 0, ones = 0;
    for (std::uint64_t t = 0; t < s.trials; ++t) {
        const Vector y = measure(s.model, a, truth.x_star, s.noise, noise_stream);
        const Vector resid = y - ax;
        const Vector y2 = y.cwiseProduct(y);
        // Strict inequalities: with σ = 0 both sides vanish and nothing is counted.
        const double v = r.dot(resid);
        const double radius = std::sqrt(r_bar.dot(y2)) * factor;
        two += std::abs(v) > radius ? 1 : 0;
        one += v > radius ? 1 : 0;
        const double deficit = -resid.sum();
        ones += deficit > std::sqrt(y2.sum()) * factor ? 1 : 0;
    }
    const double e = std::exp(-s.theta);
    GaussianReport report;
    report.radius_factor = factor;
    report.two_sided = TailReport::make("gaussian two-sided (column of R)", s.trials, two, 3.0 * e);
    report.one_sided = TailReport::make("gaussian one-sided (column of R)", s.trials, one, 2.0 * e);
    report.ones = TailReport::make("gaussian one-sided (-1_n)", s.trials, ones, 2.0 * e);
    return report;
}

TailReport validate_auxiliary_inequality(std::uint64_t instances, RngStream stream) {
    std::uint64_t violations = 0;
    for (std::uint64_t t = 0; t < instances; ++t) {
        const Index rows = 1 + static_cast<Index>(stream() % 12);
        const Index cols = 1 + static_cast<Index>(stream() % 12);
        const double density = stream.uniform();
        Vector s(rows);
        Matrix a(rows, cols);
        Vector x(cols);
        for (Index l = 0; l < rows; ++l) {
            s[l] = stream.uniform();
            for (Index m = 0; m < cols; ++m) {
                a(l, m) = stream.uniform() < density ? 1.0 : 0.0;
            }
        }
        for (Index m = 0; m < cols; ++m) {
            x[m] = stream.standard_normal() * std::exp(stream.uniform(-3.0, 3.0));
        }
        const Vector ax = a * x;
        const double lhs = s.dot(ax.cwiseProduct(ax));
        const double l1 = x.lpNorm<1>();
        const double rhs = (a.transpose() * s).maxCoeff() * l1 * l1;
        violations += within(lhs, rhs) ? 0 : 1;
    }
    return TailReport::make("auxiliary inequality", instances, violations, 0.0);
}

TailReport validate_dominance(Index n, Index p, double q, double f_s, std::uint64_t instances,
                              RngStream stream) {
    std::uint64_t violations = 0;
    for (std::uint64_t t = 0; t < instances; ++t) {
        RngStream ms = stream.derive(2 * t);
        RngStream ss = stream.derive(2 * t + 1);
        const PoolingMatrix a = generate_pooling_matrix(n, p, q, ms);
        SignalSpec spec;
        spec.p = p;
        spec.f_s = f_s;
        const GroundTruth truth = generate_signal(spec, ss);
        const RMatrices rm = r_matrices(a);
        const double w = w_statistic(a, rm);
        const Vector ax = a.membership() * truth.x_star;
        const Vector lhs = rm.r_bar.transpose() * ax.cwiseProduct(ax);
        const double l1 = truth.x_star.lpNorm<1>();
        const double rhs = l1 * l1 * w;
        bool ok = true;
        for (Index k = 0; k < p; ++k) {
            ok = ok && within(lhs[k], rhs);
        }
        violations += ok ? 0 : 1;
    }
    return TailReport::make("dominance R_bar^T (Ax)^2 <= |x|_1^2 W", instances, violations, 0.0);
}

bool SurrogateIdentityReport::passed(double tolerance) const {
    return draws > 0 && max_gram_deviation <= tolerance &&
           max_mean_gradient <= tolerance * max_gradient_magnitude;
}

std::string SurrogateIdentityReport::describe() const {
    std::ostringstream out;
    out << "surrogate identities: draws=" << draws
        << " max|mean(AtA)-I|=" << format_double(max_gram_deviation)
        << " max|mean gradient|=" << format_double(max_mean_gradient)
        << " max|gradient|=" << format_double(max_gradient_magnitude) << ' '
        << verdict(passed());
    return out.str();
}

SurrogateIdentityReport validate_surrogate_identities(Index n, Index p, double q,
                                                      std::uint64_t draws, RngStream stream,
                                                      NoiseModel model) {
    SurrogateIdentityReport report;
    report.draws = draws;
    if (draws == 0) {
        return report;
    }
    RngStream signal_stream = stream.derive(0);
    SignalSpec spec;
    spec.p = p;
    spec.f_s = 0.1;
    const GroundTruth truth = generate_signal(spec, signal_stream);
    const NoiseParams noise;

    Matrix gram = Matrix::Zero(p, p);
    Vector grad = Vector::Zero(p);
    for (std::uint64_t t = 0; t < draws; ++t) {
        RngStream ms = stream.derive(2 * t + 1);
        RngStream ns = stream.derive(2 * t + 2);
        const PoolingMatrix a = generate_pooling_matrix(n, p, q, ms);
        const Vector y = measure(model, a, truth.x_star, noise, ns);
        const SurrogateSystem sys = make_surrogate(a, y);
        gram.noalias() += sys.a_tilde.transpose() * sys.a_tilde;
        const Vector g = gradient_at_truth(sys.a_tilde, sys.y_tilde, truth.x_star);
        grad += g;
        report.max_gradient_magnitude =
            std::max(report.max_gradient_magnitude, g.cwiseAbs().maxCoeff());
    }
    const double d = static_cast<double>(draws);
    report.max_gram_deviation = (gram / d - Matrix::Identity(p, p)).cwiseAbs().maxCoeff();
    report.max_mean_gradient = (grad / d).cwiseAbs().maxCoeff();
    return report;
}

double rho_gamma(double gamma) {
    if (!(gamma > 2.0)) {
        throw ParameterError("rho_gamma: gamma must exceed 2");
    }
    return gamma * (gamma + 2.0) / (gamma - 2.0);
}

Prop3Bound prop3_bound(const Prop3Inputs& in) {
    const double kappa2 = in.rec.kappa2;
    if (!(in.epsilon > 0.0) || !(in.epsilon < kappa2)) {
        throw ParameterError("prop3_bound: epsilon must lie in (0, kappa2)");
    }
    if (in.beta_k.size() == 0) {
        throw ParameterError("prop3_bound: weights are empty");
    }
    Prop3Bound b;
    b.rho = rho_gamma(in.gamma);
    b.beta_min = in.beta_k.minCoeff();
    b.beta_max = in.beta_k.maxCoeff();
    b.s = static_cast<Index>(in.support.size());
    double ss = 0.0;
    for (Index k : in.support) {
        if (k < 0 || k >= in.beta_k.size()) {
            throw ParameterError("prop3_bound: support index out of range");
        }
        ss += in.beta_k[k] * in.beta_k[k];
    }
    b.beta_s_norm = std::sqrt(ss);

    const double scale = in.c_universal * b.rho / (in.epsilon * in.epsilon);
    const double margin = (kappa2 - in.epsilon) / (in.rec.kappa1 * b.rho);
    const double root_s = std::sqrt(static_cast<double>(b.s));
    b.wlasso_bound = scale * b.beta_s_norm;
    b.wlasso_gate = b.beta_s_norm <= b.beta_min * margin;
    b.lasso_bound = scale * b.beta_max * root_s;
    b.lasso_gate = root_s <= margin;
    return b;
}

}  // namespace pooledcs
