#include "pooledcs/simulate.hpp"

#include "pooledcs/error.hpp"
#include "pooledcs/format.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace pooledcs {

Index SignalSpec::sparsity() const {
    return static_cast<Index>(std::floor(f_s * static_cast<double>(p) + 0.5));
}

void SignalSpec::validate() const {
    if (p < 1) {
        throw ParameterError("SignalSpec: p must be positive");
    }
    if (!(f_s >= 0.0 && f_s < 1.0)) {
        throw ParameterError("SignalSpec: f_s must lie in [0, 1)");
    }
    if (!(hi_range.lo <= hi_range.hi) || !(lo_range.lo <= lo_range.hi)) {
        throw ParameterError("SignalSpec: interval bounds out of order");
    }
    if (!(hi_range.lo > lo_range.hi)) {
        throw ParameterError("SignalSpec: hi_range must lie strictly above lo_range");
    }
    if (sparsity() > p) {
        throw ParameterError("SignalSpec: sparsity exceeds p");
    }
}

double NoiseParams::kappa() const {
    return sigma * std::log1p(q_a);
}

void NoiseParams::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ParameterError("NoiseParams: sigma must be a finite nonnegative number");
    }
    if (!(q_a > 0.0 && q_a <= 1.0)) {
        throw ParameterError("NoiseParams: q_a must lie in (0, 1]");
    }
}

std::string_view to_string(NoiseModel model) {
    return model == NoiseModel::exact ? "exact" : "linearized";
}

NoiseModel noise_model_from_string(std::string_view name) {
    if (name == "exact") {
        return NoiseModel::exact;
    }
    if (name == "linearized") {
        return NoiseModel::linearized;
    }
    throw ParameterError("unknown noise model \"" + std::string(name) + "\"");
}

GroundTruth generate_signal(const SignalSpec& spec, RngStream& stream) {
    spec.validate();
    const Index p = spec.p;
    const Index s = spec.sparsity();

    // Partial Fisher-Yates: the first s slots become the support.
    std::vector<Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    for (Index i = 0; i < s; ++i) {
        const auto span = static_cast<std::uint64_t>(p - i);
        const auto j = i + static_cast<Index>(stream() % span);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    GroundTruth truth;
    truth.support.assign(order.begin(), order.begin() + s);
    std::sort(truth.support.begin(), truth.support.end());

    truth.x_star.resize(p);
    for (Index k = 0; k < p; ++k) {
        truth.x_star[k] = stream.uniform(spec.lo_range.lo, spec.lo_range.hi);
    }
    for (Index k : truth.support) {
        truth.x_star[k] = stream.uniform(spec.hi_range.lo, spec.hi_range.hi);
    }
    return truth;
}

namespace {

Vector pooled_loads(const PoolingMatrix& a, const Vector& x) {
    if (x.size() != a.samples()) {
        std::ostringstream msg;
        msg << "measure: signal length " << x.size() << " does not match p=" << a.samples();
        throw ParameterError(msg.str());
    }
    for (Index k = 0; k < x.size(); ++k) {
        if (!(x[k] >= 0.0)) {
            std::ostringstream msg;
            msg << "measure: viral load x[" << k << "] = " << x[k] << " is negative";
            throw ParameterError(msg.str());
        }
    }
    return a.membership() * x;
}

}  // namespace

Vector measure_exact(const PoolingMatrix& a, const Vector& x, const NoiseParams& noise,
                     RngStream& stream) {
    noise.validate();
    Vector y = pooled_loads(a, x);
    const double log_base = std::log1p(noise.q_a);
    for (Index j = 0; j < y.size(); ++j) {
        const double w = noise.sigma * stream.standard_normal();
        y[j] *= std::exp(w * log_base);
    }
    return y;
}

Vector measure_linearized(const PoolingMatrix& a, const Vector& x, const NoiseParams& noise,
                          RngStream& stream) {
    noise.validate();
    Vector y = pooled_loads(a, x);
    const double log_base = std::log1p(noise.q_a);
    for (Index j = 0; j < y.size(); ++j) {
        const double w = noise.sigma * stream.standard_normal();
        y[j] += y[j] * log_base * w;
    }
    return y;
}

Vector measure(NoiseModel model, const PoolingMatrix& a, const Vector& x,
               const NoiseParams& noise, RngStream& stream) {
    return model == NoiseModel::exact ? measure_exact(a, x, noise, stream)
                                      : measure_linearized(a, x, noise, stream);
}

void write_vector(std::ostream& out, const Vector& v) {
    for (Index i = 0; i < v.size(); ++i) {
        out << format_double(v[i]) << '\n';
    }
}

Vector read_vector(std::istream& in) {
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream fields(line);
        double value = 0.0;
        std::string rest;
        if (!(fields >> value) || (fields >> rest)) {
            throw IoError("vector file: line " + std::to_string(line_no) +
                          " is not a single number");
        }
        values.push_back(value);
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace pooledcs
