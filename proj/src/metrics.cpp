#include "pooledcs/metrics.hpp"

#include "pooledcs/error.hpp"

namespace pooledcs {

double rrmse(const Vector& x_star, const Vector& x_hat) {
    if (x_star.size() != x_hat.size()) {
        throw MetricError("rrmse: length mismatch");
    }
    const double denom = x_star.norm();
    if (!(denom > 0.0)) {
        throw MetricError("rrmse: ground truth is the zero vector");
    }
    return (x_star - x_hat).norm() / denom;
}

std::vector<bool> classify(const Vector& x, double threshold) {
    if (!(threshold >= 0.0)) {
        throw ParameterError("classify: threshold must be nonnegative");
    }
    std::vector<bool> labels(static_cast<std::size_t>(x.size()));
    for (Index k = 0; k < x.size(); ++k) {
        labels[static_cast<std::size_t>(k)] = x[k] > threshold;
    }
    return labels;
}

Confusion confusion(const std::vector<bool>& truth, const std::vector<bool>& predicted) {
    if (truth.size() != predicted.size()) {
        throw MetricError("confusion: length mismatch");
    }
    Confusion c;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        if (truth[k]) {
            predicted[k] ? ++c.tp : ++c.fn;
        } else {
            predicted[k] ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

std::optional<double> sensitivity(const Confusion& c) {
    if (c.tp + c.fn == 0) {
        return std::nullopt;
    }
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

std::optional<double> specificity(const Confusion& c) {
    if (c.tn + c.fp == 0) {
        return std::nullopt;
    }
    return static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
}

}  // namespace pooledcs
