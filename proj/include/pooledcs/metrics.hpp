#pragma once

#include "pooledcs/numerics.hpp"

#include <optional>
#include <vector>

namespace pooledcs {

struct Confusion {
    Index tp = 0;
    Index tn = 0;
    Index fp = 0;
    Index fn = 0;

    Index total() const { return tp + tn + fp + fn; }
};

/// ‖x* - x̂‖₂ / ‖x*‖₂. Throws MetricError for a zero ground truth.
double rrmse(const Vector& x_star, const Vector& x_hat);

/// Entry k is positive iff x_k > threshold (strict).
std::vector<bool> classify(const Vector& x, double threshold);

Confusion confusion(const std::vector<bool>& truth, const std::vector<bool>& predicted);

/// TP / (TP + FN); empty when no positives are present.
std::optional<double> sensitivity(const Confusion& c);
/// TN / (TN + FP); empty when no negatives are present.
std::optional<double> specificity(const Confusion& c);

}  // namespace pooledcs
