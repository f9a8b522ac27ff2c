#pragma once

#include "pooledcs/config.hpp"
#include "pooledcs/pooling.hpp"
#include "pooledcs/simulate.hpp"
#include "pooledcs/weights.hpp"

#include <cstdint>

namespace pooledcs {

/// Top-level stream labels; keeps preliminary (cross-validation) draws
/// disjoint from the reported trials and from each validator.
enum class StreamPurpose : std::uint64_t {
    trial = 1,
    cross_validation = 2,
    c1 = 3,
    lambda = 4,
    bernstein = 5,
    gaussian = 6,
    auxiliary = 7,
    surrogate = 8,
};

/// Stream keyed by (seed, purpose, cell, index). The signal scale is not part
/// of the key, so scaled runs see identical draws.
RngStream trial_stream(const ExperimentConfig& config, const Cell& cell, StreamPurpose purpose,
                       std::uint64_t index);

/// A, x*, y for one trial.
struct TrialInstance {
    PoolingMatrix a;
    GroundTruth truth;
    Vector y;
    PoolingDiagnostics diagnostics;
};

TrialInstance generate_instance(const ExperimentConfig& config, const Cell& cell,
                                RngStream stream);

WeightParams weight_params(const ExperimentConfig& config, const Cell& cell);

}  // namespace pooledcs
