#include "pooledcs/pipeline.hpp"

namespace pooledcs {

RngStream trial_stream(const ExperimentConfig& config, const Cell& cell, StreamPurpose purpose,
                       std::uint64_t index) {
    return RngStream(config.seed, {static_cast<std::uint64_t>(purpose),
                                   static_cast<std::uint64_t>(cell.n), label_of(cell.q),
                                   label_of(cell.f_s), label_of(cell.sigma), index});
}

TrialInstance generate_instance(const ExperimentConfig& config, const Cell& cell,
                                RngStream stream) {
    RngStream matrix_stream = stream.derive(1);
    RngStream signal_stream = stream.derive(2);
    RngStream noise_stream = stream.derive(3);

    PoolingMatrix a = generate_pooling_matrix(cell.n, config.p, cell.q, matrix_stream);
    SignalSpec spec;
    spec.p = config.p;
    spec.f_s = cell.f_s;
    GroundTruth truth = generate_signal(spec, signal_stream);
    truth.x_star *= config.signal_scale;
    Vector y = measure(config.noise_model, a, truth.x_star, config.noise(cell), noise_stream);
    PoolingDiagnostics diagnostics = validate_pooling(a);
    return TrialInstance{std::move(a), std::move(truth), std::move(y), std::move(diagnostics)};
}

WeightParams weight_params(const ExperimentConfig& config, const Cell& cell) {
    WeightParams params = WeightParams::standard(cell.n, config.p, cell.q, config.noise(cell));
    params.c_const = config.c_const;
    params.force = config.force_assumptions;
    return params;
}

}  // namespace pooledcs
