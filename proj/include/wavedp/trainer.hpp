#pragma once

#include <functional>
#include <vector>

#include "wavedp/fdtd.hpp"
#include "wavedp/io.hpp"
#include "wavedp/optim.hpp"
#include "wavedp/siren.hpp"

namespace wavedp {

struct AnnealSettings {
    double alpha = 0.9;
    int update_every = 100;  // 0 disables annealing
    AnnealNumerator numerator = AnnealNumerator::SumOverOwn;
};

/// Training setup for the solver-constrained model: the network encodes
/// the initial pressure, the rollout supplies every later frame.
struct DpRunConfig {
    int64_t grid_m = 100;
    double extent = 1.0;
    int64_t n_samples = 50;
    double duration = 0.343;
    double c = 1.0;
    Boundary boundary = Boundary::Absorbing;

    std::vector<int64_t> net_widths = dp_net_widths();
    double omega0 = 30.0;
    double lr = 1e-4;
    int64_t n_iters = 50000;
    AnnealSettings anneal;
    uint64_t net_seed = 1;
    int64_t log_every = 1;

    double dr() const { return extent / static_cast<double>(grid_m - 1); }
    double dt() const { return duration / static_cast<double>(n_samples - 1); }
    GridSpec grid() const { return {grid_m, dr()}; }
    SolverConfig solver() const {
        return SolverConfig::checked(c, dt(), n_samples, dr(), boundary);
    }
};

struct TrainResult {
    MlpParams params;
    std::vector<LossRow> log;
    double wall_seconds = 0.0;
    int64_t iterations = 0;
};

using ProgressFn = std::function<void(const LossRow&)>;

/// Full-batch gradient descent through the differentiable rollout.
/// Aborts with a runtime_error naming the iteration if the loss turns
/// non-finite.
TrainResult dp_train(const DpRunConfig& cfg, const Measurements& observations,
                     const SensorSet& sensors, const ProgressFn& progress = {});

/// Sample the network on an `upsample`-times finer grid and roll the
/// solver forward at the matching finer time step.
FieldSequence dp_rollout(const MlpParams& params, const DpRunConfig& cfg, int64_t upsample);

struct Evaluation {
    FieldSequence field;
    double nmse = 0.0;
};

Evaluation dp_evaluate(const MlpParams& params, const DpRunConfig& cfg, int64_t upsample,
                       const FieldSequence& reference);

}  // namespace wavedp
