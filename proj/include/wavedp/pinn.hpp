#pragma once

#include "wavedp/fdtd.hpp"
#include "wavedp/sobol.hpp"
#include "wavedp/trainer.hpp"

namespace wavedp {

/// Space-time collocation training setup: the network models the whole
/// pressure field and the wave operator enters as a soft penalty.
struct PinnRunConfig {
    double extent = 1.0;
    double duration = 0.343;
    double c = 1.0;

    std::vector<int64_t> net_widths = pinn_net_widths();
    double omega0 = 30.0;
    double lr = 1e-4;
    int64_t n_iters = 50000;   // desk-scale default; the reference budget is 5e5
    int64_t pde_points = 2000;
    int64_t bcs_points = 800;
    int64_t sp_points = 200;
    double early_fraction = 0.1;  // sparsity slab [0, early_fraction * duration]

    AnnealSettings anneal{0.9, 100, AnnealNumerator::ReferenceOverOwn};
    // starting weights; the pde weight stays pinned under annealing
    double lambda_data0 = 1.0;
    double lambda_sp0 = 1.0;
    double lambda_pde0 = 1.0;
    double lambda_bcs0 = 1.0;
    uint64_t net_seed = 1;
    int64_t log_every = 1;
};

/// Trains against observations taken at the sensor nodes of `grid` for
/// every sample time; collocation batches advance through Sobol streams
/// each iteration.
TrainResult pinn_train(const PinnRunConfig& cfg, const Measurements& observations,
                       const SensorSet& sensors, const GridSpec& grid,
                       const ProgressFn& progress = {});

/// Mesh-free network evaluation on an arbitrary space-time lattice.
FieldSequence pinn_field(const MlpParams& params, const PinnRunConfig& cfg, const GridSpec& grid,
                         int64_t n_frames, double dt);

Evaluation pinn_evaluate(const MlpParams& params, const PinnRunConfig& cfg,
                         const FieldSequence& reference);

/// Mean squared wave-operator residual on a fixed batch (diagnostics).
double pinn_pde_residual(const MlpParams& params, const PinnRunConfig& cfg,
                         const Tensor& coords);

}  // namespace wavedp
