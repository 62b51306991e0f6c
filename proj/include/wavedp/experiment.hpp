#pragma once

#include <filesystem>
#include <optional>

#include "wavedp/oracle.hpp"
#include "wavedp/pinn.hpp"
#include "wavedp/trainer.hpp"

namespace wavedp {

/// One reconstruction problem: scene, discretization, sensing, noise.
struct ExperimentSpec {
    SceneSpec scene;
    int64_t grid_m = 100;
    double extent = 1.0;
    int64_t n_samples = 50;
    double duration = 0.343;
    double c = 1.0;

    int sensor_count = 20;
    double sensor_min_dist = 0.05;
    double region_lo = 0.1;
    double region_hi = 0.9;
    bool sensors_in_room = false;  // restrict to the trapezoid interior

    double snr_db = 20.0;
    int64_t upsample = 2;  // reference resolution factor

    uint64_t sensor_seed = 2;
    uint64_t noise_seed = 3;

    double dr() const { return extent / static_cast<double>(grid_m - 1); }
    double dt() const { return duration / static_cast<double>(n_samples - 1); }
    GridSpec grid() const { return {grid_m, dr()}; }
    GridSpec reference_grid() const { return grid().refined(upsample); }
    int64_t reference_samples() const { return (n_samples - 1) * upsample + 1; }
};

/// Everything a training run consumes plus the evaluation reference.
struct SceneData {
    GridSpec grid;
    SensorSet sensors;
    Measurements clean;
    Measurements noisy;
    FieldSequence reference;  // upsampled resolution
};

/// Ground-truth generation: analytic superposition for pulse scenes, a
/// reference-resolution rollout for the ring.
SceneData make_scene_data(const ExperimentSpec& spec);

/// Reference field only (no sensing); frames at the reference lattice.
FieldSequence make_reference_field(const ExperimentSpec& spec);

DpRunConfig dp_config_for(const ExperimentSpec& spec);
PinnRunConfig pinn_config_for(const ExperimentSpec& spec);

}  // namespace wavedp
