#include "wavedp/experiment.hpp"

#include <cmath>
#include <stdexcept>

namespace wavedp {

namespace {

std::vector<Point2> room_polygon() {
    const auto corners = trapezoid_corners();
    return std::vector<Point2>(corners.begin(), corners.end());
}

Measurements measure_pulses(const std::vector<GaussianPulse>& pulses, const SensorSet& sensors,
                            const GridSpec& grid, int64_t n_samples, double dt) {
    const int64_t M = sensors.count();
    Measurements out;
    out.values = Tensor({M, n_samples});
    std::vector<SpaceTimePoint> pts;
    pts.reserve(static_cast<size_t>(n_samples));
    for (int64_t s = 0; s < M; ++s) {
        const auto& ij = sensors.indices[static_cast<size_t>(s)];
        pts.clear();
        for (int64_t n = 0; n < n_samples; ++n)
            pts.push_back({grid.x(ij[1]), grid.y(ij[0]), static_cast<double>(n) * dt});
        const std::vector<double> series = superpose(pulses, pts);
        for (int64_t n = 0; n < n_samples; ++n)
            out.values.at(s, n) = series[static_cast<size_t>(n)];
    }
    return out;
}

}  // namespace

FieldSequence make_reference_field(const ExperimentSpec& spec) {
    const GridSpec ref = spec.reference_grid();
    const int64_t n_ref = spec.reference_samples();
    const double dt_ref = spec.dt() / static_cast<double>(spec.upsample);

    if (spec.scene.kind == SceneKind::Ring) {
        Tensor p0 = ring_initial(spec.scene.ring.center, spec.scene.ring.radius,
                                 spec.scene.ring.sigma, ref);
        const SolverConfig solver =
            SolverConfig::checked(spec.c, dt_ref, n_ref, ref.dr, Boundary::Absorbing);
        return simulate(Grid2D(ref.m, ref.dr, p0), solver);
    }

    const std::vector<GaussianPulse> pulses = scene_pulses(spec.scene, spec.extent);
    FieldSequence seq;
    seq.m = ref.m;
    seq.dr = ref.dr;
    seq.dt = dt_ref;
    for (int64_t n = 0; n < n_ref; ++n)
        seq.frames.push_back(
            gaussian_field_grid(pulses, ref, static_cast<double>(n) * dt_ref));
    return seq;
}

SceneData make_scene_data(const ExperimentSpec& spec) {
    SceneData data;
    data.grid = spec.grid();

    SensorRegion region;
    region.lo = spec.region_lo;
    region.hi = spec.region_hi;
    std::vector<Point2> poly;
    if (spec.sensors_in_room || spec.scene.kind == SceneKind::TrapezoidReverb) {
        poly = room_polygon();
        region.polygon = &poly;
        region.lo = 0.0;
        region.hi = 1.0;
    }
    data.sensors = sample_sensors(spec.sensor_count, region, spec.sensor_min_dist, data.grid,
                                  spec.sensor_seed);

    data.reference = make_reference_field(spec);

    if (spec.scene.kind == SceneKind::Ring) {
        // restrict the reference rollout to the sensor nodes and sample times
        const int64_t M = data.sensors.count();
        data.clean.values = Tensor({M, spec.n_samples});
        for (int64_t n = 0; n < spec.n_samples; ++n) {
            const Tensor& frame = data.reference.frames[static_cast<size_t>(n * spec.upsample)];
            for (int64_t s = 0; s < M; ++s) {
                const auto& ij = data.sensors.indices[static_cast<size_t>(s)];
                data.clean.values.at(s, n) =
                    frame.at(ij[0] * spec.upsample, ij[1] * spec.upsample);
            }
        }
    } else {
        data.clean = measure_pulses(scene_pulses(spec.scene, spec.extent), data.sensors,
                                    data.grid, spec.n_samples, spec.dt());
    }

    data.noisy = add_noise(data.clean, spec.snr_db, spec.noise_seed);
    return data;
}

DpRunConfig dp_config_for(const ExperimentSpec& spec) {
    DpRunConfig cfg;
    cfg.grid_m = spec.grid_m;
    cfg.extent = spec.extent;
    cfg.n_samples = spec.n_samples;
    cfg.duration = spec.duration;
    cfg.c = spec.c;
    return cfg;
}

PinnRunConfig pinn_config_for(const ExperimentSpec& spec) {
    PinnRunConfig cfg;
    cfg.extent = spec.extent;
    cfg.duration = spec.duration;
    cfg.c = spec.c;
    return cfg;
}

}  // namespace wavedp
