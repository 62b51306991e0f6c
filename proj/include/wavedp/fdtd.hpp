#pragma once

#include <array>
#include <optional>
#include <vector>

#include "wavedp/tape.hpp"
#include "wavedp/tensor.hpp"

namespace wavedp {

/// Square spatial sampling: m points per side, spacing dr, node (i,j) at
/// physical (ox + j*dr, oy + i*dr). Extent per side is (m-1)*dr.
struct GridSpec {
    int64_t m = 0;
    double dr = 0.0;
    double ox = 0.0;
    double oy = 0.0;

    double extent() const { return static_cast<double>(m - 1) * dr; }
    double x(int64_t j) const { return ox + static_cast<double>(j) * dr; }
    double y(int64_t i) const { return oy + static_cast<double>(i) * dr; }

    /// Same physical domain sampled factor-times finer: (m-1) -> factor*(m-1).
    GridSpec refined(int64_t factor) const {
        return {(m - 1) * factor + 1, dr / static_cast<double>(factor), ox, oy};
    }
};

struct Grid2D {
    int64_t m = 0;
    double dr = 0.0;
    Tensor values;  // shape (m, m)

    Grid2D() = default;
    Grid2D(int64_t m_, double dr_) : m(m_), dr(dr_), values({m_, m_}) {}
    Grid2D(const GridSpec& g) : m(g.m), dr(g.dr), values({g.m, g.m}) {}
    Grid2D(int64_t m_, double dr_, Tensor v) : m(m_), dr(dr_), values(std::move(v)) {}
};

enum class Boundary { Absorbing, Rigid };

struct CourantReport {
    bool ok = false;
    double ratio = 0.0;  // c*dt*sqrt(2)/dr; stable iff < 1
};

struct SolverConfig {
    double c = 1.0;
    double dt = 0.0;
    int64_t n_steps = 0;  // number of stored frames, including the initial one
    double dr = 0.0;
    Boundary boundary = Boundary::Absorbing;

    double courant() const { return c * dt / dr; }

    /// Validating constructor; throws on a violated stability bound.
    static SolverConfig checked(double c, double dt, int64_t n_steps, double dr,
                                Boundary boundary = Boundary::Absorbing);
};

CourantReport courant_check(const SolverConfig& cfg);

struct FieldSequence {
    std::vector<Tensor> frames;  // each (m, m)
    int64_t m = 0;
    double dr = 0.0;
    double dt = 0.0;
};

/// Grid indices of the observation points, row i / column j per sensor.
struct SensorSet {
    std::vector<std::array<int64_t, 2>> indices;

    int64_t count() const { return static_cast<int64_t>(indices.size()); }
    IndexList flat_indices(int64_t m) const;
};

/// Observed (or predicted) pressure, one row per sensor, one column per
/// time sample.
struct Measurements {
    Tensor values;  // (M_ob, N)
    std::optional<double> snr_db;  // absent for clean data

    int64_t sensor_count() const { return values.rows(); }
    int64_t sample_count() const { return values.cols(); }
    /// Frame-major flattening matching measure(): out[n*M + s] = values(s, n).
    Tensor flat_time_major() const;
};

/// Per-(tape, grid) constants reused across solver steps.
struct StencilWorkspace {
    int64_t m = 0;
    NodeId interior_mask = -1;
    IndexList edge, edge_adj;          // non-corner ring points and interior neighbors
    IndexList corner, corner_n1, corner_n2;

    static StencilWorkspace create(Tape& tape, int64_t m);
};

// Differentiable solver steps; all values live on the tape.
NodeId apply_abc(Tape& tape, NodeId p_next_interior, NodeId p_curr, const SolverConfig& cfg,
                 const StencilWorkspace& ws);
NodeId step_first(Tape& tape, NodeId p0, const SolverConfig& cfg, const StencilWorkspace& ws);
NodeId step(Tape& tape, NodeId p_prev, NodeId p_curr, const SolverConfig& cfg,
            const StencilWorkspace& ws);
std::vector<NodeId> simulate_nodes(Tape& tape, NodeId p0, const SolverConfig& cfg);

/// Gathers every frame at the sensor nodes; result is a (N * M_ob) vector,
/// frame-major, differentiable back to the frames.
NodeId measure(Tape& tape, std::span<const NodeId> frames, const SensorSet& sensors, int64_t m);

/// Convenience rollout without gradient tracking.
FieldSequence simulate(const Grid2D& p0, const SolverConfig& cfg);

Measurements measure(const FieldSequence& seq, const SensorSet& sensors);

}  // namespace wavedp
