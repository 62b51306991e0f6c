#include "wavedp/fdtd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wavedp {

SolverConfig SolverConfig::checked(double c, double dt, int64_t n_steps, double dr,
                                   Boundary boundary) {
    SolverConfig cfg{c, dt, n_steps, dr, boundary};
    CourantReport rep = courant_check(cfg);
    if (!rep.ok)
        throw std::invalid_argument("SolverConfig: stability violated, c*dt*sqrt(2)/dr = " +
                                    std::to_string(rep.ratio));
    return cfg;
}

CourantReport courant_check(const SolverConfig& cfg) {
    if (cfg.c <= 0.0 || cfg.dt <= 0.0 || cfg.dr <= 0.0)
        throw std::invalid_argument("courant_check: c, dt, dr must be positive");
    const double ratio = cfg.c * cfg.dt * std::sqrt(2.0) / cfg.dr;
    return {ratio < 1.0, ratio};
}

IndexList SensorSet::flat_indices(int64_t m) const {
    auto out = std::make_shared<std::vector<int64_t>>();
    out->reserve(indices.size());
    for (const auto& ij : indices) {
        if (ij[0] < 0 || ij[0] >= m || ij[1] < 0 || ij[1] >= m)
            throw std::out_of_range("SensorSet: index (" + std::to_string(ij[0]) + "," +
                                    std::to_string(ij[1]) + ") outside " + std::to_string(m) +
                                    "^2 grid");
        out->push_back(ij[0] * m + ij[1]);
    }
    return out;
}

Tensor Measurements::flat_time_major() const {
    const int64_t M = sensor_count(), N = sample_count();
    Tensor out({M * N});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t s = 0; s < M; ++s) out[n * M + s] = values.at(s, n);
    return out;
}

StencilWorkspace StencilWorkspace::create(Tape& tape, int64_t m) {
    if (m < 3) throw std::invalid_argument("StencilWorkspace: grid side must be >= 3");
    StencilWorkspace ws;
    ws.m = m;

    Tensor mask = Tensor::zeros({m, m});
    for (int64_t i = 1; i < m - 1; ++i)
        for (int64_t j = 1; j < m - 1; ++j) mask.at(i, j) = 1.0;
    ws.interior_mask = tape.constant(std::move(mask));

    auto edge = std::make_shared<std::vector<int64_t>>();
    auto adj = std::make_shared<std::vector<int64_t>>();
    for (int64_t j = 1; j < m - 1; ++j) {
        edge->push_back(j);                     // top row
        adj->push_back(m + j);
        edge->push_back((m - 1) * m + j);       // bottom row
        adj->push_back((m - 2) * m + j);
    }
    for (int64_t i = 1; i < m - 1; ++i) {
        edge->push_back(i * m);                 // left column
        adj->push_back(i * m + 1);
        edge->push_back(i * m + m - 1);         // right column
        adj->push_back(i * m + m - 2);
    }
    ws.edge = std::move(edge);
    ws.edge_adj = std::move(adj);

    auto corner = std::make_shared<std::vector<int64_t>>(std::vector<int64_t>{
        0, m - 1, (m - 1) * m, (m - 1) * m + m - 1});
    auto n1 = std::make_shared<std::vector<int64_t>>(std::vector<int64_t>{
        1, m - 2, (m - 1) * m + 1, (m - 1) * m + m - 2});
    auto n2 = std::make_shared<std::vector<int64_t>>(std::vector<int64_t>{
        m, m + m - 1, (m - 2) * m, (m - 2) * m + m - 1});
    ws.corner = std::move(corner);
    ws.corner_n1 = std::move(n1);
    ws.corner_n2 = std::move(n2);
    return ws;
}

NodeId apply_abc(Tape& tape, NodeId p_next_interior, NodeId p_curr, const SolverConfig& cfg,
                 const StencilWorkspace& ws) {
    const double C = cfg.courant();
    const double coeff = (C - 1.0) / (C + 1.0);
    const std::vector<int64_t> shape = {ws.m, ws.m};

    NodeId p_int = tape.mul(p_next_interior, ws.interior_mask);

    // one-way update along each edge normal
    NodeId bc = tape.gather(p_curr, ws.edge);
    NodeId ac = tape.gather(p_curr, ws.edge_adj);
    NodeId an = tape.gather(p_int, ws.edge_adj);
    NodeId edge_new = tape.add(ac, tape.scale(tape.sub(an, bc), coeff));
    NodeId p_edges = tape.add(p_int, tape.scatter(edge_new, ws.edge, shape));

    // corners: average of the two adjacent-edge updates
    NodeId cc = tape.gather(p_curr, ws.corner);
    NodeId c1 = tape.gather(p_curr, ws.corner_n1);
    NodeId c2 = tape.gather(p_curr, ws.corner_n2);
    NodeId e1 = tape.gather(p_edges, ws.corner_n1);
    NodeId e2 = tape.gather(p_edges, ws.corner_n2);
    NodeId avg_c = tape.scale(tape.add(c1, c2), 0.5);
    NodeId avg_e = tape.scale(tape.add(e1, e2), 0.5);
    NodeId corner_new = tape.add(avg_c, tape.scale(tape.sub(avg_e, cc), coeff));
    return tape.add(p_edges, tape.scatter(corner_new, ws.corner, shape));
}

NodeId step_first(Tape& tape, NodeId p0, const SolverConfig& cfg, const StencilWorkspace& ws) {
    const double C2 = cfg.courant() * cfg.courant();
    if (cfg.boundary == Boundary::Rigid)
        return tape.add(p0, tape.scale(tape.laplacian5_neumann(p0), 0.5 * C2));
    NodeId p_tmp = tape.add(p0, tape.scale(tape.laplacian5(p0), 0.5 * C2));
    return apply_abc(tape, p_tmp, p0, cfg, ws);
}

NodeId step(Tape& tape, NodeId p_prev, NodeId p_curr, const SolverConfig& cfg,
            const StencilWorkspace& ws) {
    const double C2 = cfg.courant() * cfg.courant();
    if (cfg.boundary == Boundary::Rigid) {
        NodeId lin = tape.sub(tape.scale(p_curr, 2.0), p_prev);
        return tape.add(lin, tape.scale(tape.laplacian5_neumann(p_curr), C2));
    }
    NodeId lin = tape.sub(tape.scale(p_curr, 2.0), p_prev);
    NodeId p_tmp = tape.add(lin, tape.scale(tape.laplacian5(p_curr), C2));
    return apply_abc(tape, p_tmp, p_curr, cfg, ws);
}

std::vector<NodeId> simulate_nodes(Tape& tape, NodeId p0, const SolverConfig& cfg) {
    CourantReport rep = courant_check(cfg);
    if (!rep.ok)
        throw std::invalid_argument("simulate: stability violated, ratio = " +
                                    std::to_string(rep.ratio));
    const int64_t m = tape.value(p0).rows();
    StencilWorkspace ws = StencilWorkspace::create(tape, m);

    std::vector<NodeId> frames;
    frames.reserve(static_cast<size_t>(cfg.n_steps));
    frames.push_back(p0);
    for (int64_t n = 1; n < cfg.n_steps; ++n) {
        NodeId next = (n == 1) ? step_first(tape, p0, cfg, ws)
                               : step(tape, frames[n - 2], frames[n - 1], cfg, ws);
        if (!tape.value(next).all_finite())
            throw std::runtime_error("simulate: non-finite field at step " + std::to_string(n));
        frames.push_back(next);
    }
    return frames;
}

NodeId measure(Tape& tape, std::span<const NodeId> frames, const SensorSet& sensors, int64_t m) {
    IndexList idx = sensors.flat_indices(m);
    std::vector<NodeId> parts;
    parts.reserve(frames.size());
    for (NodeId f : frames) parts.push_back(tape.gather(f, idx));
    return tape.concat(parts);
}

FieldSequence simulate(const Grid2D& p0, const SolverConfig& cfg) {
    Tape tape;
    NodeId root = tape.constant(p0.values);
    std::vector<NodeId> ids = simulate_nodes(tape, root, cfg);
    FieldSequence seq;
    seq.m = p0.m;
    seq.dr = p0.dr;
    seq.dt = cfg.dt;
    seq.frames.reserve(ids.size());
    for (NodeId id : ids) seq.frames.push_back(tape.value(id));
    return seq;
}

Measurements measure(const FieldSequence& seq, const SensorSet& sensors) {
    IndexList idx = sensors.flat_indices(seq.m);
    const int64_t M = sensors.count();
    const int64_t N = static_cast<int64_t>(seq.frames.size());
    Measurements out;
    out.values = Tensor({M, N});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t s = 0; s < M; ++s) out.values.at(s, n) = seq.frames[n][(*idx)[s]];
    return out;
}

}  // namespace wavedp
