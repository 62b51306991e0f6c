#include "wavedp/siren.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace wavedp {

std::vector<int64_t> dp_net_widths() { return {2, 64, 64, 64, 1}; }
std::vector<int64_t> pinn_net_widths() { return {3, 128, 128, 128, 128, 1}; }

MlpParams siren_init(std::span<const int64_t> widths, double omega0, uint64_t seed) {
    if (widths.size() < 2) throw std::invalid_argument("siren_init: need at least two widths");
    for (int64_t w : widths)
        if (w <= 0) throw std::invalid_argument("siren_init: widths must be positive");

    std::mt19937_64 rng(seed);
    MlpParams params;
    params.omega0 = omega0;
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        const int64_t fan_in = widths[l], fan_out = widths[l + 1];
        const double bound = (l == 0) ? 1.0 / static_cast<double>(fan_in)
                                      : std::sqrt(6.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Tensor w({fan_in, fan_out});
        for (int64_t i = 0; i < w.size(); ++i) w[i] = dist(rng);
        Tensor b({fan_out});
        for (int64_t i = 0; i < b.size(); ++i) b[i] = dist(rng);
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    return params;
}

TapedMlp register_params(Tape& tape, const MlpParams& params) {
    TapedMlp net;
    net.omega0 = params.omega0;
    for (size_t l = 0; l < params.weights.size(); ++l) {
        net.weights.push_back(tape.variable(params.weights[l]));
        net.biases.push_back(tape.variable(params.biases[l]));
    }
    return net;
}

Tensor normalize_coords(const Tensor& coords, const InputBox& box) {
    if (coords.rank() != 2 || coords.cols() != box.dim)
        throw std::invalid_argument("normalize_coords: expected (B," + std::to_string(box.dim) +
                                    "), got " + coords.shape_str());
    Tensor out(coords.shape());
    const int64_t B = coords.rows(), d = coords.cols();
    for (int64_t k = 0; k < d; ++k) {
        const double lo = box.lo[static_cast<size_t>(k)];
        const double s = box.scale(static_cast<int>(k));
        for (int64_t i = 0; i < B; ++i) out[i * d + k] = (coords[i * d + k] - lo) * s - 1.0;
    }
    return out;
}

NodeId siren_eval(Tape& tape, const TapedMlp& net, NodeId coords_normalized) {
    const size_t L = net.weights.size();
    NodeId h = coords_normalized;
    for (size_t l = 0; l < L; ++l) {
        NodeId z = tape.matmul(h, net.weights[l]);
        if (l == 0) z = tape.scale(z, net.omega0);
        NodeId pre = tape.add_rowvec(z, net.biases[l]);
        h = (l + 1 < L) ? tape.sin(pre) : pre;
    }
    return h;
}

NodeId siren_eval_at(Tape& tape, const TapedMlp& net, const Tensor& coords, const InputBox& box) {
    NodeId c = tape.constant(normalize_coords(coords, box));
    return siren_eval(tape, net, c);
}

Tensor grid_coords(const GridSpec& grid) {
    Tensor coords({grid.m * grid.m, 2});
    for (int64_t i = 0; i < grid.m; ++i)
        for (int64_t j = 0; j < grid.m; ++j) {
            coords[(i * grid.m + j) * 2 + 0] = grid.x(j);
            coords[(i * grid.m + j) * 2 + 1] = grid.y(i);
        }
    return coords;
}

NodeId siren_eval_grid(Tape& tape, const TapedMlp& net, const GridSpec& grid,
                       const InputBox& box) {
    NodeId flat = siren_eval_at(tape, net, grid_coords(grid), box);
    return tape.reshape(flat, {grid.m, grid.m});
}

JetNodes siren_jet2_eval(Tape& tape, const TapedMlp& net, const Tensor& coords, int axis,
                         const InputBox& box) {
    if (axis < 0 || axis >= box.dim)
        throw std::invalid_argument("siren_jet2_eval: axis " + std::to_string(axis) +
                                    " outside input dimension " + std::to_string(box.dim));
    const int64_t B = coords.rows(), d = coords.cols();

    // seed jets in physical units; normalization contributes a constant factor
    Tensor d1_seed({B, d});
    for (int64_t i = 0; i < B; ++i) d1_seed[i * d + axis] = box.scale(axis);

    NodeId v = tape.constant(normalize_coords(coords, box));
    NodeId d1 = tape.constant(std::move(d1_seed));
    NodeId d2 = tape.constant(Tensor::zeros({B, d}));

    const size_t L = net.weights.size();
    for (size_t l = 0; l < L; ++l) {
        NodeId zv = tape.matmul(v, net.weights[l]);
        NodeId z1 = tape.matmul(d1, net.weights[l]);
        NodeId z2 = tape.matmul(d2, net.weights[l]);
        if (l == 0) {
            zv = tape.scale(zv, net.omega0);
            z1 = tape.scale(z1, net.omega0);
            z2 = tape.scale(z2, net.omega0);
        }
        NodeId pre = tape.add_rowvec(zv, net.biases[l]);
        if (l + 1 == L) return {pre, z1, z2};

        NodeId s = tape.sin(pre);
        NodeId c = tape.cos(pre);
        // chain rule for f = sin(pre): f'' = cos(pre) pre'' - sin(pre) pre'^2
        v = s;
        NodeId d1sq = tape.mul(z1, z1);
        d2 = tape.sub(tape.mul(c, z2), tape.mul(s, d1sq));
        d1 = tape.mul(c, z1);
    }
    throw std::logic_error("siren_jet2_eval: unreachable");
}

Tensor siren_forward(const MlpParams& params, const Tensor& coords, const InputBox& box) {
    Tape tape;
    TapedMlp net;
    net.omega0 = params.omega0;
    for (size_t l = 0; l < params.weights.size(); ++l) {
        net.weights.push_back(tape.constant(params.weights[l]));
        net.biases.push_back(tape.constant(params.biases[l]));
    }
    return tape.value(siren_eval_at(tape, net, coords, box));
}

}  // namespace wavedp
