#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "wavedp/fdtd.hpp"
#include "wavedp/tape.hpp"
#include "wavedp/tensor.hpp"

namespace wavedp {

/// Sine-activated MLP parameters. Weight matrices are (fan_in, fan_out)
/// so a batch of row-vector inputs maps through plain matmul.
struct MlpParams {
    std::vector<Tensor> weights;
    std::vector<Tensor> biases;
    double omega0 = 30.0;

    int layer_count() const { return static_cast<int>(weights.size()); }
    int64_t in_dim() const { return weights.front().rows(); }
    int64_t out_dim() const { return weights.back().cols(); }
    int64_t param_count() const {
        int64_t n = 0;
        for (size_t i = 0; i < weights.size(); ++i) n += weights[i].size() + biases[i].size();
        return n;
    }
};

/// Axis-aligned box mapped affinely onto [-1,1]^d before the first layer.
struct InputBox {
    int dim = 2;
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};

    static InputBox square(double extent) { return {2, {0, 0, 0}, {extent, extent, 1}}; }
    static InputBox cube(double extent, double duration) {
        return {3, {0, 0, 0}, {extent, extent, duration}};
    }
    double scale(int axis) const { return 2.0 / (hi[static_cast<size_t>(axis)] - lo[static_cast<size_t>(axis)]); }
};

/// widths = {in, hidden..., out}. First layer U(-1/fan_in, 1/fan_in) with
/// the frequency factor applied inside the activation; hidden and output
/// layers U(+-sqrt(6/fan_in)). Deterministic in the seed.
MlpParams siren_init(std::span<const int64_t> widths, double omega0, uint64_t seed);

/// Standard architectures: initial-condition net 2->64x3->1,
/// space-time net 3->128x4->1.
std::vector<int64_t> dp_net_widths();
std::vector<int64_t> pinn_net_widths();

/// Network parameters registered on a tape as tracked variables.
struct TapedMlp {
    std::vector<NodeId> weights;
    std::vector<NodeId> biases;
    double omega0 = 30.0;

    std::vector<NodeId> all() const {
        std::vector<NodeId> v = weights;
        v.insert(v.end(), biases.begin(), biases.end());
        return v;
    }
};

TapedMlp register_params(Tape& tape, const MlpParams& params);

/// Normalize physical coordinates (B, d) into [-1,1]^d.
Tensor normalize_coords(const Tensor& coords, const InputBox& box);

/// Forward pass on normalized coordinates (B, d); returns a (B, 1) node.
NodeId siren_eval(Tape& tape, const TapedMlp& net, NodeId coords_normalized);

/// Forward pass at physical coordinates, untracked input.
NodeId siren_eval_at(Tape& tape, const TapedMlp& net, const Tensor& coords, const InputBox& box);

/// Evaluate on a grid; returns an (m, m) node, row i = y, column j = x.
NodeId siren_eval_grid(Tape& tape, const TapedMlp& net, const GridSpec& grid, const InputBox& box);

Tensor grid_coords(const GridSpec& grid);

/// Value and first/second derivatives along one physical input axis,
/// propagated forward through the network while every component stays
/// on the reverse tape.
struct JetNodes {
    NodeId value = -1;
    NodeId d1 = -1;
    NodeId d2 = -1;
};

JetNodes siren_jet2_eval(Tape& tape, const TapedMlp& net, const Tensor& coords, int axis,
                         const InputBox& box);

/// Plain (untaped) evaluation convenience.
Tensor siren_forward(const MlpParams& params, const Tensor& coords, const InputBox& box);

}  // namespace wavedp
