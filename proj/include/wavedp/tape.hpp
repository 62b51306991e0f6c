#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "wavedp/tensor.hpp"

namespace wavedp {

using NodeId = int32_t;
using IndexList = std::shared_ptr<const std::vector<int64_t>>;

/// Reverse-mode gradients keyed by tracked-variable node id.
/// Untracked constants never appear.
struct GradientMap {
    std::unordered_map<NodeId, Tensor> grads;

    const Tensor& at(NodeId id) const { return grads.at(id); }
    bool contains(NodeId id) const { return grads.count(id) > 0; }
};

enum class OpKind : uint8_t {
    Leaf,
    Constant,
    Add,
    Sub,
    Mul,        // elementwise
    Scale,      // by compile-time scalar
    MatMul,
    AddRowVec,  // (B,W) + (W): bias add over rows
    Sin,
    Cos,
    Abs,
    Sum,
    Mean,
    SqL2,       // sum of squares -> scalar
    Gather,     // flat index selection
    Scatter,    // flat index accumulation into a zero tensor
    Laplacian,  // 5-point stencil, zero boundary ring
    LaplacianNeumann,  // 5-point stencil with mirrored ghost values
    Concat,
    Reshape,
};

const char* op_name(OpKind k);

struct TapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tape-based reverse-mode autodiff with eager evaluation. Nodes are
/// appended in topological order; backward() walks them once in reverse
/// and may be called once per forward build.
class Tape {
public:
    /// Tracked leaf: receives a gradient entry in backward().
    NodeId variable(Tensor v);
    /// Untracked input: participates in values only.
    NodeId constant(Tensor v);

    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    NodeId scale(NodeId a, double s);
    NodeId matmul(NodeId a, NodeId b);
    NodeId add_rowvec(NodeId mat, NodeId vec);
    NodeId sin(NodeId a);
    NodeId cos(NodeId a);
    NodeId abs(NodeId a);
    NodeId sum(NodeId a);
    NodeId mean(NodeId a);
    NodeId squared_l2(NodeId a);
    NodeId gather(NodeId a, IndexList idx);
    NodeId scatter(NodeId a, IndexList idx, std::vector<int64_t> out_shape);
    NodeId laplacian5(NodeId a);
    NodeId laplacian5_neumann(NodeId a);
    NodeId concat(std::span<const NodeId> parts);
    NodeId reshape(NodeId a, std::vector<int64_t> shape);

    const Tensor& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].value; }
    bool tracked(NodeId id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }
    size_t size() const { return nodes_.size(); }
    bool consumed() const { return consumed_; }

    /// Propagate adjoints from a scalar loss back to every tracked leaf.
    /// Consumes the tape; build a fresh forward pass for the next call.
    GradientMap backward(NodeId loss);

    /// Drop all nodes, keeping allocations where possible.
    void clear() {
        nodes_.clear();
        consumed_ = false;
    }

private:
    struct Node {
        OpKind op;
        std::array<NodeId, 2> in{-1, -1};
        Tensor value;
        Tensor saved;             // Sin: cos(x); Cos: sin(x)
        IndexList idx;            // Gather/Scatter
        double scalar = 0.0;      // Scale factor
        std::vector<NodeId> multi_in;  // Concat
        bool needs_grad = false;
    };

    GradientMap run_backward(NodeId loss, bool check_each);
    NodeId push(Node n);
    const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
    void check_exists(NodeId id, const char* op) const;

    // deque keeps value() references stable while the tape grows
    std::deque<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace wavedp
