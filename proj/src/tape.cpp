#include "wavedp/tape.hpp"

#include <Eigen/Dense>

#include <algorithm>

#include "wavedp/fastmath.hpp"

namespace wavedp {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<EMat>;
using MapC = Eigen::Map<const EMat>;

MapC mat_view(const Tensor& t) { return MapC(t.data(), t.rows(), t.cols()); }
MapM mat_view(Tensor& t) { return MapM(t.data(), t.rows(), t.cols()); }

// Detects NaN/Inf in one pass: any non-finite value poisons the sum.
bool finite_scan(const Tensor& t) {
    double acc = 0.0;
    const double* p = t.data();
    for (int64_t i = 0; i < t.size(); ++i) acc += p[i];
    return std::isfinite(acc);
}

void add_scaled(Tensor& dst, const Tensor& src, double k) {
    double* __restrict d = dst.data();
    const double* __restrict s = src.data();
    for (int64_t i = 0; i < dst.size(); ++i) d[i] += k * s[i];
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw TapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

int64_t square_side(const Tensor& t, const char* op) {
    if (t.rank() != 2 || t.rows() != t.cols())
        throw TapeError(std::string(op) + ": expected square matrix, got " + t.shape_str());
    if (t.rows() < 3)
        throw TapeError(std::string(op) + ": grid side must be >= 3, got " + t.shape_str());
    return t.rows();
}

}  // namespace

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::Leaf: return "leaf";
        case OpKind::Constant: return "constant";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Mul: return "mul";
        case OpKind::Scale: return "scale";
        case OpKind::MatMul: return "matmul";
        case OpKind::AddRowVec: return "add_rowvec";
        case OpKind::Sin: return "sin";
        case OpKind::Cos: return "cos";
        case OpKind::Abs: return "abs";
        case OpKind::Sum: return "sum";
        case OpKind::Mean: return "mean";
        case OpKind::SqL2: return "squared_l2";
        case OpKind::Gather: return "gather";
        case OpKind::Scatter: return "scatter";
        case OpKind::Laplacian: return "laplacian5";
        case OpKind::LaplacianNeumann: return "laplacian5_neumann";
        case OpKind::Concat: return "concat";
        case OpKind::Reshape: return "reshape";
    }
    return "?";
}

NodeId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_exists(NodeId id, const char* op) const {
    if (id < 0 || static_cast<size_t>(id) >= nodes_.size())
        throw TapeError(std::string(op) + ": input node " + std::to_string(id) + " not on tape");
}

NodeId Tape::variable(Tensor v) {
    Node n;
    n.op = OpKind::Leaf;
    n.value = std::move(v);
    n.needs_grad = true;
    return push(std::move(n));
}

NodeId Tape::constant(Tensor v) {
    Node n;
    n.op = OpKind::Constant;
    n.value = std::move(v);
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    check_exists(a, "add");
    check_exists(b, "add");
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (!va.same_shape(vb)) shape_error("add", va, vb);
    Node n;
    n.op = OpKind::Add;
    n.in = {a, b};
    n.needs_grad = tracked(a) || tracked(b);
    n.value = Tensor::uninitialized(va.shape());
    double* __restrict out = n.value.data();
    const double* __restrict pa = va.data();
    const double* __restrict pb = vb.data();
    for (int64_t i = 0; i < va.size(); ++i) out[i] = pa[i] + pb[i];
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    check_exists(a, "sub");
    check_exists(b, "sub");
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (!va.same_shape(vb)) shape_error("sub", va, vb);
    Node n;
    n.op = OpKind::Sub;
    n.in = {a, b};
    n.needs_grad = tracked(a) || tracked(b);
    n.value = Tensor::uninitialized(va.shape());
    double* __restrict out = n.value.data();
    const double* __restrict pa = va.data();
    const double* __restrict pb = vb.data();
    for (int64_t i = 0; i < va.size(); ++i) out[i] = pa[i] - pb[i];
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    check_exists(a, "mul");
    check_exists(b, "mul");
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (!va.same_shape(vb)) shape_error("mul", va, vb);
    Node n;
    n.op = OpKind::Mul;
    n.in = {a, b};
    n.needs_grad = tracked(a) || tracked(b);
    n.value = Tensor::uninitialized(va.shape());
    double* __restrict out = n.value.data();
    const double* __restrict pa = va.data();
    const double* __restrict pb = vb.data();
    for (int64_t i = 0; i < va.size(); ++i) out[i] = pa[i] * pb[i];
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
    check_exists(a, "scale");
    const Tensor& va = value(a);
    Node n;
    n.op = OpKind::Scale;
    n.in = {a, -1};
    n.scalar = s;
    n.needs_grad = tracked(a);
    n.value = Tensor::uninitialized(va.shape());
    double* __restrict out = n.value.data();
    const double* __restrict pa = va.data();
    for (int64_t i = 0; i < va.size(); ++i) out[i] = s * pa[i];
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    check_exists(a, "matmul");
    check_exists(b, "matmul");
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (va.rank() != 2 || vb.rank() != 2 || va.cols() != vb.rows())
        shape_error("matmul", va, vb);
    Node n;
    n.op = OpKind::MatMul;
    n.in = {a, b};
    n.needs_grad = tracked(a) || tracked(b);
    n.value = Tensor::uninitialized({va.rows(), vb.cols()});
    mat_view(n.value).noalias() = mat_view(va) * mat_view(vb);
    return push(std::move(n));
}

NodeId Tape::add_rowvec(NodeId mat, NodeId vec) {
    check_exists(mat, "add_rowvec");
    check_exists(vec, "add_rowvec");
    const Tensor& vm = value(mat);
    const Tensor& vv = value(vec);
    if (vm.rank() != 2 || vv.rank() != 1 || vm.cols() != vv.shape()[0])
        shape_error("add_rowvec", vm, vv);
    Node n;
    n.op = OpKind::AddRowVec;
    n.in = {mat, vec};
    n.needs_grad = tracked(mat) || tracked(vec);
    n.value = Tensor::uninitialized(vm.shape());
    const int64_t rows = vm.rows(), cols = vm.cols();
    double* __restrict out = n.value.data();
    const double* __restrict pm = vm.data();
    const double* __restrict pv = vv.data();
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t j = 0; j < cols; ++j) out[i * cols + j] = pm[i * cols + j] + pv[j];
    return push(std::move(n));
}

NodeId Tape::sin(NodeId a) {
    check_exists(a, "sin");
    const Tensor& va = value(a);
    Node n;
    n.op = OpKind::Sin;
    n.in = {a, -1};
    n.needs_grad = tracked(a);
    n.value = Tensor::uninitialized(va.shape());
    n.saved = Tensor::uninitialized(va.shape());  // cos, for the adjoint
    double* __restrict s = n.value.data();
    double* __restrict c = n.saved.data();
    const double* __restrict pa = va.data();
    for (int64_t i = 0; i < va.size(); ++i) fast_sincos(pa[i], &s[i], &c[i]);
    return push(std::move(n));
}

NodeId Tape::cos(NodeId a) {
    check_exists(a, "cos");
    const Tensor& va = value(a);
    Node n;
    n.op = OpKind::Cos;
    n.in = {a, -1};
    n.needs_grad = tracked(a);
    n.value = Tensor::uninitialized(va.shape());
    n.saved = Tensor::uninitialized(va.shape());  // sin, for the adjoint
    double* __restrict c = n.value.data();
    double* __restrict s = n.saved.data();
    const double* __restrict pa = va.data();
    for (int64_t i = 0; i < va.size(); ++i) fast_sincos(pa[i], &s[i], &c[i]);
    return push(std::move(n));
}

NodeId Tape::abs(NodeId a) {
    check_exists(a, "abs");
    const Tensor& va = value(a);
    Node n;
    n.op = OpKind::Abs;
    n.in = {a, -1};
    n.needs_grad = tracked(a);
    n.value = Tensor::uninitialized(va.shape());
    double* __restrict out = n.value.data();
    const double* __restrict pa = va.data();
    for (int64_t i = 0; i < va.size(); ++i) out[i] = std::abs(pa[i]);
    return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
    check_exists(a, "sum");
    const Tensor& va = value(a);
    double acc = 0.0;
    for (int64_t i = 0; i < va.size(); ++i) acc += va[i];
    Node n;
    n.op = OpKind::Sum;
    n.in = {a, -1};
    n.needs_grad = tracked(a);
    n.value = Tensor::scalar(acc);
    return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
    check_exists(a, "mean");
    const Tensor& va = value(a);
    if (va.size() == 0) throw TapeError("mean: empty tensor");
    double acc = 0.0;
    for (int64_t i = 0; i < va.size(); ++i) acc += va[i];
    Node n;
    n.op = OpKind::Mean;
    n.in = {a, -1};
    n.needs_grad = tracked(a);
    n.value = Tensor::scalar(acc / static_cast<double>(va.size()));
    return push(std::move(n));
}

NodeId Tape::squared_l2(NodeId a) {
    check_exists(a, "squared_l2");
    const Tensor& va = value(a);
    double acc = 0.0;
    for (int64_t i = 0; i < va.size(); ++i) acc += va[i] * va[i];
    Node n;
    n.op = OpKind::SqL2;
    n.in = {a, -1};
    n.needs_grad = tracked(a);
    n.value = Tensor::scalar(acc);
    return push(std::move(n));
}

NodeId Tape::gather(NodeId a, IndexList idx) {
    check_exists(a, "gather");
    const Tensor& va = value(a);
    for (int64_t k : *idx)
        if (k < 0 || k >= va.size())
            throw TapeError("gather: index " + std::to_string(k) + " out of range for " +
                            va.shape_str());
    Node n;
    n.op = OpKind::Gather;
    n.in = {a, -1};
    n.idx = std::move(idx);
    n.needs_grad = tracked(a);
    n.value = Tensor::uninitialized({static_cast<int64_t>(n.idx->size())});
    for (size_t k = 0; k < n.idx->size(); ++k) n.value[static_cast<int64_t>(k)] = va[(*n.idx)[k]];
    return push(std::move(n));
}

NodeId Tape::scatter(NodeId a, IndexList idx, std::vector<int64_t> out_shape) {
    check_exists(a, "scatter");
    const Tensor& va = value(a);
    if (va.size() != static_cast<int64_t>(idx->size()))
        throw TapeError("scatter: value count " + std::to_string(va.size()) +
                        " != index count " + std::to_string(idx->size()));
    Node n;
    n.op = OpKind::Scatter;
    n.in = {a, -1};
    n.idx = std::move(idx);
    n.needs_grad = tracked(a);
    n.value = Tensor(std::move(out_shape));
    for (size_t k = 0; k < n.idx->size(); ++k) {
        int64_t dst = (*n.idx)[k];
        if (dst < 0 || dst >= n.value.size())
            throw TapeError("scatter: index " + std::to_string(dst) + " out of range for " +
                            n.value.shape_str());
        n.value[dst] += va[static_cast<int64_t>(k)];
    }
    return push(std::move(n));
}

NodeId Tape::laplacian5(NodeId a) {
    check_exists(a, "laplacian5");
    const Tensor& va = value(a);
    const int64_t m = square_side(va, "laplacian5");
    Node n;
    n.op = OpKind::Laplacian;
    n.in = {a, -1};
    n.needs_grad = tracked(a);
    n.value = Tensor::uninitialized(va.shape());
    const double* __restrict p = va.data();
    double* __restrict out = n.value.data();
    for (int64_t j = 0; j < m; ++j) {
        out[j] = 0.0;
        out[(m - 1) * m + j] = 0.0;
    }
    for (int64_t i = 1; i < m - 1; ++i) {
        out[i * m] = 0.0;
        out[i * m + m - 1] = 0.0;
        for (int64_t j = 1; j < m - 1; ++j)
            out[i * m + j] = p[(i - 1) * m + j] + p[(i + 1) * m + j] + p[i * m + j - 1] +
                             p[i * m + j + 1] - 4.0 * p[i * m + j];
    }
    return push(std::move(n));
}

NodeId Tape::laplacian5_neumann(NodeId a) {
    check_exists(a, "laplacian5_neumann");
    const Tensor& va = value(a);
    const int64_t m = square_side(va, "laplacian5_neumann");
    Node n;
    n.op = OpKind::LaplacianNeumann;
    n.in = {a, -1};
    n.needs_grad = tracked(a);
    n.value = Tensor::uninitialized(va.shape());
    const double* __restrict p = va.data();
    double* __restrict out = n.value.data();
    auto mirror = [m](int64_t k) { return k < 0 ? 1 : (k >= m ? m - 2 : k); };
    for (int64_t i = 0; i < m; ++i) {
        const int64_t iu = mirror(i - 1), id = mirror(i + 1);
        for (int64_t j = 0; j < m; ++j) {
            const int64_t jl = mirror(j - 1), jr = mirror(j + 1);
            out[i * m + j] = p[iu * m + j] + p[id * m + j] + p[i * m + jl] + p[i * m + jr] -
                             4.0 * p[i * m + j];
        }
    }
    return push(std::move(n));
}

NodeId Tape::concat(std::span<const NodeId> parts) {
    if (parts.empty()) throw TapeError("concat: no inputs");
    int64_t total = 0;
    bool any_grad = false;
    for (NodeId id : parts) {
        check_exists(id, "concat");
        total += value(id).size();
        any_grad = any_grad || tracked(id);
    }
    Node n;
    n.op = OpKind::Concat;
    n.multi_in.assign(parts.begin(), parts.end());
    n.needs_grad = any_grad;
    n.value = Tensor::uninitialized({total});
    int64_t off = 0;
    for (NodeId id : parts) {
        const Tensor& v = value(id);
        for (int64_t i = 0; i < v.size(); ++i) n.value[off + i] = v[i];
        off += v.size();
    }
    return push(std::move(n));
}

NodeId Tape::reshape(NodeId a, std::vector<int64_t> shape) {
    check_exists(a, "reshape");
    const Tensor& va = value(a);
    int64_t prod = 1;
    for (int64_t d : shape) prod *= d;
    if (prod != va.size())
        throw TapeError("reshape: cannot view " + va.shape_str() + " as requested shape");
    Node n;
    n.op = OpKind::Reshape;
    n.in = {a, -1};
    n.needs_grad = tracked(a);
    n.value = Tensor::uninitialized(std::move(shape));
    std::copy(va.data(), va.data() + va.size(), n.value.data());
    return push(std::move(n));
}

GradientMap Tape::backward(NodeId loss) {
    check_exists(loss, "backward");
    if (consumed_) throw TapeError("backward: tape already consumed; rebuild the forward pass");
    if (value(loss).size() != 1)
        throw TapeError("backward: loss must be scalar, got " + value(loss).shape_str());
    consumed_ = true;

    GradientMap out = run_backward(loss, false);
    for (const auto& [id, grad] : out.grads) {
        if (!finite_scan(grad)) {
            // diagnostic pass pinpoints where the first non-finite adjoint appears
            run_backward(loss, true);
            throw TapeError("backward: non-finite gradient at leaf " + std::to_string(id));
        }
    }
    return out;
}

GradientMap Tape::run_backward(NodeId loss, bool check_each) {
    std::vector<Tensor> adj(nodes_.size());
    std::vector<uint8_t> adj_set(nodes_.size(), 0);
    adj[static_cast<size_t>(loss)] = Tensor::scalar(1.0);
    adj_set[static_cast<size_t>(loss)] = 1;

    for (NodeId id = loss; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        Tensor& g = adj[static_cast<size_t>(id)];
        if (!n.needs_grad || !adj_set[static_cast<size_t>(id)]) continue;
        if (check_each && !finite_scan(g))
            throw TapeError("backward: non-finite adjoint at node " + std::to_string(id) +
                            " (" + op_name(n.op) + ")");

        // zero-filled slot for rules that touch only part of the buffer
        auto adj_of = [&](NodeId p) -> Tensor& {
            Tensor& t = adj[static_cast<size_t>(p)];
            if (!adj_set[static_cast<size_t>(p)]) {
                t = Tensor::zeros(value(p).shape());
                adj_set[static_cast<size_t>(p)] = 1;
            }
            return t;
        };
        // first full-buffer contribution assigns instead of accumulating
        auto fresh = [&](NodeId p) -> bool { return !adj_set[static_cast<size_t>(p)]; };
        auto claim = [&](NodeId p) -> Tensor& {
            Tensor& t = adj[static_cast<size_t>(p)];
            t = Tensor::uninitialized(value(p).shape());
            adj_set[static_cast<size_t>(p)] = 1;
            return t;
        };
        auto wants = [&](NodeId p) { return p >= 0 && tracked(p); };
        auto pass_through = [&](NodeId p, double k) {
            if (fresh(p)) {
                Tensor& t = claim(p);
                double* __restrict d = t.data();
                const double* __restrict s = g.data();
                for (int64_t i = 0; i < t.size(); ++i) d[i] = k * s[i];
            } else {
                add_scaled(adj_of(p), g, k);
            }
        };

        switch (n.op) {
            case OpKind::Leaf:
            case OpKind::Constant:
                break;
            case OpKind::Add:
                if (wants(n.in[0])) pass_through(n.in[0], 1.0);
                if (wants(n.in[1])) pass_through(n.in[1], 1.0);
                break;
            case OpKind::Sub:
                if (wants(n.in[0])) pass_through(n.in[0], 1.0);
                if (wants(n.in[1])) pass_through(n.in[1], -1.0);
                break;
            case OpKind::Mul: {
                const Tensor& va = value(n.in[0]);
                const Tensor& vb = value(n.in[1]);
                const double* __restrict pg = g.data();
                if (wants(n.in[0])) {
                    const bool assign = fresh(n.in[0]);
                    double* __restrict d = (assign ? claim(n.in[0]) : adj_of(n.in[0])).data();
                    const double* __restrict pb = vb.data();
                    if (assign)
                        for (int64_t i = 0; i < g.size(); ++i) d[i] = pg[i] * pb[i];
                    else
                        for (int64_t i = 0; i < g.size(); ++i) d[i] += pg[i] * pb[i];
                }
                if (wants(n.in[1])) {
                    const bool assign = fresh(n.in[1]);
                    double* __restrict d = (assign ? claim(n.in[1]) : adj_of(n.in[1])).data();
                    const double* __restrict pa = va.data();
                    if (assign)
                        for (int64_t i = 0; i < g.size(); ++i) d[i] = pg[i] * pa[i];
                    else
                        for (int64_t i = 0; i < g.size(); ++i) d[i] += pg[i] * pa[i];
                }
                break;
            }
            case OpKind::Scale:
                if (wants(n.in[0])) pass_through(n.in[0], n.scalar);
                break;
            case OpKind::MatMul: {
                const Tensor& va = value(n.in[0]);
                const Tensor& vb = value(n.in[1]);
                if (wants(n.in[0])) {
                    if (fresh(n.in[0]))
                        mat_view(claim(n.in[0])).noalias() =
                            mat_view(g) * mat_view(vb).transpose();
                    else
                        mat_view(adj_of(n.in[0])).noalias() +=
                            mat_view(g) * mat_view(vb).transpose();
                }
                if (wants(n.in[1])) {
                    if (fresh(n.in[1]))
                        mat_view(claim(n.in[1])).noalias() =
                            mat_view(va).transpose() * mat_view(g);
                    else
                        mat_view(adj_of(n.in[1])).noalias() +=
                            mat_view(va).transpose() * mat_view(g);
                }
                break;
            }
            case OpKind::AddRowVec: {
                if (wants(n.in[0])) pass_through(n.in[0], 1.0);
                if (wants(n.in[1])) {
                    Tensor& d = adj_of(n.in[1]);
                    const int64_t rows = g.rows(), cols = g.cols();
                    for (int64_t i = 0; i < rows; ++i)
                        for (int64_t j = 0; j < cols; ++j) d[j] += g[i * cols + j];
                }
                break;
            }
            case OpKind::Sin:
                if (wants(n.in[0])) {
                    const bool assign = fresh(n.in[0]);
                    double* __restrict d = (assign ? claim(n.in[0]) : adj_of(n.in[0])).data();
                    const double* __restrict pg = g.data();
                    const double* __restrict ps = n.saved.data();
                    if (assign)
                        for (int64_t i = 0; i < g.size(); ++i) d[i] = pg[i] * ps[i];
                    else
                        for (int64_t i = 0; i < g.size(); ++i) d[i] += pg[i] * ps[i];
                }
                break;
            case OpKind::Cos:
                if (wants(n.in[0])) {
                    const bool assign = fresh(n.in[0]);
                    double* __restrict d = (assign ? claim(n.in[0]) : adj_of(n.in[0])).data();
                    const double* __restrict pg = g.data();
                    const double* __restrict ps = n.saved.data();
                    if (assign)
                        for (int64_t i = 0; i < g.size(); ++i) d[i] = -pg[i] * ps[i];
                    else
                        for (int64_t i = 0; i < g.size(); ++i) d[i] -= pg[i] * ps[i];
                }
                break;
            case OpKind::Abs:
                if (wants(n.in[0])) {
                    const Tensor& x = value(n.in[0]);
                    Tensor& d = adj_of(n.in[0]);
                    // subgradient convention: sign(0) = 0
                    for (int64_t i = 0; i < g.size(); ++i)
                        d[i] += g[i] * (x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0));
                }
                break;
            case OpKind::Sum:
                if (wants(n.in[0])) {
                    Tensor& d = adj_of(n.in[0]);
                    const double gv = g[0];
                    for (int64_t i = 0; i < d.size(); ++i) d[i] += gv;
                }
                break;
            case OpKind::Mean:
                if (wants(n.in[0])) {
                    Tensor& d = adj_of(n.in[0]);
                    const double gv = g[0] / static_cast<double>(d.size());
                    for (int64_t i = 0; i < d.size(); ++i) d[i] += gv;
                }
                break;
            case OpKind::SqL2:
                if (wants(n.in[0])) {
                    const Tensor& x = value(n.in[0]);
                    Tensor& dt = adj_of(n.in[0]);
                    double* __restrict d = dt.data();
                    const double* __restrict px = x.data();
                    const double gv = 2.0 * g[0];
                    for (int64_t i = 0; i < dt.size(); ++i) d[i] += gv * px[i];
                }
                break;
            case OpKind::Gather:
                if (wants(n.in[0])) {
                    Tensor& d = adj_of(n.in[0]);
                    for (size_t k = 0; k < n.idx->size(); ++k)
                        d[(*n.idx)[k]] += g[static_cast<int64_t>(k)];
                }
                break;
            case OpKind::Scatter:
                if (wants(n.in[0])) {
                    Tensor& d = adj_of(n.in[0]);
                    for (size_t k = 0; k < n.idx->size(); ++k)
                        d[static_cast<int64_t>(k)] += g[(*n.idx)[k]];
                }
                break;
            case OpKind::Laplacian:
                if (wants(n.in[0])) {
                    // transpose stencil: interior-masked input, full symmetric 5-point output
                    Tensor& d = adj_of(n.in[0]);
                    const int64_t m = g.rows();
                    for (int64_t i = 1; i < m - 1; ++i) {
                        for (int64_t j = 1; j < m - 1; ++j) {
                            const double w = g[i * m + j];
                            d[(i - 1) * m + j] += w;
                            d[(i + 1) * m + j] += w;
                            d[i * m + j - 1] += w;
                            d[i * m + j + 1] += w;
                            d[i * m + j] -= 4.0 * w;
                        }
                    }
                }
                break;
            case OpKind::LaplacianNeumann:
                if (wants(n.in[0])) {
                    Tensor& d = adj_of(n.in[0]);
                    const int64_t m = g.rows();
                    auto mirror = [m](int64_t k) { return k < 0 ? 1 : (k >= m ? m - 2 : k); };
                    for (int64_t i = 0; i < m; ++i) {
                        const int64_t iu = mirror(i - 1), idn = mirror(i + 1);
                        for (int64_t j = 0; j < m; ++j) {
                            const int64_t jl = mirror(j - 1), jr = mirror(j + 1);
                            const double w = g[i * m + j];
                            d[iu * m + j] += w;
                            d[idn * m + j] += w;
                            d[i * m + jl] += w;
                            d[i * m + jr] += w;
                            d[i * m + j] -= 4.0 * w;
                        }
                    }
                }
                break;
            case OpKind::Concat: {
                int64_t off = 0;
                for (NodeId p : n.multi_in) {
                    const int64_t sz = value(p).size();
                    if (wants(p)) {
                        Tensor& d = adj_of(p);
                        for (int64_t i = 0; i < sz; ++i) d[i] += g[off + i];
                    }
                    off += sz;
                }
                break;
            }
            case OpKind::Reshape:
                if (wants(n.in[0])) pass_through(n.in[0], 1.0);
                break;
        }
    }

    GradientMap out;
    for (NodeId id = 0; id <= loss; ++id) {
        const Node& n = nodes_[static_cast<size_t>(id)];
        if (n.op != OpKind::Leaf) continue;
        Tensor& g = adj[static_cast<size_t>(id)];
        if (!adj_set[static_cast<size_t>(id)]) g = Tensor::zeros(n.value.shape());
        out.grads.emplace(id, std::move(g));
    }
    return out;
}

}  // namespace wavedp
