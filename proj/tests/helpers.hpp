#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "wavedp/tape.hpp"
#include "wavedp/tensor.hpp"

namespace wavedp::testing {

inline Tensor random_tensor(std::vector<int64_t> shape, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

/// Max relative mismatch between backward() gradients and central finite
/// differences of the rebuilt forward pass.
using LossBuilder = std::function<NodeId(Tape&, const std::vector<NodeId>&)>;

inline double gradcheck(std::vector<Tensor> leaves, const LossBuilder& build, double eps = 1e-6) {
    auto eval = [&](const std::vector<Tensor>& values) {
        Tape tape;
        std::vector<NodeId> ids;
        for (const Tensor& v : values) ids.push_back(tape.variable(v));
        return tape.value(build(tape, ids)).item();
    };

    Tape tape;
    std::vector<NodeId> ids;
    for (const Tensor& v : leaves) ids.push_back(tape.variable(v));
    GradientMap grads = tape.backward(build(tape, ids));

    double worst = 0.0;
    for (size_t k = 0; k < leaves.size(); ++k) {
        const Tensor& g = grads.at(ids[k]);
        for (int64_t i = 0; i < leaves[k].size(); ++i) {
            std::vector<Tensor> pert = leaves;
            pert[k][i] += eps;
            const double up = eval(pert);
            pert[k][i] = leaves[k][i] - eps;
            const double dn = eval(pert);
            const double fd = (up - dn) / (2.0 * eps);
            const double ad = g[i];
            const double denom = std::max({std::abs(fd), std::abs(ad), 1e-7});
            worst = std::max(worst, std::abs(fd - ad) / denom);
        }
    }
    return worst;
}

inline double dot(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double max_abs(const Tensor& a) {
    double m = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

}  // namespace wavedp::testing
