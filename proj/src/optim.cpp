#include "wavedp/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace wavedp {

AdamState AdamState::create(std::span<const Tensor> params, double lr) {
    AdamState s;
    s.lr = lr;
    for (const Tensor& p : params) {
        s.m.push_back(Tensor::zeros(p.shape()));
        s.v.push_back(Tensor::zeros(p.shape()));
    }
    return s;
}

void adam_step(std::span<Tensor*> params, std::span<const Tensor* const> grads,
               AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        if (!p.same_shape(g))
            throw std::invalid_argument("adam_step: gradient shape " + g.shape_str() +
                                        " vs parameter " + p.shape_str());
        if (!g.all_finite())
            throw std::runtime_error("adam_step: non-finite gradient in parameter " +
                                     std::to_string(k));
        Tensor& m = state.m[k];
        Tensor& v = state.v[k];
        for (int64_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

AnnealReport anneal_update(std::span<const double> grad_norms, std::span<double> lambdas,
                           const AnnealConfig& cfg) {
    if (grad_norms.size() != lambdas.size())
        throw std::invalid_argument("anneal_update: norm/lambda count mismatch");
    AnnealReport report;
    const size_t n = grad_norms.size();

    double numerator = 0.0;
    if (cfg.numerator == AnnealNumerator::SumOverOwn) {
        for (double g : grad_norms) numerator += g;
    } else {
        const size_t ref = static_cast<size_t>(cfg.reference_term);
        if (ref >= n) throw std::invalid_argument("anneal_update: reference term out of range");
        numerator = grad_norms[ref];
    }

    for (size_t i = 0; i < n; ++i) {
        if (cfg.numerator == AnnealNumerator::ReferenceOverOwn &&
            i == static_cast<size_t>(cfg.reference_term))
            continue;  // reference weight is pinned
        const double own = grad_norms[i];
        if (own <= 0.0 || !std::isfinite(own) || !std::isfinite(numerator) || numerator <= 0.0) {
            report.skipped.push_back(static_cast<int>(i));
            continue;
        }
        const double target = numerator / own;
        lambdas[i] = cfg.alpha * lambdas[i] + (1.0 - cfg.alpha) * target;
    }
    return report;
}

double l2_norm(std::span<const Tensor* const> tensors) {
    double acc = 0.0;
    for (const Tensor* t : tensors)
        for (int64_t i = 0; i < t->size(); ++i) acc += (*t)[i] * (*t)[i];
    return std::sqrt(acc);
}

}  // namespace wavedp
