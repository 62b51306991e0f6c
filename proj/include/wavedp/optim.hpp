#pragma once

#include <span>
#include <string>
#include <vector>

#include "wavedp/tensor.hpp"

namespace wavedp {

struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    static AdamState create(std::span<const Tensor> params, double lr);
};

/// In-place bias-corrected update; throws on non-finite gradients.
void adam_step(std::span<Tensor*> params, std::span<const Tensor* const> grads, AdamState& state);

enum class AnnealNumerator {
    SumOverOwn,        // lambda_i <- sum_j ||g_j|| / ||g_i||, every term updated
    ReferenceOverOwn,  // lambda_i <- ||g_ref|| / ||g_i||, reference pinned
};

struct AnnealConfig {
    double alpha = 0.9;
    int update_every = 100;
    AnnealNumerator numerator = AnnealNumerator::SumOverOwn;
    int reference_term = 0;  // used by ReferenceOverOwn
};

struct AnnealReport {
    std::vector<int> skipped;  // terms with vanishing gradient norm
};

/// Moving-average update of the loss weights from per-term gradient norms.
AnnealReport anneal_update(std::span<const double> grad_norms, std::span<double> lambdas,
                           const AnnealConfig& cfg);

double l2_norm(std::span<const Tensor* const> tensors);

}  // namespace wavedp
