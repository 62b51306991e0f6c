#pragma once

#include <vector>

#include "wavedp/siren.hpp"
#include "wavedp/tape.hpp"

namespace wavedp::internal {

void tune_allocator();

std::vector<const Tensor*> grads_in_order(const GradientMap& map, const TapedMlp& net);

std::vector<Tensor> combine_scaled(const std::vector<const Tensor*>& a, double ka,
                                   const std::vector<const Tensor*>& b, double kb);

}  // namespace wavedp::internal
