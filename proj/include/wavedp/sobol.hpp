#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wavedp/tensor.hpp"

namespace wavedp {

/// Gray-code Sobol sequence in up to 3 dimensions, 52-bit precision.
/// The degenerate all-zeros first point is skipped.
class SobolSequence {
public:
    explicit SobolSequence(int dims);

    /// Next point in [0,1)^dims.
    void next(std::span<double> point);

    /// Next `count` points affinely mapped to [lo, hi] per axis, as (count, dims).
    Tensor next_batch(int64_t count, std::span<const double> lo, std::span<const double> hi);

    uint64_t index() const { return n_; }

private:
    int dims_;
    uint64_t n_ = 0;
    std::vector<std::array<uint64_t, 52>> v_;  // direction integers per dim
    std::vector<uint64_t> x_;
};

/// Points on the boundary of [0,L]^2 x [0,T] with outward unit normals.
struct BoundaryBatch {
    Tensor coords;   // (B, 3): x, y, t
    Tensor normals;  // (B, 2)
};

BoundaryBatch boundary_collocation(int64_t count, double extent, double duration,
                                   SobolSequence& stream);

}  // namespace wavedp
