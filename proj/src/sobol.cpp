#include "wavedp/sobol.hpp"

#include <array>
#include <bit>
#include <stdexcept>

namespace wavedp {

namespace {

constexpr int kBits = 52;
constexpr double kScale = 1.0 / 4503599627370496.0;  // 2^-52

// Primitive-polynomial data (degree, coefficient bits, initial m values)
// for the second and third dimensions; the first is the van der Corput
// radical inverse.
struct DimSpec {
    int degree;
    uint32_t coeffs;  // bits a_1..a_{s-1}
    std::array<uint64_t, 2> m_init;
};

constexpr DimSpec kDims[2] = {
    {1, 0, {1, 0}},
    {2, 1, {1, 3}},
};

std::array<uint64_t, 52> directions_for(int dim) {
    std::array<uint64_t, 52> m{};
    if (dim == 0) {
        for (int k = 0; k < kBits; ++k) m[static_cast<size_t>(k)] = 1;
    } else {
        const DimSpec& spec = kDims[dim - 1];
        const int s = spec.degree;
        for (int k = 0; k < s; ++k) m[static_cast<size_t>(k)] = spec.m_init[static_cast<size_t>(k)];
        for (int k = s; k < kBits; ++k) {
            uint64_t val = m[static_cast<size_t>(k - s)] ^ (m[static_cast<size_t>(k - s)] << s);
            for (int j = 1; j < s; ++j)
                if ((spec.coeffs >> (s - 1 - j)) & 1u)
                    val ^= m[static_cast<size_t>(k - j)] << j;
            m[static_cast<size_t>(k)] = val;
        }
    }
    std::array<uint64_t, 52> v{};
    for (int k = 0; k < kBits; ++k)
        v[static_cast<size_t>(k)] = m[static_cast<size_t>(k)] << (kBits - 1 - k);
    return v;
}

}  // namespace

SobolSequence::SobolSequence(int dims) : dims_(dims), x_(static_cast<size_t>(dims), 0) {
    if (dims < 1 || dims > 3)
        throw std::invalid_argument("SobolSequence: dims must be 1..3");
    for (int d = 0; d < dims; ++d) v_.push_back(directions_for(d));
}

void SobolSequence::next(std::span<double> point) {
    if (static_cast<int>(point.size()) != dims_)
        throw std::invalid_argument("SobolSequence::next: wrong point dimension");
    // advance past index 0 so the first emitted point is (0.5, ...)
    n_ += 1;
    const int c = std::countr_zero(n_);
    for (int d = 0; d < dims_; ++d) {
        x_[static_cast<size_t>(d)] ^= v_[static_cast<size_t>(d)][static_cast<size_t>(c)];
        point[static_cast<size_t>(d)] = static_cast<double>(x_[static_cast<size_t>(d)]) * kScale;
    }
}

Tensor SobolSequence::next_batch(int64_t count, std::span<const double> lo,
                                 std::span<const double> hi) {
    Tensor out({count, dims_});
    std::array<double, 3> u{};
    for (int64_t i = 0; i < count; ++i) {
        next(std::span<double>(u.data(), static_cast<size_t>(dims_)));
        for (int d = 0; d < dims_; ++d)
            out[i * dims_ + d] =
                lo[static_cast<size_t>(d)] +
                u[static_cast<size_t>(d)] * (hi[static_cast<size_t>(d)] - lo[static_cast<size_t>(d)]);
    }
    return out;
}

BoundaryBatch boundary_collocation(int64_t count, double extent, double duration,
                                   SobolSequence& stream) {
    BoundaryBatch out;
    out.coords = Tensor({count, 3});
    out.normals = Tensor({count, 2});
    std::array<double, 3> u{};
    for (int64_t i = 0; i < count; ++i) {
        stream.next(u);
        const int edge = std::min(3, static_cast<int>(u[0] * 4.0));
        const double pos = u[1] * extent;
        const double t = u[2] * duration;
        double x, y, nx, ny;
        switch (edge) {
            case 0: x = 0.0; y = pos; nx = -1.0; ny = 0.0; break;   // left
            case 1: x = extent; y = pos; nx = 1.0; ny = 0.0; break; // right
            case 2: x = pos; y = 0.0; nx = 0.0; ny = -1.0; break;   // bottom
            default: x = pos; y = extent; nx = 0.0; ny = 1.0; break;
        }
        out.coords[i * 3 + 0] = x;
        out.coords[i * 3 + 1] = y;
        out.coords[i * 3 + 2] = t;
        out.normals[i * 2 + 0] = nx;
        out.normals[i * 2 + 1] = ny;
    }
    return out;
}

}  // namespace wavedp
