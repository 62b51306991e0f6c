#pragma once

#include <cmath>

namespace wavedp {

/// Scalar truncated Taylor value (f, f', f'') along one direction.
/// Arithmetic follows the Leibniz and Faa di Bruno rules, which is what
/// the tensor-level jet propagation in siren.cpp implements batched;
/// this scalar form doubles as its test oracle.
struct Jet2 {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;

    constexpr Jet2() = default;
    constexpr Jet2(double value) : v(value) {}
    constexpr Jet2(double value, double first, double second) : v(value), d1(first), d2(second) {}

    static constexpr Jet2 seed(double value) { return {value, 1.0, 0.0}; }

    friend constexpr Jet2 operator+(const Jet2& a, const Jet2& b) {
        return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
    }
    friend constexpr Jet2 operator-(const Jet2& a, const Jet2& b) {
        return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
    }
    friend constexpr Jet2 operator-(const Jet2& a) { return {-a.v, -a.d1, -a.d2}; }
    friend constexpr Jet2 operator*(const Jet2& a, const Jet2& b) {
        // (fg)'' = f''g + 2f'g' + fg''
        return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
    }
    friend constexpr Jet2 operator*(double k, const Jet2& a) { return {k * a.v, k * a.d1, k * a.d2}; }
    friend constexpr Jet2 operator*(const Jet2& a, double k) { return k * a; }

    friend Jet2 sin(const Jet2& x) {
        const double s = std::sin(x.v), c = std::cos(x.v);
        // (sin f)'' = cos(f) f'' - sin(f) f'^2
        return {s, c * x.d1, c * x.d2 - s * x.d1 * x.d1};
    }
    friend Jet2 cos(const Jet2& x) {
        const double s = std::sin(x.v), c = std::cos(x.v);
        return {c, -s * x.d1, -s * x.d2 - c * x.d1 * x.d1};
    }
    friend Jet2 abs(const Jet2& x) {
        const double sg = x.v > 0.0 ? 1.0 : (x.v < 0.0 ? -1.0 : 0.0);
        return {std::abs(x.v), sg * x.d1, sg * x.d2};
    }
};

}  // namespace wavedp
