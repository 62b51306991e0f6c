#include "wavedp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>

namespace wavedp {

namespace {

// Asymptotic-branch rational coefficients from the classical Cephes j0.
constexpr double PP[7] = {
    7.96936729297347051624e-4, 8.28352392107440799803e-2, 1.23953371646414299388e0,
    5.44725003058768775090e0, 8.74716500199817011941e0, 5.30324038235394892183e0,
    9.99999999999999997821e-1,
};
constexpr double PQ[7] = {
    9.24408810558863637013e-4, 8.56288474354474431428e-2, 1.25352743901058953537e0,
    5.47097740330417105182e0, 8.76190883237069594232e0, 5.30605288235394617618e0,
    1.00000000000000000218e0,
};
constexpr double QP[8] = {
    -1.13663838898469149931e-2, -1.28252718670509318512e0, -1.95539544257735972385e1,
    -9.32060152123768231369e1, -1.77681167980488790968e2, -1.47077505154951170175e2,
    -5.14105326766599330220e1, -6.05014350600728481186e0,
};
constexpr double QQ[7] = {
    6.43178256118178023184e1, 8.56430025976980587198e2, 3.88240183605401609683e3,
    7.24046774195652478189e3, 5.93072701187316984827e3, 2.06209331660327847417e3,
    2.42005740240291393179e2,
};

constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
constexpr double kPiOver4 = 0.78539816339744830962;

double polevl(double x, const double* c, int n) {
    double r = c[0];
    for (int i = 1; i <= n; ++i) r = r * x + c[i];
    return r;
}

double p1evl(double x, const double* c, int n) {
    double r = x + c[0];
    for (int i = 1; i < n; ++i) r = r * x + c[i];
    return r;
}

// Kronrod-15 abscissae/weights with the embedded 7-point Gauss rule.
constexpr double XGK[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr double WGK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
constexpr double WG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

struct PanelResult {
    double integral;
    double error;
};

PanelResult gk15_panel(double (*f)(double, const void*), const void* ctx, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double fv[15];
    for (int k = 0; k < 7; ++k) {
        fv[k] = f(center - half * XGK[k], ctx);
        fv[14 - k] = f(center + half * XGK[k], ctx);
    }
    fv[7] = f(center, ctx);

    double kron = WGK[7] * fv[7];
    double gauss = WG[3] * fv[7];
    for (int k = 0; k < 7; ++k) kron += WGK[k] * (fv[k] + fv[14 - k]);
    for (int k = 0; k < 3; ++k) gauss += WG[k] * (fv[2 * k + 1] + fv[13 - 2 * k]);
    kron *= half;
    gauss *= half;
    return {kron, std::abs(kron - gauss)};
}

struct Interval {
    double a, b, integral, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

struct PulseIntegrand {
    double sigma, r, t;
};

double pulse_integrand(double xi, const void* ctx) {
    const auto* p = static_cast<const PulseIntegrand*>(ctx);
    const double e = xi * p->sigma;
    return std::exp(-0.5 * e * e) * std::cos(xi * p->t) * bessel_j0(xi * p->r) * xi;
}

}  // namespace

double bessel_j0(double x) {
    x = std::abs(x);
    if (x < 8.0) {
        // ascending series sum_k (-1)^k (x^2/4)^k / (k!)^2; the largest term
        // below x=8 is ~1e2, keeping cancellation error near 1e-14
        const double q = 0.25 * x * x;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 60; ++k) {
            term *= -q / (static_cast<double>(k) * static_cast<double>(k));
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
        }
        return sum;
    }
    const double w = 5.0 / x;
    const double z = w * w;
    const double p = polevl(z, PP, 6) / polevl(z, PQ, 6);
    const double q = polevl(z, QP, 7) / p1evl(z, QQ, 7);
    const double xn = x - kPiOver4;
    return (p * std::cos(xn) - w * q * std::sin(xn)) * kSqrt2OverPi / std::sqrt(x);
}

double integrate_gk15(double (*f)(double, const void*), const void* ctx, double a, double b,
                      const QuadratureControl& ctrl) {
    std::priority_queue<Interval> heap;
    PanelResult first = gk15_panel(f, ctx, a, b);
    heap.push({a, b, first.integral, first.error});
    double total = first.integral;
    double total_err = first.error;
    int panels = 1;

    while (total_err > ctrl.abs_tol) {
        if (panels >= ctrl.max_intervals)
            throw QuadratureError("integrate_gk15: tolerance not reached after " +
                                      std::to_string(panels) + " panels",
                                  total, total_err);
        Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        PanelResult left = gk15_panel(f, ctx, worst.a, mid);
        PanelResult right = gk15_panel(f, ctx, mid, worst.b);
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.integral, left.error});
        heap.push({mid, worst.b, right.integral, right.error});
        ++panels;
    }
    return total;
}

double gaussian_pulse_pressure(const GaussianPulse& pulse, double r, double t,
                               const QuadratureControl& ctrl) {
    if (t < 0.0) throw std::invalid_argument("gaussian_pulse_pressure: t must be >= 0");
    PulseIntegrand ctx{pulse.sigma, r, t};
    const double xi_max = 12.0 / pulse.sigma;
    const double integral = integrate_gk15(&pulse_integrand, &ctx, 0.0, xi_max, ctrl);
    return pulse.amplitude * pulse.sigma * pulse.sigma * integral;
}

std::vector<double> gaussian_pulse_field(const GaussianPulse& pulse,
                                         std::span<const SpaceTimePoint> points,
                                         const QuadratureControl& ctrl) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        const double r = std::hypot(p.x - pulse.x0, p.y - pulse.y0);
        out.push_back(gaussian_pulse_pressure(pulse, r, p.t, ctrl));
    }
    return out;
}

std::vector<double> superpose(std::span<const GaussianPulse> pulses,
                              std::span<const SpaceTimePoint> points,
                              const QuadratureControl& ctrl) {
    std::vector<double> out(points.size(), 0.0);
    for (const auto& pulse : pulses) {
        std::vector<double> one = gaussian_pulse_field(pulse, points, ctrl);
        for (size_t i = 0; i < out.size(); ++i) out[i] += one[i];
    }
    return out;
}

RadialPulseProfile::RadialPulseProfile(double sigma, double t, double r_max,
                                       const QuadratureControl& ctrl) {
    const int n = std::max<int>(512, static_cast<int>(std::ceil(r_max * 24.0 / sigma)) + 4);
    dr_ = r_max / static_cast<double>(n - 1);
    samples_.resize(static_cast<size_t>(n));
    GaussianPulse unit{0.0, 0.0, 1.0, sigma};
    for (int i = 0; i < n; ++i)
        samples_[static_cast<size_t>(i)] = gaussian_pulse_pressure(unit, i * dr_, t, ctrl);
}

double RadialPulseProfile::operator()(double r) const {
    const int n = static_cast<int>(samples_.size());
    const double u = std::abs(r) / dr_;
    int i = static_cast<int>(u);
    if (i >= n - 1) return samples_.back();
    const double f = u - i;
    // Catmull-Rom with even reflection at r=0 (the profile is radial)
    const double p1 = samples_[static_cast<size_t>(i)];
    const double p2 = samples_[static_cast<size_t>(i + 1)];
    const double p0 = (i > 0) ? samples_[static_cast<size_t>(i - 1)] : samples_[1];
    const double p3 = (i + 2 < n) ? samples_[static_cast<size_t>(i + 2)] : samples_.back();
    const double a = 2.0 * p1;
    const double b = p2 - p0;
    const double c = 2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3;
    const double d = -p0 + 3.0 * p1 - 3.0 * p2 + p3;
    return 0.5 * (a + b * f + c * f * f + d * f * f * f);
}

Tensor gaussian_field_grid(std::span<const GaussianPulse> pulses, const GridSpec& grid, double t,
                           const QuadratureControl& ctrl) {
    Tensor out({grid.m, grid.m});
    for (const auto& pulse : pulses) {
        double r_max = 0.0;
        const double xs[2] = {grid.x(0), grid.x(grid.m - 1)};
        const double ys[2] = {grid.y(0), grid.y(grid.m - 1)};
        for (double cx : xs)
            for (double cy : ys)
                r_max = std::max(r_max, std::hypot(cx - pulse.x0, cy - pulse.y0));
        RadialPulseProfile profile(pulse.sigma, t, r_max + 4.0 * pulse.sigma, ctrl);
        for (int64_t i = 0; i < grid.m; ++i) {
            const double y = grid.y(i);
            for (int64_t j = 0; j < grid.m; ++j) {
                const double r = std::hypot(grid.x(j) - pulse.x0, y - pulse.y0);
                out.at(i, j) += pulse.amplitude * profile(r);
            }
        }
    }
    return out;
}

std::array<Point2, 4> trapezoid_corners() {
    return {{{0.3, 0.3}, {0.3, 0.7}, {0.7, 0.45}, {0.7, 0.3}}};
}

Point2 polygon_centroid(std::span<const Point2> poly) {
    double a2 = 0.0, cx = 0.0, cy = 0.0;
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Point2& p = poly[i];
        const Point2& q = poly[(i + 1) % n];
        const double cross = p[0] * q[1] - q[0] * p[1];
        a2 += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

bool point_in_polygon(const Point2& p, std::span<const Point2> poly) {
    // convex polygon: all edge cross products share a sign
    const size_t n = poly.size();
    bool has_pos = false, has_neg = false;
    for (size_t i = 0; i < n; ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % n];
        const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        if (cross > 0) has_pos = true;
        if (cross < 0) has_neg = true;
    }
    return !(has_pos && has_neg);
}

std::vector<Point2> image_sources_trapezoid(const Point2& source,
                                            const std::array<Point2, 4>& corners) {
    if (!point_in_polygon(source, corners))
        throw std::invalid_argument("image_sources_trapezoid: source outside the room");

    struct Wall {
        Point2 a, b;
        double dist;
    };
    std::vector<Wall> walls;
    for (size_t i = 0; i < 4; ++i) {
        const Point2& a = corners[i];
        const Point2& b = corners[(i + 1) % 4];
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        const double len = std::hypot(ex, ey);
        const double d = std::abs(ex * (source[1] - a[1]) - ey * (source[0] - a[0])) / len;
        walls.push_back({a, b, d});
    }
    std::sort(walls.begin(), walls.end(),
              [](const Wall& l, const Wall& r) { return l.dist < r.dist; });

    std::vector<Point2> out{source};
    for (size_t k = 0; k < 3; ++k) {  // direct sound plus three first-order reflections
        const Wall& w = walls[k];
        const double ex = w.b[0] - w.a[0], ey = w.b[1] - w.a[1];
        const double len2 = ex * ex + ey * ey;
        const double s = ((source[0] - w.a[0]) * ex + (source[1] - w.a[1]) * ey) / len2;
        const double fx = w.a[0] + s * ex, fy = w.a[1] + s * ey;  // foot on the wall line
        out.push_back({2.0 * fx - source[0], 2.0 * fy - source[1]});
    }
    return out;
}

Tensor ring_initial(const Point2& center, double radius, double sigma, const GridSpec& grid) {
    if (radius <= 0.0) throw std::invalid_argument("ring_initial: radius must be positive");
    Tensor out({grid.m, grid.m});
    for (int64_t i = 0; i < grid.m; ++i)
        for (int64_t j = 0; j < grid.m; ++j) {
            const double d = std::hypot(grid.x(j) - center[0], grid.y(i) - center[1]) - radius;
            out.at(i, j) = std::exp(-0.5 * d * d / (sigma * sigma));
        }
    return out;
}

std::vector<GaussianPulse> scene_pulses(const SceneSpec& spec, double extent) {
    if (!spec.pulses.empty()) return spec.pulses;
    switch (spec.kind) {
        case SceneKind::SinglePulse:
            return {GaussianPulse{0.5 * extent, 0.5 * extent, 1.0, spec.pulse_sigma}};
        case SceneKind::MultiPulse: {
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> pos(0.3 * extent, 0.7 * extent);
            std::uniform_real_distribution<double> amp(-1.0, 1.0);
            std::vector<GaussianPulse> out;
            for (int k = 0; k < spec.pulse_count; ++k) {
                const double x = pos(rng), y = pos(rng), a = amp(rng);
                out.push_back({x, y, a, spec.pulse_sigma});
            }
            return out;
        }
        case SceneKind::TrapezoidReverb: {
            const auto corners = trapezoid_corners();
            const Point2 src = spec.trapezoid_source.value_or(polygon_centroid(corners));
            std::vector<GaussianPulse> out;
            for (const Point2& c : image_sources_trapezoid(src, corners))
                out.push_back({c[0], c[1], 1.0, spec.pulse_sigma});
            return out;
        }
        case SceneKind::Ring:
            throw std::logic_error("scene_pulses: ring scene has no pulse decomposition");
    }
    throw std::logic_error("scene_pulses: unknown scene kind");
}

SensorSet sample_sensors(int count, const SensorRegion& region, double min_dist,
                         const GridSpec& grid, uint64_t seed) {
    if (count <= 0) throw std::invalid_argument("sample_sensors: count must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int64_t> pick(0, grid.m - 1);

    const double lo = region.lo * grid.extent();
    const double hi = region.hi * grid.extent();

    SensorSet set;
    std::vector<Point2> placed;
    int64_t rejections = 0;
    while (static_cast<int>(placed.size()) < count) {
        if (rejections >= 100000)
            throw std::runtime_error("sample_sensors: packing infeasible after 1e5 rejections");
        const int64_t i = pick(rng), j = pick(rng);
        const double x = grid.x(j), y = grid.y(i);
        bool ok = x >= lo && x <= hi && y >= lo && y <= hi;
        if (ok && region.polygon)
            ok = point_in_polygon({x, y}, std::span<const Point2>(*region.polygon));
        for (size_t k = 0; ok && k < placed.size(); ++k)
            ok = std::hypot(x - placed[k][0], y - placed[k][1]) >= min_dist;
        if (!ok) {
            ++rejections;
            continue;
        }
        rejections = 0;
        placed.push_back({x, y});
        set.indices.push_back({i, j});
    }
    return set;
}

Measurements add_noise(const Measurements& clean, double snr_db, uint64_t seed) {
    if (std::isnan(snr_db)) throw std::invalid_argument("add_noise: snr_db must not be NaN");
    if (std::isinf(snr_db) && snr_db > 0) return clean;

    double power = 0.0;
    for (int64_t i = 0; i < clean.values.size(); ++i)
        power += clean.values[i] * clean.values[i];
    power /= static_cast<double>(clean.values.size());
    if (power <= 0.0) throw std::invalid_argument("add_noise: clean signal has zero power");

    const double sigma_n = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma_n);

    Measurements out = clean;
    for (int64_t i = 0; i < out.values.size(); ++i) out.values[i] += noise(rng);
    out.snr_db = snr_db;
    return out;
}

}  // namespace wavedp
