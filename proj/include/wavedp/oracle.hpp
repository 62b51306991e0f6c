#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wavedp/fdtd.hpp"
#include "wavedp/tensor.hpp"

namespace wavedp {

/// Bessel function of the first kind, order zero. Power series below
/// |x| = 8, asymptotic rational expansion above; absolute error ~1e-13.
double bessel_j0(double x);

struct QuadratureControl {
    double abs_tol = 1e-9;
    int max_intervals = 4000;
};

struct QuadratureError : std::runtime_error {
    double estimate;
    double error_bound;
    QuadratureError(const std::string& msg, double est, double err)
        : std::runtime_error(msg), estimate(est), error_bound(err) {}
};

/// Adaptive Gauss-Kronrod 7/15 integration of f over [a, b].
double integrate_gk15(double (*f)(double, const void*), const void* ctx, double a, double b,
                      const QuadratureControl& ctrl);

struct GaussianPulse {
    double x0 = 0.5;
    double y0 = 0.5;
    double amplitude = 1.0;
    double sigma = 0.02;
};

/// Free-field pressure at distance r and time t radiated by a unit-speed
/// medium from a Gaussian initial condition, via the Hankel-cosine
/// integral truncated at xi = 12/sigma.
double gaussian_pulse_pressure(const GaussianPulse& pulse, double r, double t,
                               const QuadratureControl& ctrl = {});

struct SpaceTimePoint {
    double x, y, t;
};

std::vector<double> gaussian_pulse_field(const GaussianPulse& pulse,
                                         std::span<const SpaceTimePoint> points,
                                         const QuadratureControl& ctrl = {});

std::vector<double> superpose(std::span<const GaussianPulse> pulses,
                              std::span<const SpaceTimePoint> points,
                              const QuadratureControl& ctrl = {});

/// Radial profile of one unit pulse at fixed t, sampled densely and
/// interpolated; the fast path for whole-grid evaluation.
class RadialPulseProfile {
public:
    RadialPulseProfile(double sigma, double t, double r_max,
                       const QuadratureControl& ctrl = {});
    double operator()(double r) const;

private:
    double dr_ = 0.0;
    std::vector<double> samples_;
};

Tensor gaussian_field_grid(std::span<const GaussianPulse> pulses, const GridSpec& grid, double t,
                           const QuadratureControl& ctrl = {});

// --- scene geometry -------------------------------------------------------

using Point2 = std::array<double, 2>;

std::array<Point2, 4> trapezoid_corners();
Point2 polygon_centroid(std::span<const Point2> poly);
bool point_in_polygon(const Point2& p, std::span<const Point2> poly);

/// Direct source plus mirror images across the three walls nearest the
/// source; throws if the source is outside the room.
std::vector<Point2> image_sources_trapezoid(const Point2& source,
                                            const std::array<Point2, 4>& corners);

Tensor ring_initial(const Point2& center, double radius, double sigma, const GridSpec& grid);

// --- scenes ---------------------------------------------------------------

enum class SceneKind { SinglePulse, MultiPulse, TrapezoidReverb, Ring };

struct RingSpec {
    Point2 center{0.5, 0.5};
    double radius = 0.25;
    double sigma = 0.02;
};

struct SceneSpec {
    SceneKind kind = SceneKind::SinglePulse;
    std::vector<GaussianPulse> pulses;       // explicit list; generated when empty
    int pulse_count = 5;                     // MultiPulse only
    double pulse_sigma = 0.02;
    RingSpec ring;
    std::optional<Point2> trapezoid_source;  // default: room centroid
    uint64_t seed = 0;
};

/// Materialize the pulse list for pulse-based scenes (not Ring).
std::vector<GaussianPulse> scene_pulses(const SceneSpec& spec, double extent);

// --- sensors and noise ----------------------------------------------------

struct SensorRegion {
    double lo = 0.1;
    double hi = 0.9;
    const std::vector<Point2>* polygon = nullptr;  // optional extra constraint
};

/// Rejection-samples grid nodes with a minimum pairwise distance;
/// deterministic in the seed, independent of traversal order.
SensorSet sample_sensors(int count, const SensorRegion& region, double min_dist,
                         const GridSpec& grid, uint64_t seed);

/// Additive white Gaussian noise at the requested pooled SNR;
/// +infinity passes the data through untouched.
Measurements add_noise(const Measurements& clean, double snr_db, uint64_t seed);

}  // namespace wavedp
