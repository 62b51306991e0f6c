#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "wavedp/oracle.hpp"

using namespace wavedp;
using namespace wavedp::testing;

TEST_CASE("bessel j0 against tabulated values") {
    struct Ref {
        double x, j0;
    };
    // reference values from an independent special-function library
    const Ref table[] = {
        {0.0, 1.0},
        {0.5, 0.938469807240813},
        {1.0, 0.7651976865579665},
        {1.5, 0.5118276717359181},
        {2.0, 0.22389077914123562},
        {2.404825557695773, -9.586882554916807e-17},
        {3.0, -0.2600519549019335},
        {4.0, -0.3971498098638473},
        {5.0, -0.1775967713143383},
        {5.520078110286311, -1.6495129789841916e-17},
        {6.5, 0.26009460558160646},
        {7.0, 0.3000792705195556},
        {8.0, 0.1716508071375539},
        {8.653727912911013, -8.704431814720906e-17},
        {10.0, -0.24593576445134832},
        {12.5, 0.14688405470042093},
        {20.0, 0.16702466434058322},
        {50.0, 0.055812327669252086},
        {123.456, -0.07103006241837068},
        {700.0, -0.006288272465069686},
    };
    for (const Ref& r : table) {
        CHECK(bessel_j0(r.x) == doctest::Approx(r.j0).epsilon(1e-10).scale(1.0));
        CHECK(std::abs(bessel_j0(r.x) - r.j0) < 1e-10);
    }
}

TEST_CASE("pulse pressure recovers the initial condition at t=0") {
    GaussianPulse pulse{0.5, 0.5, 1.0, 0.02};
    CHECK(gaussian_pulse_pressure(pulse, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(gaussian_pulse_pressure(pulse, 10.0 * pulse.sigma, 0.0)) < 1e-12);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> rd(0.0, 0.2);
    for (int k = 0; k < 100; ++k) {
        const double r = rd(rng);
        const double closed = std::exp(-0.5 * r * r / (pulse.sigma * pulse.sigma));
        CHECK(std::abs(gaussian_pulse_pressure(pulse, r, 0.0) - closed) < 1e-8);
    }
}

TEST_CASE("pulse pressure amplitude scales linearly") {
    GaussianPulse a{0.0, 0.0, 1.0, 0.05};
    GaussianPulse b{0.0, 0.0, -2.5, 0.05};
    const double pa = gaussian_pulse_pressure(a, 0.07, 0.1);
    const double pb = gaussian_pulse_pressure(b, 0.07, 0.1);
    CHECK(pb == doctest::Approx(-2.5 * pa).epsilon(1e-10));
}

TEST_CASE("oracle samples satisfy the wave equation away from t=0") {
    GaussianPulse pulse{0.5, 0.5, 1.0, 0.05};
    const double h = 1e-3;
    auto p = [&](double x, double y, double t) {
        const double r = std::hypot(x - pulse.x0, y - pulse.y0);
        return gaussian_pulse_pressure(pulse, r, t);
    };
    double max_field = 1.0;  // peak amplitude of the pulse at t=0

    const double pts[][3] = {{0.55, 0.5, 0.12}, {0.62, 0.47, 0.2}, {0.5, 0.68, 0.25}};
    for (const auto& q : pts) {
        const double x = q[0], y = q[1], t = q[2];
        const double pxx = (p(x + h, y, t) - 2 * p(x, y, t) + p(x - h, y, t)) / (h * h);
        const double pyy = (p(x, y + h, t) - 2 * p(x, y, t) + p(x, y - h, t)) / (h * h);
        const double ptt = (p(x, y, t + h) - 2 * p(x, y, t) + p(x, y, t - h)) / (h * h);
        CHECK(std::abs(pxx + pyy - ptt) <= 1e-2 * max_field);
    }
}

TEST_CASE("superposition is linear") {
    GaussianPulse pulse{0.4, 0.6, 0.7, 0.03};
    std::vector<SpaceTimePoint> pts = {{0.45, 0.6, 0.05}, {0.5, 0.5, 0.12}};

    std::vector<GaussianPulse> one{pulse};
    auto direct = gaussian_pulse_field(pulse, pts);
    auto sup = superpose(one, pts);
    for (size_t i = 0; i < pts.size(); ++i) CHECK(sup[i] == doctest::Approx(direct[i]));

    GaussianPulse anti = pulse;
    anti.amplitude = -pulse.amplitude;
    std::vector<GaussianPulse> cancel{pulse, anti};
    auto zero = superpose(cancel, pts);
    for (double v : zero) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("grid evaluation matches direct quadrature") {
    std::vector<GaussianPulse> pulses = {{0.45, 0.55, 1.0, 0.05}, {0.6, 0.4, -0.5, 0.05}};
    GridSpec grid{21, 1.0 / 20.0};
    const double t = 0.15;
    Tensor field = gaussian_field_grid(pulses, grid, t);

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int64_t> pick(0, grid.m - 1);
    for (int k = 0; k < 20; ++k) {
        const int64_t i = pick(rng), j = pick(rng);
        std::vector<SpaceTimePoint> pt{{grid.x(j), grid.y(i), t}};
        const double direct = superpose(pulses, pt)[0];
        CHECK(field.at(i, j) == doctest::Approx(direct).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("quadrature failure carries its running estimate") {
    GaussianPulse pulse{0.5, 0.5, 1.0, 0.02};
    QuadratureControl strangled{1e-14, 3};
    CHECK_THROWS_AS(gaussian_pulse_pressure(pulse, 0.3, 0.2, strangled), QuadratureError);
}

TEST_CASE("image sources mirror across the room walls") {
    const auto corners = trapezoid_corners();

    SUBCASE("point on a wall maps to itself") {
        Point2 on_wall{0.3, 0.5};
        auto imgs = image_sources_trapezoid(on_wall, corners);
        bool found_self = false;
        for (size_t k = 1; k < imgs.size(); ++k)
            if (std::hypot(imgs[k][0] - on_wall[0], imgs[k][1] - on_wall[1]) < 1e-12)
                found_self = true;
        CHECK(found_self);
    }

    SUBCASE("mirror across the left wall") {
        Point2 src{0.5, 0.5};
        auto imgs = image_sources_trapezoid(src, corners);
        bool found = false;
        for (const Point2& p : imgs)
            if (std::abs(p[0] - 0.1) < 1e-12 && std::abs(p[1] - 0.5) < 1e-12) found = true;
        CHECK(found);
    }

    SUBCASE("centroid source: each image is equidistant from its wall") {
        Point2 src = polygon_centroid(corners);
        auto imgs = image_sources_trapezoid(src, corners);
        CHECK(imgs.size() == 4);
        CHECK(imgs[0][0] == src[0]);

        auto line_dist = [](const Point2& p, const Point2& a, const Point2& b) {
            const double ex = b[0] - a[0], ey = b[1] - a[1];
            return std::abs(ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / std::hypot(ex, ey);
        };
        for (size_t k = 1; k < imgs.size(); ++k) {
            // the matching wall is the one the segment crosses perpendicularly
            bool matched = false;
            for (size_t w = 0; w < 4; ++w) {
                const Point2& a = corners[w];
                const Point2& b = corners[(w + 1) % 4];
                const double ds = line_dist(src, a, b), di = line_dist(imgs[k], a, b);
                const Point2 mid{0.5 * (src[0] + imgs[k][0]), 0.5 * (src[1] + imgs[k][1])};
                if (std::abs(ds - di) < 1e-12 && line_dist(mid, a, b) < 1e-12) matched = true;
            }
            CHECK(matched);
        }
    }

    SUBCASE("outside source is rejected") {
        CHECK_THROWS_AS(image_sources_trapezoid({0.9, 0.9}, corners), std::invalid_argument);
    }
}

TEST_CASE("ring initial condition") {
    GridSpec grid{101, 1.0 / 100.0};
    Tensor ring = ring_initial({0.5, 0.5}, 0.25, 0.02, grid);
    // node (50, 75) sits exactly at distance 0.25 from the center
    CHECK(ring.at(50, 75) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ring.at(50, 50) < 1e-15);
    CHECK_THROWS_AS(ring_initial({0.5, 0.5}, -1.0, 0.02, grid), std::invalid_argument);
}

TEST_CASE("sensor sampling respects region, spacing, and seed") {
    GridSpec grid{100, 1.0 / 99.0};
    SensorRegion region;
    SensorSet s = sample_sensors(20, region, 0.05, grid, 1234);
    CHECK(s.count() == 20);
    for (const auto& ij : s.indices) {
        const double x = grid.x(ij[1]), y = grid.y(ij[0]);
        CHECK(x >= 0.1 * grid.extent());
        CHECK(x <= 0.9 * grid.extent());
        CHECK(y >= 0.1 * grid.extent());
        CHECK(y <= 0.9 * grid.extent());
    }
    for (size_t a = 0; a < s.indices.size(); ++a)
        for (size_t b = a + 1; b < s.indices.size(); ++b) {
            const double dx = grid.x(s.indices[a][1]) - grid.x(s.indices[b][1]);
            const double dy = grid.y(s.indices[a][0]) - grid.y(s.indices[b][0]);
            CHECK(std::hypot(dx, dy) >= 0.05);
        }

    SensorSet again = sample_sensors(20, region, 0.05, grid, 1234);
    CHECK(again.indices == s.indices);

    SensorSet one = sample_sensors(1, region, 0.05, grid, 9);
    CHECK(one.count() == 1);
}

TEST_CASE("sensor sampling inside a polygon") {
    GridSpec grid{100, 1.0 / 99.0};
    const auto corners = trapezoid_corners();
    std::vector<Point2> poly(corners.begin(), corners.end());
    SensorRegion region;
    region.lo = 0.0;
    region.hi = 1.0;
    region.polygon = &poly;
    SensorSet s = sample_sensors(10, region, 0.05, grid, 77);
    CHECK(s.count() == 10);
    for (const auto& ij : s.indices)
        CHECK(point_in_polygon({grid.x(ij[1]), grid.y(ij[0])}, poly));
}

TEST_CASE("infeasible packing fails with a clear error") {
    GridSpec grid{20, 1.0 / 19.0};
    SensorRegion region;
    CHECK_THROWS_AS(sample_sensors(60, region, 0.2, grid, 3), std::runtime_error);
}

TEST_CASE("noise injection hits the requested power") {
    std::mt19937_64 rng(3);
    Measurements clean;
    clean.values = random_tensor({20, 500}, rng, -1.0, 1.0);

    Measurements untouched = add_noise(clean, INFINITY, 5);
    for (int64_t i = 0; i < clean.values.size(); ++i)
        CHECK(untouched.values[i] == clean.values[i]);

    double power = 0.0;
    for (int64_t i = 0; i < clean.values.size(); ++i)
        power += clean.values[i] * clean.values[i];
    power /= static_cast<double>(clean.values.size());

    Measurements at0 = add_noise(clean, 0.0, 5);
    double np = 0.0;
    for (int64_t i = 0; i < clean.values.size(); ++i) {
        const double d = at0.values[i] - clean.values[i];
        np += d * d;
    }
    np /= static_cast<double>(clean.values.size());
    CHECK(np == doctest::Approx(power).epsilon(0.05));

    Measurements at20 = add_noise(clean, 20.0, 5);
    double np20 = 0.0;
    for (int64_t i = 0; i < clean.values.size(); ++i) {
        const double d = at20.values[i] - clean.values[i];
        np20 += d * d;
    }
    np20 /= static_cast<double>(clean.values.size());
    CHECK(np20 == doctest::Approx(power / 100.0).epsilon(0.05));

    Measurements zeros;
    zeros.values = Tensor({4, 4});
    CHECK_THROWS_AS(add_noise(zeros, 20.0, 1), std::invalid_argument);
}

TEST_CASE("scene pulse materialization") {
    SceneSpec single;
    auto sp = scene_pulses(single, 1.0);
    REQUIRE(sp.size() == 1);
    CHECK(sp[0].x0 == 0.5);
    CHECK(sp[0].sigma == 0.02);

    SceneSpec multi;
    multi.kind = SceneKind::MultiPulse;
    multi.pulse_count = 5;
    multi.seed = 99;
    auto mp = scene_pulses(multi, 1.0);
    REQUIRE(mp.size() == 5);
    for (const auto& p : mp) {
        CHECK(p.x0 >= 0.3);
        CHECK(p.x0 <= 0.7);
        CHECK(p.y0 >= 0.3);
        CHECK(p.y0 <= 0.7);
        CHECK(std::abs(p.amplitude) <= 1.0);
    }
    auto mp2 = scene_pulses(multi, 1.0);
    CHECK(mp2[3].x0 == mp[3].x0);  // deterministic

    SceneSpec reverb;
    reverb.kind = SceneKind::TrapezoidReverb;
    auto rp = scene_pulses(reverb, 1.0);
    CHECK(rp.size() == 4);
}
