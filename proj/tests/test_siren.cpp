#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "wavedp/siren.hpp"

using namespace wavedp;
using namespace wavedp::testing;

namespace {

const InputBox kIdentityBox{2, {-1, -1, 0}, {1, 1, 1}};  // normalization is a no-op

Tensor bilinear_sample(const Tensor& grid, const GridSpec& g, double x, double y) {
    const double u = x / g.dr, v = y / g.dr;
    const int64_t j = std::min<int64_t>(static_cast<int64_t>(u), g.m - 2);
    const int64_t i = std::min<int64_t>(static_cast<int64_t>(v), g.m - 2);
    const double fu = u - j, fv = v - i;
    const double val = (1 - fv) * ((1 - fu) * grid.at(i, j) + fu * grid.at(i, j + 1)) +
                       fv * ((1 - fu) * grid.at(i + 1, j) + fu * grid.at(i + 1, j + 1));
    return Tensor::scalar(val);
}

}  // namespace

TEST_CASE("initialization is deterministic and respects the bounds") {
    auto widths = dp_net_widths();
    MlpParams a = siren_init(widths, 30.0, 42);
    MlpParams b = siren_init(widths, 30.0, 42);
    for (size_t l = 0; l < a.weights.size(); ++l) {
        for (int64_t i = 0; i < a.weights[l].size(); ++i)
            CHECK(a.weights[l][i] == b.weights[l][i]);
        for (int64_t i = 0; i < a.biases[l].size(); ++i) CHECK(a.biases[l][i] == b.biases[l][i]);
    }

    CHECK(a.param_count() == 8577);

    for (int64_t i = 0; i < a.weights[0].size(); ++i)
        CHECK(std::abs(a.weights[0][i]) <= 0.5);  // 1/fan_in, fan_in = 2
    const double hidden_bound = std::sqrt(6.0 / 64.0);
    for (size_t l = 1; l < a.weights.size(); ++l)
        for (int64_t i = 0; i < a.weights[l].size(); ++i)
            CHECK(std::abs(a.weights[l][i]) <= hidden_bound);

    MlpParams c = siren_init(widths, 30.0, 43);
    bool any_diff = false;
    for (int64_t i = 0; i < a.weights[0].size(); ++i)
        any_diff = any_diff || a.weights[0][i] != c.weights[0][i];
    CHECK(any_diff);
}

TEST_CASE("all-zero weights produce the output bias") {
    MlpParams params = siren_init(std::vector<int64_t>{2, 8, 1}, 30.0, 1);
    for (Tensor& w : params.weights)
        for (int64_t i = 0; i < w.size(); ++i) w[i] = 0.0;
    for (Tensor& b : params.biases)
        for (int64_t i = 0; i < b.size(); ++i) b[i] = 0.0;
    params.biases.back()[0] = 0.37;

    Tensor coords({3, 2}, {0.1, 0.2, 0.8, 0.9, 0.5, 0.5});
    Tensor out = siren_forward(params, coords, InputBox::square(1.0));
    CHECK(out.rows() == 3);
    CHECK(out.cols() == 1);
    for (int64_t i = 0; i < 3; ++i) CHECK(out[i] == 0.37);
}

TEST_CASE("grid evaluation is resolution-free at coincident nodes") {
    MlpParams params = siren_init(dp_net_widths(), 30.0, 7);
    GridSpec coarse{25, 1.0 / 24.0};
    GridSpec fine = coarse.refined(2);
    InputBox box = InputBox::square(coarse.extent());

    Tape tape;
    TapedMlp net = register_params(tape, params);
    const Tensor& pc = tape.value(siren_eval_grid(tape, net, coarse, box));
    const Tensor& pf = tape.value(siren_eval_grid(tape, net, fine, box));

    CHECK(pc.rows() == coarse.m);
    CHECK(pf.rows() == fine.m);
    for (int64_t i = 0; i < coarse.m; ++i)
        for (int64_t j = 0; j < coarse.m; ++j)
            CHECK(pc.at(i, j) == pf.at(2 * i, 2 * j));  // bit-identical
}

TEST_CASE("parameter gradients match finite differences") {
    std::mt19937_64 rng(3);
    MlpParams params = siren_init(std::vector<int64_t>{2, 8, 1}, 2.0, 5);
    Tensor coords = random_tensor({5, 2}, rng, 0.0, 1.0);
    InputBox box = InputBox::square(1.0);
    Tensor coords_n = normalize_coords(coords, box);

    std::vector<Tensor> leaves;
    for (const Tensor& w : params.weights) leaves.push_back(w);
    for (const Tensor& b : params.biases) leaves.push_back(b);
    const size_t L = params.weights.size();

    auto build = [&](Tape& t, const std::vector<NodeId>& v) {
        TapedMlp net;
        net.omega0 = params.omega0;
        net.weights.assign(v.begin(), v.begin() + static_cast<long>(L));
        net.biases.assign(v.begin() + static_cast<long>(L), v.end());
        return t.squared_l2(siren_eval(t, net, t.constant(coords_n)));
    };
    CHECK(gradcheck(leaves, build) < 1e-4);
}

TEST_CASE("jets of a purely linear network") {
    MlpParams params;
    params.omega0 = 1.0;
    params.weights.push_back(Tensor({2, 1}, {0.8, -0.3}));
    params.biases.push_back(Tensor({1}, {0.1}));

    Tensor coords({1, 2}, {0.25, -0.5});
    Tape tape;
    TapedMlp net = register_params(tape, params);
    JetNodes jx = siren_jet2_eval(tape, net, coords, 0, kIdentityBox);
    // first layer is also the output layer here, so omega0 scales it
    CHECK(tape.value(jx.d1)[0] == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(tape.value(jx.d2)[0] == 0.0);
    JetNodes jy = siren_jet2_eval(tape, net, coords, 1, kIdentityBox);
    CHECK(tape.value(jy.d1)[0] == doctest::Approx(-0.3).epsilon(1e-14));
}

TEST_CASE("jets of a single sine unit match the closed form") {
    const double a = 0.8, b = -0.3, c = 0.45, w0 = 2.0;
    MlpParams params;
    params.omega0 = w0;
    params.weights.push_back(Tensor({2, 1}, {a, b}));
    params.biases.push_back(Tensor({1}, {c}));
    params.weights.push_back(Tensor({1, 1}, {1.0}));
    params.biases.push_back(Tensor({1}, {0.0}));

    const double x = 0.3, y = -0.7;
    Tensor coords({1, 2}, {x, y});
    Tape tape;
    TapedMlp net = register_params(tape, params);
    JetNodes jx = siren_jet2_eval(tape, net, coords, 0, kIdentityBox);

    const double pre = w0 * (a * x + b * y) + c;
    CHECK(tape.value(jx.value)[0] == doctest::Approx(std::sin(pre)).epsilon(1e-9));
    CHECK(tape.value(jx.d1)[0] == doctest::Approx(w0 * a * std::cos(pre)).epsilon(1e-9));
    CHECK(tape.value(jx.d2)[0] ==
          doctest::Approx(-w0 * a * w0 * a * std::sin(pre)).epsilon(1e-9));
}

TEST_CASE("jets match finite differences on random networks") {
    std::mt19937_64 rng(11);
    InputBox box = InputBox::cube(1.0, 0.343);

    for (int net_idx = 0; net_idx < 3; ++net_idx) {
        MlpParams params = siren_init(std::vector<int64_t>{3, 16, 16, 1}, 4.0,
                                      static_cast<uint64_t>(100 + net_idx));
        Tensor base = random_tensor({1, 3}, rng, 0.2, 0.8);
        base[2] *= 0.343;

        for (int axis = 0; axis < 3; ++axis) {
            Tape tape;
            TapedMlp net = register_params(tape, params);
            JetNodes jets = siren_jet2_eval(tape, net, base, axis, box);

            const double h = 1e-4;
            auto value_at = [&](double delta) {
                Tensor c = base;
                c[axis] += delta;
                return siren_forward(params, c, box)[0];
            };
            const double up = value_at(h), mid = value_at(0.0), dn = value_at(-h);
            const double fd1 = (up - dn) / (2 * h);
            const double fd2 = (up - 2 * mid + dn) / (h * h);

            CHECK(tape.value(jets.value)[0] == doctest::Approx(mid).epsilon(1e-10));
            CHECK(tape.value(jets.d1)[0] == doctest::Approx(fd1).epsilon(1e-4));
            CHECK(tape.value(jets.d2)[0] == doctest::Approx(fd2).epsilon(1e-4));
        }
    }
}

TEST_CASE("jet components stay on the tape for parameter gradients") {
    std::mt19937_64 rng(13);
    MlpParams params = siren_init(std::vector<int64_t>{2, 6, 1}, 2.0, 21);
    Tensor coords = random_tensor({4, 2}, rng, 0.1, 0.9);
    InputBox box = InputBox::square(1.0);

    std::vector<Tensor> leaves;
    for (const Tensor& w : params.weights) leaves.push_back(w);
    for (const Tensor& b : params.biases) leaves.push_back(b);
    const size_t L = params.weights.size();

    auto build = [&](Tape& t, const std::vector<NodeId>& v) {
        TapedMlp net;
        net.omega0 = params.omega0;
        net.weights.assign(v.begin(), v.begin() + static_cast<long>(L));
        net.biases.assign(v.begin() + static_cast<long>(L), v.end());
        JetNodes jets = siren_jet2_eval(t, net, coords, 0, box);
        return t.add(t.squared_l2(jets.d2), t.squared_l2(jets.d1));
    };
    CHECK(gradcheck(leaves, build) < 1e-4);
}

TEST_CASE("second derivatives are continuous across cell boundaries") {
    MlpParams params = siren_init(dp_net_widths(), 30.0, 77);
    InputBox box = InputBox::square(1.0);
    // straddle a node of a hypothetical 100-point grid
    const double x0 = 50.0 / 99.0;
    for (double base : {x0 - 5e-10, x0, x0 + 5e-10}) {
        Tensor ca({1, 2}, {base, 0.4});
        Tensor cb({1, 2}, {base + 1e-9, 0.4});
        Tape tape;
        TapedMlp net = register_params(tape, params);
        const double d2a = tape.value(siren_jet2_eval(tape, net, ca, 0, box).d2)[0];
        const double d2b = tape.value(siren_jet2_eval(tape, net, cb, 0, box).d2)[0];
        CHECK(std::abs(d2a - d2b) < 1e-6 * std::max(1.0, std::abs(d2a)));
    }
}

TEST_CASE("grid sampling converges to the implicit function") {
    MlpParams params = siren_init(dp_net_widths(), 30.0, 9);
    InputBox box = InputBox::square(1.0);
    std::mt19937_64 rng(17);

    double err_coarse = 0.0, err_fine = 0.0;
    GridSpec coarse{33, 1.0 / 32.0};
    GridSpec fine{129, 1.0 / 128.0};

    Tape tape;
    TapedMlp net = register_params(tape, params);
    const Tensor gc = tape.value(siren_eval_grid(tape, net, coarse, box));
    const Tensor gf = tape.value(siren_eval_grid(tape, net, fine, box));

    for (int trial = 0; trial < 50; ++trial) {
        Tensor pt = random_tensor({1, 2}, rng, 0.05, 0.95);
        const double direct = siren_forward(params, pt, box)[0];
        err_coarse = std::max(err_coarse,
                              std::abs(bilinear_sample(gc, coarse, pt[0], pt[1])[0] - direct));
        err_fine =
            std::max(err_fine, std::abs(bilinear_sample(gf, fine, pt[0], pt[1])[0] - direct));
    }
    CHECK(err_fine < err_coarse);
    CHECK(err_fine < 0.05);
}
