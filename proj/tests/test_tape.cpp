#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "wavedp/tape.hpp"

using namespace wavedp;
using namespace wavedp::testing;

TEST_CASE("elementwise ops compute expected values") {
    Tape tape;
    NodeId a = tape.variable(Tensor({3}, {1, 2, 3}));
    NodeId b = tape.variable(Tensor({3}, {4, 5, 6}));
    CHECK(tape.value(tape.add(a, b))[1] == 7.0);
    CHECK(tape.value(tape.sub(a, b))[2] == -3.0);
    CHECK(tape.value(tape.mul(a, b))[0] == 4.0);
    CHECK(tape.value(tape.scale(a, -2.0))[2] == -6.0);
}

TEST_CASE("shape mismatch raises a structured error") {
    Tape tape;
    NodeId a = tape.variable(Tensor({3}));
    NodeId b = tape.variable(Tensor({4}));
    CHECK_THROWS_WITH_AS(tape.add(a, b), "add: shape mismatch (3) vs (4)", TapeError);
}

TEST_CASE("sin adjoint at zero is one") {
    Tape tape;
    NodeId x = tape.variable(Tensor({1}, {0.0}));
    GradientMap g = tape.backward(tape.sum(tape.sin(x)));
    CHECK(g.at(x)[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("d(sum of squares)/dx = 2x") {
    Tape tape;
    NodeId x = tape.variable(Tensor({1}, {3.0}));
    GradientMap g = tape.backward(tape.sum(tape.mul(x, x)));
    CHECK(g.at(x)[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward requires a scalar loss and a fresh tape") {
    Tape tape;
    NodeId x = tape.variable(Tensor({3}, {1, 2, 3}));
    NodeId y = tape.mul(x, x);
    CHECK_THROWS_AS(tape.backward(y), TapeError);

    Tape tape2;
    NodeId x2 = tape2.variable(Tensor({2}, {1, 2}));
    NodeId loss = tape2.sum(x2);
    tape2.backward(loss);
    CHECK_THROWS_AS(tape2.backward(loss), TapeError);
}

TEST_CASE("every registered op matches central finite differences") {
    std::mt19937_64 rng(7);

    auto check = [&](const char* name, std::vector<Tensor> leaves, const LossBuilder& build) {
        INFO(name);
        CHECK(gradcheck(std::move(leaves), build) < 1e-4);
    };

    check("add", {random_tensor({5}, rng), random_tensor({5}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) { return t.sum(t.add(v[0], v[1])); });
    check("sub", {random_tensor({5}, rng), random_tensor({5}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) {
              return t.squared_l2(t.sub(v[0], v[1]));
          });
    check("mul", {random_tensor({5}, rng), random_tensor({5}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) { return t.sum(t.mul(v[0], v[1])); });
    check("scale", {random_tensor({5}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) { return t.sum(t.scale(v[0], -1.7)); });
    check("matmul", {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) {
              return t.squared_l2(t.matmul(v[0], v[1]));
          });
    check("add_rowvec", {random_tensor({3, 4}, rng), random_tensor({4}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) {
              return t.squared_l2(t.add_rowvec(v[0], v[1]));
          });
    check("sin", {random_tensor({6}, rng, -3, 3)},
          [](Tape& t, const std::vector<NodeId>& v) { return t.sum(t.sin(v[0])); });
    check("cos", {random_tensor({6}, rng, -3, 3)},
          [](Tape& t, const std::vector<NodeId>& v) { return t.sum(t.cos(v[0])); });
    check("abs", {random_tensor({6}, rng, 0.2, 1.0)},
          [](Tape& t, const std::vector<NodeId>& v) { return t.sum(t.abs(v[0])); });
    check("mean", {random_tensor({7}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) { return t.mean(t.mul(v[0], v[0])); });
    check("squared_l2", {random_tensor({7}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) { return t.squared_l2(v[0]); });

    auto idx = std::make_shared<std::vector<int64_t>>(std::vector<int64_t>{0, 3, 3, 7});
    check("gather", {random_tensor({9}, rng)}, [idx](Tape& t, const std::vector<NodeId>& v) {
        return t.squared_l2(t.gather(v[0], idx));
    });
    check("scatter", {random_tensor({4}, rng)}, [idx](Tape& t, const std::vector<NodeId>& v) {
        return t.squared_l2(t.scatter(v[0], idx, {9}));
    });
    check("laplacian5", {random_tensor({6, 6}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) {
              return t.squared_l2(t.laplacian5(v[0]));
          });
    check("laplacian5_neumann", {random_tensor({6, 6}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) {
              return t.squared_l2(t.laplacian5_neumann(v[0]));
          });
    check("concat", {random_tensor({3}, rng), random_tensor({4}, rng)},
          [](Tape& t, const std::vector<NodeId>& v) {
              std::vector<NodeId> parts{v[0], v[1]};
              return t.squared_l2(t.concat(parts));
          });
    check("reshape", {random_tensor({6}, rng)}, [](Tape& t, const std::vector<NodeId>& v) {
        return t.squared_l2(t.matmul(t.reshape(v[0], {2, 3}), t.reshape(v[0], {3, 2})));
    });
}

TEST_CASE("gather adjoint scatters unit entries, duplicates add") {
    Tape tape;
    NodeId x = tape.variable(Tensor({6}, {0, 1, 2, 3, 4, 5}));
    auto idx = std::make_shared<std::vector<int64_t>>(std::vector<int64_t>{1, 4, 4});
    GradientMap g = tape.backward(tape.sum(tape.gather(x, idx)));
    const Tensor& grad = g.at(x);
    CHECK(grad[0] == 0.0);
    CHECK(grad[1] == 1.0);
    CHECK(grad[4] == 2.0);  // duplicate index accumulates
    double total = 0;
    for (int64_t i = 0; i < grad.size(); ++i) total += grad[i];
    CHECK(total == 3.0);
}

TEST_CASE("backward is linear in the loss") {
    std::mt19937_64 rng(11);
    Tensor x0 = random_tensor({5}, rng);
    const double a = 2.5, b = -0.75;

    auto l1 = [](Tape& t, NodeId x) { return t.squared_l2(x); };
    auto l2 = [](Tape& t, NodeId x) { return t.sum(t.sin(x)); };

    Tape ta;
    NodeId xa = ta.variable(x0);
    GradientMap g1 = ta.backward(l1(ta, xa));

    Tape tb;
    NodeId xb = tb.variable(x0);
    GradientMap g2 = tb.backward(l2(tb, xb));

    Tape tc;
    NodeId xc = tc.variable(x0);
    NodeId combined = tc.add(tc.scale(l1(tc, xc), a), tc.scale(l2(tc, xc), b));
    GradientMap gc = tc.backward(combined);

    for (int64_t i = 0; i < x0.size(); ++i)
        CHECK(gc.at(xc)[i] ==
              doctest::Approx(a * g1.at(xa)[i] + b * g2.at(xb)[i]).epsilon(1e-12));
}

TEST_CASE("laplacian matches an explicitly assembled dense operator") {
    std::mt19937_64 rng(3);
    const int64_t m = 6;
    Tensor x = random_tensor({m, m}, rng);

    for (bool neumann : {false, true}) {
        INFO("neumann=", neumann);
        // dense matrix assembled row by row
        auto mirror = [&](int64_t k) { return k < 0 ? 1 : (k >= m ? m - 2 : k); };
        std::vector<double> L(static_cast<size_t>(m * m * m * m), 0.0);
        for (int64_t i = 0; i < m; ++i)
            for (int64_t j = 0; j < m; ++j) {
                const int64_t row = i * m + j;
                if (!neumann && (i == 0 || i == m - 1 || j == 0 || j == m - 1)) continue;
                auto add = [&](int64_t ii, int64_t jj, double w) {
                    L[static_cast<size_t>(row * m * m + ii * m + jj)] += w;
                };
                if (neumann) {
                    add(mirror(i - 1), j, 1);
                    add(mirror(i + 1), j, 1);
                    add(i, mirror(j - 1), 1);
                    add(i, mirror(j + 1), 1);
                } else {
                    add(i - 1, j, 1);
                    add(i + 1, j, 1);
                    add(i, j - 1, 1);
                    add(i, j + 1, 1);
                }
                add(i, j, -4);
            }

        Tape tape;
        NodeId xv = tape.variable(x);
        NodeId lap = neumann ? tape.laplacian5_neumann(xv) : tape.laplacian5(xv);

        for (int64_t r = 0; r < m * m; ++r) {
            double want = 0;
            for (int64_t c = 0; c < m * m; ++c)
                want += L[static_cast<size_t>(r * m * m + c)] * x[c];
            CHECK(tape.value(lap)[r] == doctest::Approx(want).epsilon(1e-12));
        }

        // adjoint equals the transpose operator applied to y
        std::mt19937_64 rng2(17);
        Tensor y = random_tensor({m, m}, rng2);
        GradientMap g = tape.backward(tape.sum(tape.mul(lap, tape.constant(y))));
        for (int64_t c = 0; c < m * m; ++c) {
            double want = 0;
            for (int64_t r = 0; r < m * m; ++r)
                want += L[static_cast<size_t>(r * m * m + c)] * y[r];
            CHECK(g.at(xv)[c] == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("non-finite adjoints abort with the offending node") {
    Tape tape;
    NodeId x = tape.variable(Tensor({2}, {1.0, 2.0}));
    NodeId bad = tape.mul(x, tape.constant(Tensor({2}, {1.0, INFINITY})));
    NodeId loss = tape.sum(bad);
    CHECK_THROWS_AS(tape.backward(loss), TapeError);
}

TEST_CASE("untracked constants receive no gradient entry") {
    Tape tape;
    NodeId x = tape.variable(Tensor({2}, {1, 2}));
    NodeId c = tape.constant(Tensor({2}, {5, 5}));
    GradientMap g = tape.backward(tape.sum(tape.mul(x, c)));
    CHECK(g.contains(x));
    CHECK_FALSE(g.contains(c));
}

TEST_CASE("abs subgradient is zero at zero") {
    Tape tape;
    NodeId x = tape.variable(Tensor({3}, {0.5, -0.5, 0.0}));
    GradientMap g = tape.backward(tape.sum(tape.abs(x)));
    CHECK(g.at(x)[0] == 1.0);
    CHECK(g.at(x)[1] == -1.0);
    CHECK(g.at(x)[2] == 0.0);
}
