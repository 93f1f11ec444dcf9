#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/reference.hpp"
#include "upw/autograd.hpp"
#include "upw/diagnostics.hpp"
#include "upw/error.hpp"
#include "upw/grad_check.hpp"

using namespace upw;

TEST_CASE("relative error") {
    CHECK(relative_error(1.0, 1.0, 1e-6) == 0.0);
    CHECK(relative_error(2.0, 1.0, 1e-6) == doctest::Approx(0.5));
    CHECK(relative_error(0.0, 1e-9, 1e-6) == doctest::Approx(1e-3));
}

TEST_CASE("matmul and cross entropy values") {
    Graph g;
    const Var a = g.constant(Tensor(2, 2, {1, 2, 3, 4}));
    const Var b = g.constant(Tensor(2, 1, {5, 6}));
    CHECK(g.value(matmul(g, a, b)).data == std::vector<double>{17, 39});

    const Var logits = g.constant(Tensor(2, 3, {0, 0, 0, 1, 2, 3}));
    const std::vector<std::int64_t> targets{1, -1};
    std::vector<double> rows;
    const Var ce = cross_entropy_sum(g, logits, targets, &rows);
    CHECK(g.value(ce)(0, 0) == doctest::Approx(std::log(3.0)));
    CHECK(rows[1] == 0.0);
}

TEST_CASE("gelu uses the exact erf form") {
    Graph g;
    const Var x = g.constant(Tensor(1, 3, {-1.0, 0.0, 2.0}));
    const Tensor& y = g.value(gelu(g, x));
    for (std::size_t i = 0; i < 3; ++i) {
        const double v = g.value(x).data[i];
        CHECK(y.data[i] == doctest::Approx(0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)))).epsilon(1e-14));
    }
}

TEST_CASE("attention op agrees with the reference") {
    std::mt19937_64 rng(3);
    const Tensor q = upw::testing::random_tensor(4, 8, rng);
    const Tensor k = upw::testing::random_tensor(4, 4, rng);
    const Tensor v = upw::testing::random_tensor(4, 4, rng);
    Graph g;
    const Var qv = g.constant(q), kv = g.constant(k), vv = g.constant(v);
    const Tensor& got = g.value(attention(g, qv, std::span(&kv, 1), std::span(&vv, 1), causal_mask(4), 4, 2));
    const Tensor want = upw::testing::reference_mha(q, upw::testing::repeat_kv(k, 4, 2),
                                                    upw::testing::repeat_kv(v, 4, 2), causal_mask(4), 4);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
}

TEST_CASE("block gradient checks") {
    const GradCheckOptions opts;
    CHECK(grad_check_linear(opts, 1).max_rel_error < 1e-8);
    CHECK(grad_check_feed_forward(8, 5, opts, 2).max_rel_error < 1e-4);
    CHECK(grad_check_attention_block(8, 5, 2, 2, opts, 3).max_rel_error < 1e-4);
    CHECK(grad_check_attention_block(8, 5, 4, 2, opts, 4).max_rel_error < 1e-4);
    CHECK(grad_check_cross_entropy(4, 7, opts, 5).max_rel_error < 1e-4);
}

TEST_CASE("grad_check argument validation") {
    Parameter p("p", Tensor(1, 1, {1.0}));
    std::vector<Parameter*> ps{&p};
    GradCheckOptions opts;
    opts.eps = 1e-2;
    CHECK_THROWS_AS(grad_check(ps, [](bool) { return 0.0; }, opts), Error);
    opts.eps = 1e-4;
    try {
        grad_check(ps, [](bool) { return std::nan(""); }, opts);
        FAIL("nan accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Numerical);
    }
}
