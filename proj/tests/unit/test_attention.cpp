#include <doctest.h>

#include <random>

#include "../support/reference.hpp"
#include "upw/attention.hpp"
#include "upw/error.hpp"

using namespace upw;
using upw::testing::random_tensor;

namespace {

// Visibility rule written out directly: causal, and with sub-windows a key is
// visible if it shares the query's sub-window or its whole sub-window lies at
// or before the query in raster order.
bool oracle_visible(std::size_t i, std::size_t j, std::size_t side, std::size_t sub) {
    if (j > i) return false;
    if (sub == 0) return true;
    auto cell = [&](std::size_t t) { return (t / side / sub) * (side / sub) + (t % side) / sub; };
    if (cell(i) == cell(j)) return true;
    std::size_t last = 0;
    for (std::size_t t = 0; t < side * side; ++t) {
        if (cell(t) == cell(j)) last = t;
    }
    return last <= i;
}

}  // namespace

TEST_CASE("local_window_mask examples") {
    const AttentionMask m = local_window_mask(4, 1);
    REQUIRE(m.rows == 4);
    REQUIRE(m.cols == 5);
    const int expected[4][5] = {{1, 1, 0, 0, 0}, {1, 1, 1, 0, 0}, {1, 1, 1, 1, 0}, {1, 1, 1, 1, 1}};
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 5; ++j) CHECK(m(i, j) == (expected[i][j] == 1));
    }
    CHECK(local_window_mask(9, 0) == causal_mask(9));

    const AttentionMask s = local_window_mask(4, 0, 2);
    CHECK(s(2, 0));
    CHECK(s(2, 1));
    CHECK(s(2, 2));
    CHECK_FALSE(s(2, 3));
    for (std::size_t j = 0; j < 4; ++j) CHECK(s(3, j));
}

TEST_CASE("sub-window mask matches the enumerated rule") {
    for (std::size_t side : {2u, 4u, 8u}) {
        for (std::size_t sub : {0u, 1u, 2u, 4u, 8u}) {
            if (sub > side || (sub != 0 && side % sub != 0)) continue;
            for (std::size_t cond : {0u, 1u, 2u}) {
                const std::size_t len = side * side;
                const AttentionMask m = local_window_mask(len, cond, sub == 0 ? std::nullopt : std::optional(sub));
                REQUIRE(m.rows == len);
                REQUIRE(m.cols == len + cond);
                for (std::size_t i = 0; i < len; ++i) {
                    bool any = false;
                    for (std::size_t j = 0; j < cond; ++j) REQUIRE(m(i, j));
                    for (std::size_t j = 0; j < len; ++j) {
                        REQUIRE(m(i, cond + j) == oracle_visible(i, j, side, sub));
                        any = any || m(i, cond + j);
                    }
                    REQUIRE(any);
                    REQUIRE(m(i, cond + i));
                }
            }
        }
    }
    try {
        local_window_mask(16, 0, 3);
        FAIL("bad sub size accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Alignment);
    }
}

TEST_CASE("gqa equals mha with repeated key/value heads") {
    std::mt19937_64 rng(5);
    for (auto [heads, kv] : {std::pair{4u, 4u}, {4u, 2u}, {4u, 1u}, {12u, 6u}, {6u, 3u}}) {
        const std::size_t d = 3, n = 6, m = 7;
        const Tensor q = random_tensor(n, heads * d, rng);
        const Tensor k = random_tensor(m, kv * d, rng);
        const Tensor v = random_tensor(m, kv * d, rng);
        AttentionMask mask(n, m, true);
        for (std::size_t i = 0; i < n; ++i) mask.set(i, m - 1 - i % 3, false);
        const Tensor got = gqa_attention(q, k, v, mask, heads, kv);
        const Tensor want =
            upw::testing::reference_mha(q, upw::testing::repeat_kv(k, heads, kv), upw::testing::repeat_kv(v, heads, kv), mask, heads);
        for (std::size_t i = 0; i < got.size(); ++i) REQUIRE(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("attention edge cases") {
    std::mt19937_64 rng(9);
    // One query, identical keys: uniform weights return the mean of the values.
    const Tensor q = random_tensor(1, 4, rng);
    Tensor k(3, 2);
    const Tensor krow = random_tensor(1, 2, rng);
    for (std::size_t r = 0; r < 3; ++r) std::copy(krow.data.begin(), krow.data.end(), k.row(r).begin());
    Tensor v(3, 2);
    for (std::size_t r = 0; r < 3; ++r) {
        v(r, 0) = 1.5 + static_cast<double>(r);
        v(r, 1) = -2.0 * static_cast<double>(r);
    }
    std::vector<double> probs;
    const Tensor out = gqa_attention(q, k, v, AttentionMask(1, 3, true), 2, 1, &probs);
    for (std::size_t h = 0; h < 2; ++h) {
        CHECK(out(0, 2 * h) == doctest::Approx(2.5));
        CHECK(out(0, 2 * h + 1) == doctest::Approx(-2.0));
    }
    for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0));

    try {
        gqa_attention(q, k, v, AttentionMask(1, 3, true), 3, 2);
        FAIL("bad grouping accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
    }
    try {
        gqa_attention(q, Tensor(3, 5), Tensor(3, 5), AttentionMask(1, 3, true), 2, 1);
        FAIL("bad shape accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Shape);
    }
    CHECK_THROWS_AS(gqa_attention(q, k, v, AttentionMask(1, 3, false), 2, 1), Error);
}

TEST_CASE("attention rows sum to one") {
    std::mt19937_64 rng(21);
    const Tensor q = random_tensor(5, 8, rng, 3.0);
    const Tensor k = random_tensor(5, 4, rng, 3.0);
    const Tensor v = random_tensor(5, 4, rng);
    std::vector<double> probs;
    gqa_attention(q, k, v, causal_mask(5), 4, 2, &probs);
    REQUIRE(probs.size() == 4 * 25);
    for (std::size_t r = 0; r < 20; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 5; ++c) s += probs[r * 5 + c];
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}
