#include <doctest.h>

#include <algorithm>
#include <random>

#include "upw/error.hpp"
#include "upw/window_partitioner.hpp"

using namespace upw;

namespace {

FoldedImage numbered(std::size_t w, std::size_t h, FoldingFactor f = FoldingFactor(2)) {
    FoldedImage img{w, h, f, {}};
    img.tokens.resize(w * h);
    for (std::size_t i = 0; i < img.tokens.size(); ++i) img.tokens[i] = static_cast<std::uint32_t>(i);
    return img;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error");
    return ErrorKind::Io;
}

}  // namespace

TEST_CASE("pad_image") {
    const FoldingFactor f(16);
    const PadSpec spec = make_pad_spec(16, f);
    CHECK(spec.pad_token_id == 4096u);

    FoldedImage img{16, 16, f, std::vector<std::uint32_t>(256, 5)};
    CHECK(pad_image(img, spec).image == img);

    FoldedImage odd{17, 17, f, std::vector<std::uint32_t>(17 * 17, 9)};
    const PaddedImage p = pad_image(odd, spec);
    CHECK(p.image.width == 32);
    CHECK(p.image.height == 32);
    CHECK(std::count(p.image.tokens.begin(), p.image.tokens.end(), 4096u) == 735);
    for (std::size_t y = 0; y < 32; ++y) {
        for (std::size_t x = 0; x < 32; ++x) {
            const bool inside = x < 17 && y < 17;
            REQUIRE((p.image.at(x, y) == 4096u) == !inside);
        }
    }

    FoldedImage big{224, 224, f, std::vector<std::uint32_t>(224 * 224, 1)};
    CHECK(pad_image(big, spec).image == big);

    CHECK(kind_of([&] { pad_image(img, PadSpec{16, 77}); }) == ErrorKind::Config);
}

TEST_CASE("partition order") {
    const FoldedImage img = numbered(32, 32);
    const WindowGrid g = partition(img, 16);
    REQUIRE(g.windows.size() == 4);
    // Brute-force index map: window (wx, wy), local (lx, ly) -> global index.
    for (std::size_t w = 0; w < 4; ++w) {
        const std::size_t wx = w % 2, wy = w / 2;
        for (std::size_t i = 0; i < 256; ++i) {
            REQUIRE(g.windows[w][i] == (wy * 16 + i / 16) * 32 + wx * 16 + i % 16);
        }
    }
    CHECK(std::vector<std::uint32_t>(g.windows[0].begin(), g.windows[0].begin() + 17) ==
          std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 32});

    const WindowGrid big = partition(FoldedImage{224, 224, FoldingFactor(16), std::vector<std::uint32_t>(224 * 224)}, 16);
    CHECK(big.windows.size() == 196);
    CHECK(big.windows_x == 14);
    CHECK(big.windows[0].size() == 256);

    const FoldedImage one = numbered(16, 16);
    CHECK(partition(one, 16).windows.front() == one.tokens);

    CHECK(kind_of([&] { partition(numbered(17, 16), 16); }) == ErrorKind::Alignment);
}

TEST_CASE("unpartition") {
    std::mt19937 rng(11);
    const FoldingFactor f(32);
    FoldedImage odd{17, 17, f, {}};
    for (std::size_t i = 0; i < 17 * 17; ++i) odd.tokens.push_back(rng() % 512);
    WindowGrid g = to_window_grid(odd, 16);
    CHECK(unpartition(g) == odd);

    const FoldedImage aligned = numbered(8, 12, f);
    CHECK(unpartition(partition(aligned, 4)) == aligned);

    WindowGrid corrupt = g;
    corrupt.windows[0][0] = 512;  // pad inside the image
    CHECK(kind_of([&] { unpartition(corrupt); }) == ErrorKind::Corruption);
    corrupt = g;
    corrupt.windows[3].back() = 3;  // color in the margin
    CHECK(kind_of([&] { unpartition(corrupt); }) == ErrorKind::Corruption);

    WindowGrid empty;
    CHECK(kind_of([&] { unpartition(empty); }) == ErrorKind::EmptyImage);
}

TEST_CASE("sub_partition") {
    std::vector<std::uint32_t> win(256);
    for (std::uint32_t i = 0; i < 256; ++i) win[i] = i;

    const auto whole = sub_partition(win, 16, 16);
    REQUIRE(whole.size() == 1);
    CHECK(whole[0] == win);

    for (std::size_t sub : {1u, 2u, 4u, 8u}) {
        const auto parts = sub_partition(win, 16, sub);
        const std::size_t per = 16 / sub;
        REQUIRE(parts.size() == per * per);
        for (std::size_t s = 0; s < parts.size(); ++s) {
            REQUIRE(parts[s].size() == sub * sub);
            const std::size_t sx = s % per, sy = s / per;
            for (std::size_t i = 0; i < parts[s].size(); ++i) {
                REQUIRE(parts[s][i] == (sy * sub + i / sub) * 16 + sx * sub + i % sub);
            }
        }
        CHECK(merge_sub_windows(parts, 16, sub) == win);
    }
    CHECK(sub_partition(win, 16, 4).size() == 16);
    CHECK(sub_partition(win, 16, 8)[0].size() == 64);
    CHECK(kind_of([&] { sub_partition(win, 16, 3); }) == ErrorKind::Alignment);
    CHECK(kind_of([&] { sub_partition(std::span(win).first(10), 16, 4); }) == ErrorKind::Shape);
}
