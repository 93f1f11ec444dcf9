#include <doctest.h>

#include "upw/error.hpp"
#include "upw/unified_vocab.hpp"

using namespace upw;

TEST_CASE("layout") {
    const FoldingFactor f(16);
    CHECK(to_unified({TokenTag::Word, 65}, f) == 65u);
    CHECK(to_unified({TokenTag::Pix, 0}, f) == 256u);
    CHECK(to_unified({TokenTag::PadPix, 0}, f) == 4352u);
    CHECK(to_unified({TokenTag::ImgEnd, 0}, f) == 256u + 4096u + 4u);
    CHECK(UnifiedVocab(f).total() == 256u + 4096u + 5u);
    CHECK(UnifiedVocab(FoldingFactor(32)).total() == 773u);
}

TEST_CASE("bijection over the unified range") {
    for (int fv : {16, 32}) {
        const FoldingFactor f(fv);
        const UnifiedVocab v(f);
        // Count tags and make sure the ranges are contiguous and disjoint.
        std::uint32_t words = 0, pix = 0, specials = 0;
        for (std::uint32_t id = 0; id < v.total(); ++id) {
            const UnifiedToken t = from_unified(id, f);
            REQUIRE(to_unified(t, f) == id);
            if (t.tag == TokenTag::Word) {
                REQUIRE(id < 256);
                ++words;
            } else if (t.tag == TokenTag::Pix) {
                REQUIRE(t.inner_id == id - 256);
                ++pix;
            } else {
                ++specials;
            }
        }
        CHECK(words == 256);
        CHECK(pix == vocab_size(f));
        CHECK(specials == 5);
        CHECK_THROWS_AS(from_unified(v.total(), f), Error);
    }
    CHECK_THROWS_AS(to_unified({TokenTag::Word, 256}, FoldingFactor(16)), Error);
    CHECK_THROWS_AS(to_unified({TokenTag::Pix, 4096}, FoldingFactor(16)), Error);
}

TEST_CASE("text and image encoding") {
    CHECK(encode_text("").empty());
    CHECK(encode_text("hi") == std::vector<std::uint32_t>{104, 105});
    const std::string bytes = "caf\xc3\xa9\x00\xff";
    CHECK(decode_text(encode_text(std::string_view(bytes.data(), 7))) == std::string(bytes.data(), 7));

    const FoldingFactor f(16);
    WindowGrid g;
    g.windows_x = g.windows_y = 1;
    g.window_size = 4;
    g.orig_width = g.orig_height = 4;
    g.factor = f;
    g.windows = {std::vector<std::uint32_t>(16, 0)};
    const std::vector<std::uint32_t> ids = encode_image(g);
    std::vector<std::uint32_t> expected{256 + 4096 + 3};
    expected.insert(expected.end(), 16, 256);
    expected.push_back(256 + 4096 + 4);
    CHECK(ids == expected);
    CHECK(decode_image(ids, g) == g);
}
