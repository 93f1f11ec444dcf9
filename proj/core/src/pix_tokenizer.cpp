#include "upw/pix_tokenizer.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "upw/error.hpp"

namespace upw {

FoldingFactor::FoldingFactor(int value) : value_(value) {
    if (std::find(kAllowed.begin(), kAllowed.end(), value) == kAllowed.end()) {
        throw Error(ErrorKind::InvalidArgument,
                    "invalid folding factor " + std::to_string(value) + "; valid factors are {2, 4, 8, 16, 32}");
    }
}

std::uint32_t vocab_size(FoldingFactor f) noexcept {
    const auto b = static_cast<std::uint32_t>(f.bins());
    return b * b * b;
}

PixToken fold_pixel(Rgb rgb, FoldingFactor f) noexcept {
    const auto b = static_cast<std::uint32_t>(f.bins());
    const auto step = static_cast<std::uint32_t>(f.value());
    const std::uint32_t br = rgb[0] / step;
    const std::uint32_t bg = rgb[1] / step;
    const std::uint32_t bb = rgb[2] / step;
    return {br * b * b + bg * b + bb};
}

Rgb unfold_token(PixToken token, FoldingFactor f) {
    if (token.id >= vocab_size(f)) {
        throw Error(ErrorKind::InvalidToken, "pix token " + std::to_string(token.id) + " out of range for factor " +
                                                 std::to_string(f.value()));
    }
    const auto b = static_cast<std::uint32_t>(f.bins());
    const auto step = static_cast<std::uint32_t>(f.value());
    const std::uint32_t bb = token.id % b;
    const std::uint32_t bg = (token.id / b) % b;
    const std::uint32_t br = token.id / (b * b);
    auto channel = [&](std::uint32_t bin) { return static_cast<std::uint8_t>(bin * step + step / 2); };
    return {channel(br), channel(bg), channel(bb)};
}

FoldedImage fold_image(const RgbImage& image, FoldingFactor f) {
    if (image.empty()) throw Error(ErrorKind::EmptyImage, "cannot fold a zero-dimension image");
    FoldedImage out{image.width, image.height, f, {}};
    out.tokens.resize(image.width * image.height);
    // Same arithmetic as fold_pixel, with the per-channel division hoisted into a table.
    std::array<std::uint32_t, 256> bin{};
    for (std::uint32_t c = 0; c < 256; ++c) bin[c] = c / static_cast<std::uint32_t>(f.value());
    const auto b = static_cast<std::uint32_t>(f.bins());
    const std::uint8_t* px = image.pixels.data();
    for (std::size_t i = 0; i < out.tokens.size(); ++i, px += 3) {
        out.tokens[i] = (bin[px[0]] * b + bin[px[1]]) * b + bin[px[2]];
    }
    return out;
}

RgbImage unfold_image(const FoldedImage& folded) {
    if (folded.width == 0 || folded.height == 0) throw Error(ErrorKind::EmptyImage, "cannot unfold an empty image");
    if (folded.tokens.size() != folded.width * folded.height) {
        throw Error(ErrorKind::Shape, "folded image token count does not match its dimensions");
    }
    RgbImage out(folded.width, folded.height);
    for (std::size_t i = 0; i < folded.tokens.size(); ++i) {
        const Rgb c = unfold_token(PixToken{folded.tokens[i]}, folded.factor);
        out.pixels[3 * i] = c[0];
        out.pixels[3 * i + 1] = c[1];
        out.pixels[3 * i + 2] = c[2];
    }
    return out;
}

}  // namespace upw
