#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "upw/image.hpp"

namespace upw {

// Per-channel quantization step. Only the five power-of-two divisors of 256
// between 2 and 32 are accepted.
class FoldingFactor {
public:
    static constexpr std::array<int, 5> kAllowed{2, 4, 8, 16, 32};

    explicit FoldingFactor(int value);

    int value() const noexcept { return value_; }
    // Bins per channel (256 / f).
    int bins() const noexcept { return 256 / value_; }

    friend bool operator==(FoldingFactor, FoldingFactor) = default;

private:
    int value_;
};

struct PixToken {
    std::uint32_t id = 0;
    friend bool operator==(PixToken, PixToken) = default;
};

// Number of distinct pix tokens, (256 / f)^3.
std::uint32_t vocab_size(FoldingFactor f) noexcept;

// R-major bin layout: id = br * B^2 + bg * B + bb with B = 256 / f.
PixToken fold_pixel(Rgb rgb, FoldingFactor f) noexcept;

// Bin-midpoint reconstruction. Throws ErrorKind::InvalidToken for ids >= vocab_size(f).
Rgb unfold_token(PixToken token, FoldingFactor f);

// Token grid, row-major. After padding the grid may also hold the pad id
// (vocab_size(f)), see window_partitioner.hpp.
struct FoldedImage {
    std::size_t width = 0;
    std::size_t height = 0;
    FoldingFactor factor{16};
    std::vector<std::uint32_t> tokens;

    std::uint32_t at(std::size_t x, std::size_t y) const { return tokens[y * width + x]; }

    friend bool operator==(const FoldedImage&, const FoldedImage&) = default;
};

FoldedImage fold_image(const RgbImage& image, FoldingFactor f);
RgbImage unfold_image(const FoldedImage& folded);

}  // namespace upw
