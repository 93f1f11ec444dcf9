#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace upw {

using Rgb = std::array<std::uint8_t, 3>;

// 8-bit RGB raster, row-major, three interleaved channels per pixel.
struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    RgbImage() = default;
    RgbImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

    bool empty() const noexcept { return width == 0 || height == 0; }

    Rgb at(std::size_t x, std::size_t y) const {
        const std::size_t i = (y * width + x) * 3;
        return {pixels[i], pixels[i + 1], pixels[i + 2]};
    }

    void set(std::size_t x, std::size_t y, Rgb c) {
        const std::size_t i = (y * width + x) * 3;
        pixels[i] = c[0];
        pixels[i + 1] = c[1];
        pixels[i + 2] = c[2];
    }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Binary PPM (P6). Reading also accepts P5 graymaps, replicated to three channels.
// Maxval below 255 is rescaled to the full 8-bit range.
RgbImage read_ppm(std::istream& in);
RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(std::ostream& out, const RgbImage& image);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

}  // namespace upw
