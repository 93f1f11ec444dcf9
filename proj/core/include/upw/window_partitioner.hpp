#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "upw/pix_tokenizer.hpp"

namespace upw {

struct PadSpec {
    std::size_t window_size = 16;
    std::uint32_t pad_token_id = 0;
};

// Pad id is the first id past the pix range so pix ids and the pad stay contiguous.
PadSpec make_pad_spec(std::size_t window_size, FoldingFactor f);

// A padded token grid that remembers the extent of the source image.
struct PaddedImage {
    FoldedImage image;
    std::size_t orig_width = 0;
    std::size_t orig_height = 0;
};

// Rounds width and height up to multiples of the window size, filling the new
// right and bottom cells with the pad id. Original tokens keep their coordinates.
PaddedImage pad_image(const FoldedImage& image, const PadSpec& spec);

struct WindowGrid {
    std::size_t windows_x = 0;
    std::size_t windows_y = 0;
    std::size_t window_size = 0;
    std::size_t orig_width = 0;
    std::size_t orig_height = 0;
    FoldingFactor factor{16};
    // Row-major window order; each window is window_size^2 ids in row-major pixel order.
    std::vector<std::vector<std::uint32_t>> windows;

    std::size_t window_count() const noexcept { return windows_x * windows_y; }
    std::size_t window_len() const noexcept { return window_size * window_size; }

    friend bool operator==(const WindowGrid&, const WindowGrid&) = default;
};

// Throws ErrorKind::Alignment when the dimensions are not multiples of window_size.
WindowGrid partition(const FoldedImage& image, std::size_t window_size);
WindowGrid partition(const PaddedImage& padded, std::size_t window_size);

// pad_image followed by partition.
WindowGrid to_window_grid(const FoldedImage& image, std::size_t window_size);

// Reassembles the original (unpadded) token grid. Pad ids inside the original
// region, or anything but pad ids in the margin, raise ErrorKind::Corruption.
FoldedImage unpartition(const WindowGrid& grid);

// Splits one raster-ordered window into (window_size / sub_size)^2 sub-windows,
// themselves raster-ordered, each holding its tokens in raster order.
std::vector<std::vector<std::uint32_t>> sub_partition(std::span<const std::uint32_t> window, std::size_t window_size,
                                                      std::size_t sub_size);

// Inverse of sub_partition.
std::vector<std::uint32_t> merge_sub_windows(const std::vector<std::vector<std::uint32_t>>& subs,
                                             std::size_t window_size, std::size_t sub_size);

}  // namespace upw
