#include "upw/window_partitioner.hpp"

#include <string>

#include "upw/error.hpp"

namespace upw {
namespace {

std::size_t round_up(std::size_t value, std::size_t multiple) { return (value + multiple - 1) / multiple * multiple; }

void check_sub_size(std::size_t window_size, std::size_t sub_size) {
    if (sub_size == 0 || window_size % sub_size != 0) {
        throw Error(ErrorKind::Alignment, "sub-window size " + std::to_string(sub_size) +
                                              " does not divide window size " + std::to_string(window_size));
    }
}

}  // namespace

PadSpec make_pad_spec(std::size_t window_size, FoldingFactor f) { return PadSpec{window_size, vocab_size(f)}; }

PaddedImage pad_image(const FoldedImage& image, const PadSpec& spec) {
    if (spec.window_size == 0) throw Error(ErrorKind::InvalidArgument, "window size must be at least 1");
    if (spec.pad_token_id != vocab_size(image.factor)) {
        throw Error(ErrorKind::Config, "pad token id must equal the pix vocabulary size of the image's factor");
    }
    const std::size_t w = round_up(image.width, spec.window_size);
    const std::size_t h = round_up(image.height, spec.window_size);
    PaddedImage out{FoldedImage{w, h, image.factor, std::vector<std::uint32_t>(w * h, spec.pad_token_id)},
                    image.width, image.height};
    for (std::size_t y = 0; y < image.height; ++y) {
        for (std::size_t x = 0; x < image.width; ++x) out.image.tokens[y * w + x] = image.tokens[y * image.width + x];
    }
    return out;
}

WindowGrid partition(const PaddedImage& padded, std::size_t window_size) {
    const FoldedImage& image = padded.image;
    if (window_size == 0) throw Error(ErrorKind::InvalidArgument, "window size must be at least 1");
    if (image.width == 0 || image.height == 0) throw Error(ErrorKind::EmptyImage, "cannot partition an empty image");
    if (image.width % window_size != 0 || image.height % window_size != 0) {
        throw Error(ErrorKind::Alignment, "image " + std::to_string(image.width) + "x" + std::to_string(image.height) +
                                              " is not a multiple of window size " + std::to_string(window_size) +
                                              "; pad it with pad_image first");
    }
    WindowGrid grid;
    grid.windows_x = image.width / window_size;
    grid.windows_y = image.height / window_size;
    grid.window_size = window_size;
    grid.orig_width = padded.orig_width;
    grid.orig_height = padded.orig_height;
    grid.factor = image.factor;
    grid.windows.reserve(grid.window_count());
    for (std::size_t wy = 0; wy < grid.windows_y; ++wy) {
        for (std::size_t wx = 0; wx < grid.windows_x; ++wx) {
            std::vector<std::uint32_t> window;
            window.reserve(window_size * window_size);
            for (std::size_t y = 0; y < window_size; ++y) {
                const std::size_t row = (wy * window_size + y) * image.width + wx * window_size;
                window.insert(window.end(), image.tokens.begin() + static_cast<std::ptrdiff_t>(row),
                              image.tokens.begin() + static_cast<std::ptrdiff_t>(row + window_size));
            }
            grid.windows.push_back(std::move(window));
        }
    }
    return grid;
}

WindowGrid partition(const FoldedImage& image, std::size_t window_size) {
    return partition(PaddedImage{image, image.width, image.height}, window_size);
}

WindowGrid to_window_grid(const FoldedImage& image, std::size_t window_size) {
    return partition(pad_image(image, make_pad_spec(window_size, image.factor)), window_size);
}

FoldedImage unpartition(const WindowGrid& grid) {
    if (grid.windows.empty() || grid.orig_width == 0 || grid.orig_height == 0) {
        throw Error(ErrorKind::EmptyImage, "cannot unpartition an empty window grid");
    }
    const std::size_t ws = grid.window_size;
    if (grid.windows.size() != grid.window_count()) throw Error(ErrorKind::Shape, "window count mismatch");
    if (grid.windows_x * ws < grid.orig_width || grid.windows_y * ws < grid.orig_height) {
        throw Error(ErrorKind::Shape, "window grid smaller than the original image");
    }
    const std::uint32_t pad = vocab_size(grid.factor);
    FoldedImage out{grid.orig_width, grid.orig_height, grid.factor,
                    std::vector<std::uint32_t>(grid.orig_width * grid.orig_height)};
    for (std::size_t w = 0; w < grid.windows.size(); ++w) {
        const auto& window = grid.windows[w];
        if (window.size() != ws * ws) throw Error(ErrorKind::Shape, "window " + std::to_string(w) + " has wrong length");
        const std::size_t x0 = (w % grid.windows_x) * ws;
        const std::size_t y0 = (w / grid.windows_x) * ws;
        for (std::size_t i = 0; i < window.size(); ++i) {
            const std::size_t x = x0 + i % ws;
            const std::size_t y = y0 + i / ws;
            const bool inside = x < grid.orig_width && y < grid.orig_height;
            const std::uint32_t token = window[i];
            if (inside) {
                if (token >= pad) {
                    throw Error(ErrorKind::Corruption, "window " + std::to_string(w) +
                                                           " holds a non-pix token inside the original image region");
                }
                out.tokens[y * grid.orig_width + x] = token;
            } else if (token != pad) {
                throw Error(ErrorKind::Corruption, "window " + std::to_string(w) + " holds a non-pad token in the margin");
            }
        }
    }
    return out;
}

std::vector<std::vector<std::uint32_t>> sub_partition(std::span<const std::uint32_t> window, std::size_t window_size,
                                                      std::size_t sub_size) {
    check_sub_size(window_size, sub_size);
    if (window.size() != window_size * window_size) {
        throw Error(ErrorKind::Shape, "window sequence length must equal window_size^2");
    }
    const std::size_t per_side = window_size / sub_size;
    std::vector<std::vector<std::uint32_t>> subs(per_side * per_side);
    for (std::size_t s = 0; s < subs.size(); ++s) {
        const std::size_t x0 = (s % per_side) * sub_size;
        const std::size_t y0 = (s / per_side) * sub_size;
        subs[s].reserve(sub_size * sub_size);
        for (std::size_t y = 0; y < sub_size; ++y) {
            for (std::size_t x = 0; x < sub_size; ++x) subs[s].push_back(window[(y0 + y) * window_size + x0 + x]);
        }
    }
    return subs;
}

std::vector<std::uint32_t> merge_sub_windows(const std::vector<std::vector<std::uint32_t>>& subs,
                                             std::size_t window_size, std::size_t sub_size) {
    check_sub_size(window_size, sub_size);
    const std::size_t per_side = window_size / sub_size;
    if (subs.size() != per_side * per_side) throw Error(ErrorKind::Shape, "wrong number of sub-windows");
    std::vector<std::uint32_t> window(window_size * window_size);
    for (std::size_t s = 0; s < subs.size(); ++s) {
        if (subs[s].size() != sub_size * sub_size) throw Error(ErrorKind::Shape, "sub-window has wrong length");
        const std::size_t x0 = (s % per_side) * sub_size;
        const std::size_t y0 = (s / per_side) * sub_size;
        for (std::size_t i = 0; i < subs[s].size(); ++i) {
            window[(y0 + i / sub_size) * window_size + x0 + i % sub_size] = subs[s][i];
        }
    }
    return window;
}

}  // namespace upw
