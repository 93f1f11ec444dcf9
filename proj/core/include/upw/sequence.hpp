#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "upw/unified_vocab.hpp"
#include "upw/window_partitioner.hpp"

namespace upw {

// One entry of the global (unified) sequence: either a single unified token or
// a whole local window standing in for its pixels.
struct GlobalItem {
    enum class Kind : std::uint8_t { Token, Window };
    Kind kind = Kind::Token;
    std::uint32_t token = 0;   // Token: unified id
    std::size_t image = 0;     // Window: index into Sequence::images
    std::size_t window = 0;    // Window: window index inside that image
};

struct Sequence {
    std::vector<GlobalItem> items;
    std::vector<WindowGrid> images;

    std::size_t size() const noexcept { return items.size(); }
};

using Segment = std::variant<std::string, WindowGrid>;

// [ImgStart, window 0, ..., window n-1]; the image-only pretraining sample.
Sequence image_sequence(const WindowGrid& grid);

// Text bytes become word tokens; each image becomes ImgStart, its windows, ImgEnd.
Sequence mixed_sequence(std::span<const Segment> segments, FoldingFactor f);

}  // namespace upw
