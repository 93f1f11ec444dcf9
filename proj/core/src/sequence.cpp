#include "upw/sequence.hpp"

#include "upw/error.hpp"

namespace upw {
namespace {

void append_windows(Sequence& seq, const WindowGrid& grid) {
    const std::size_t image = seq.images.size();
    seq.images.push_back(grid);
    for (std::size_t w = 0; w < grid.window_count(); ++w) {
        seq.items.push_back(GlobalItem{GlobalItem::Kind::Window, 0, image, w});
    }
}

GlobalItem token_item(std::uint32_t id) { return GlobalItem{GlobalItem::Kind::Token, id, 0, 0}; }

}  // namespace

Sequence image_sequence(const WindowGrid& grid) {
    Sequence seq;
    seq.items.push_back(token_item(UnifiedVocab(grid.factor).img_start()));
    append_windows(seq, grid);
    return seq;
}

Sequence mixed_sequence(std::span<const Segment> segments, FoldingFactor f) {
    const UnifiedVocab vocab(f);
    Sequence seq;
    for (const Segment& segment : segments) {
        if (const auto* text = std::get_if<std::string>(&segment)) {
            for (const std::uint32_t id : encode_text(*text)) seq.items.push_back(token_item(id));
        } else {
            const auto& grid = std::get<WindowGrid>(segment);
            if (grid.factor != f) throw Error(ErrorKind::Config, "image folded with a different factor");
            seq.items.push_back(token_item(vocab.img_start()));
            append_windows(seq, grid);
            seq.items.push_back(token_item(vocab.img_end()));
        }
    }
    return seq;
}

}  // namespace upw
