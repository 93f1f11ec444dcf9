#include "upw/unified_vocab.hpp"

#include <string>

#include "upw/error.hpp"

namespace upw {
namespace {

Error invalid_token(std::uint32_t id, const char* what) {
    return Error(ErrorKind::InvalidToken, std::string(what) + " " + std::to_string(id));
}

}  // namespace

const char* to_string(TokenTag tag) noexcept {
    switch (tag) {
        case TokenTag::Word: return "word";
        case TokenTag::Pix: return "pix";
        case TokenTag::PadPix: return "pad_pix";
        case TokenTag::Bos: return "bos";
        case TokenTag::Eos: return "eos";
        case TokenTag::ImgStart: return "img_start";
        case TokenTag::ImgEnd: return "img_end";
    }
    return "unknown";
}

std::uint32_t UnifiedVocab::from_grid_id(std::uint32_t grid_id) const {
    if (grid_id > pix_count_) throw invalid_token(grid_id, "grid token out of range:");
    return kWordCount + grid_id;
}

std::uint32_t UnifiedVocab::to_grid_id(std::uint32_t unified_id) const {
    if (unified_id < pix_begin() || unified_id > pad_pix()) throw invalid_token(unified_id, "not a pix or pad id:");
    return unified_id - kWordCount;
}

std::uint32_t UnifiedVocab::to_unified(UnifiedToken token) const {
    switch (token.tag) {
        case TokenTag::Word:
            if (token.inner_id >= kWordCount) throw invalid_token(token.inner_id, "word byte out of range:");
            return token.inner_id;
        case TokenTag::Pix:
            if (token.inner_id >= pix_count_) throw invalid_token(token.inner_id, "pix id out of range:");
            return kWordCount + token.inner_id;
        case TokenTag::PadPix: return pad_pix();
        case TokenTag::Bos: return bos();
        case TokenTag::Eos: return eos();
        case TokenTag::ImgStart: return img_start();
        case TokenTag::ImgEnd: return img_end();
    }
    throw Error(ErrorKind::InvalidToken, "unknown token tag");
}

UnifiedToken UnifiedVocab::from_unified(std::uint32_t id) const {
    if (id < kWordCount) return {TokenTag::Word, id};
    if (id < pix_end()) return {TokenTag::Pix, id - kWordCount};
    if (id == pad_pix()) return {TokenTag::PadPix, 0};
    if (id == bos()) return {TokenTag::Bos, 0};
    if (id == eos()) return {TokenTag::Eos, 0};
    if (id == img_start()) return {TokenTag::ImgStart, 0};
    if (id == img_end()) return {TokenTag::ImgEnd, 0};
    throw invalid_token(id, "unified id out of range:");
}

std::uint32_t to_unified(UnifiedToken token, FoldingFactor f) { return UnifiedVocab(f).to_unified(token); }
UnifiedToken from_unified(std::uint32_t id, FoldingFactor f) { return UnifiedVocab(f).from_unified(id); }

std::vector<std::uint32_t> encode_text(std::string_view bytes) {
    std::vector<std::uint32_t> ids;
    ids.reserve(bytes.size());
    for (const char c : bytes) ids.push_back(static_cast<unsigned char>(c));
    return ids;
}

std::string decode_text(std::span<const std::uint32_t> ids) {
    std::string out;
    out.reserve(ids.size());
    for (const std::uint32_t id : ids) {
        if (id >= UnifiedVocab::kWordCount) throw invalid_token(id, "not a word token:");
        out.push_back(static_cast<char>(id));
    }
    return out;
}

std::vector<std::uint32_t> encode_image(const WindowGrid& grid) {
    const UnifiedVocab vocab(grid.factor);
    std::vector<std::uint32_t> ids;
    ids.reserve(grid.window_count() * grid.window_len() + 2);
    ids.push_back(vocab.img_start());
    for (const auto& window : grid.windows) {
        for (const std::uint32_t t : window) ids.push_back(vocab.from_grid_id(t));
    }
    ids.push_back(vocab.img_end());
    return ids;
}

WindowGrid decode_image(std::span<const std::uint32_t> ids, const WindowGrid& layout) {
    const UnifiedVocab vocab(layout.factor);
    const std::size_t len = layout.window_len();
    if (ids.size() != layout.window_count() * len + 2) throw Error(ErrorKind::Shape, "image id span has wrong length");
    if (ids.front() != vocab.img_start() || ids.back() != vocab.img_end()) {
        throw Error(ErrorKind::Corruption, "image span is not delimited by ImgStart/ImgEnd");
    }
    WindowGrid grid = layout;
    grid.windows.assign(layout.window_count(), std::vector<std::uint32_t>(len));
    for (std::size_t w = 0; w < grid.windows.size(); ++w) {
        for (std::size_t i = 0; i < len; ++i) grid.windows[w][i] = vocab.to_grid_id(ids[1 + w * len + i]);
    }
    return grid;
}

}  // namespace upw
