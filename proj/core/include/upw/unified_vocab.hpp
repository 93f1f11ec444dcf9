#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "upw/pix_tokenizer.hpp"
#include "upw/window_partitioner.hpp"

namespace upw {

enum class TokenTag : std::uint8_t { Word, Pix, PadPix, Bos, Eos, ImgStart, ImgEnd };

const char* to_string(TokenTag tag) noexcept;

struct UnifiedToken {
    TokenTag tag = TokenTag::Word;
    std::uint32_t inner_id = 0;  // byte for Word, pix id for Pix, 0 for specials

    friend bool operator==(UnifiedToken, UnifiedToken) = default;
};

// Id layout for a factor with V pix tokens:
//   [0, 256)          word bytes
//   [256, 256 + V)    pix tokens
//   256 + V           pad pix
//   257 + V .. 260+V  Bos, Eos, ImgStart, ImgEnd
class UnifiedVocab {
public:
    static constexpr std::uint32_t kWordCount = 256;
    static constexpr std::uint32_t kSpecialCount = 5;

    explicit UnifiedVocab(FoldingFactor f) : factor_(f), pix_count_(vocab_size(f)) {}

    FoldingFactor factor() const noexcept { return factor_; }
    std::uint32_t pix_count() const noexcept { return pix_count_; }
    std::uint32_t total() const noexcept { return kWordCount + pix_count_ + kSpecialCount; }

    std::uint32_t pix_begin() const noexcept { return kWordCount; }
    std::uint32_t pix_end() const noexcept { return kWordCount + pix_count_; }
    std::uint32_t pad_pix() const noexcept { return pix_end(); }
    std::uint32_t bos() const noexcept { return pix_end() + 1; }
    std::uint32_t eos() const noexcept { return pix_end() + 2; }
    std::uint32_t img_start() const noexcept { return pix_end() + 3; }
    std::uint32_t img_end() const noexcept { return pix_end() + 4; }

    bool is_pix(std::uint32_t id) const noexcept { return id >= pix_begin() && id < pix_end(); }

    // Maps a window-grid id (pix id or the grid pad id) to its unified id.
    std::uint32_t from_grid_id(std::uint32_t grid_id) const;
    // Inverse of from_grid_id; throws InvalidToken for non-pix, non-pad ids.
    std::uint32_t to_grid_id(std::uint32_t unified_id) const;

    std::uint32_t to_unified(UnifiedToken token) const;
    UnifiedToken from_unified(std::uint32_t id) const;

private:
    FoldingFactor factor_;
    std::uint32_t pix_count_;
};

std::uint32_t to_unified(UnifiedToken token, FoldingFactor f);
UnifiedToken from_unified(std::uint32_t id, FoldingFactor f);

std::vector<std::uint32_t> encode_text(std::string_view bytes);
std::string decode_text(std::span<const std::uint32_t> ids);

// [ImgStart, window 0 ids..., window 1 ids..., ..., ImgEnd], windows in grid order.
std::vector<std::uint32_t> encode_image(const WindowGrid& grid);

// Inverse of encode_image; geometry comes from `layout` (its window contents are ignored).
WindowGrid decode_image(std::span<const std::uint32_t> ids, const WindowGrid& layout);

}  // namespace upw
