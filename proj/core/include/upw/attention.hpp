#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "upw/tensor.hpp"

namespace upw {

// Boolean [query_len x key_len] matrix; true means the key is attendable.
struct AttentionMask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> allowed;

    AttentionMask() = default;
    AttentionMask(std::size_t r, std::size_t c, bool fill = false) : rows(r), cols(c), allowed(r * c, fill ? 1 : 0) {}

    bool operator()(std::size_t r, std::size_t c) const { return allowed[r * cols + c] != 0; }
    void set(std::size_t r, std::size_t c, bool v) { allowed[r * cols + c] = v ? 1 : 0; }

    // Copy of the top-left block.
    AttentionMask slice(std::size_t r, std::size_t c) const;

    friend bool operator==(const AttentionMask&, const AttentionMask&) = default;
};

AttentionMask causal_mask(std::size_t len);

// Mask for the local stack: window_len query rows over condition_len prefix keys
// followed by window_len window keys. Prefix keys are visible to every row and
// window keys are causal. With sub_size, the window is taken as a raster-ordered
// square of side sqrt(window_len) cut into sub_size squares, and a row only sees
// window keys from its own sub-window or from earlier sub-windows already
// complete at that position.
AttentionMask local_window_mask(std::size_t window_len, std::size_t condition_len,
                                std::optional<std::size_t> sub_size = std::nullopt);

// Throws ErrorKind::Config if kv_heads does not divide heads or either is zero.
void check_head_grouping(std::size_t heads, std::size_t kv_heads);

// Scaled dot-product attention with grouped key/value heads.
// q is [n x heads*d]; k and v are [m x kv_heads*d]. Query head h reads kv head
// h / (heads / kv_heads). Returns the concatenated heads [n x heads*d]; the output
// projection belongs to the caller. If probs is non-null it receives the
// per-head probability matrices, heads blocks of n x m.
Tensor gqa_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask& mask, std::size_t heads,
                     std::size_t kv_heads, std::vector<double>* probs = nullptr);

namespace detail {

// Row-block view over keys/values so that callers can attend over
// non-contiguous blocks without copying them.
struct RowBlocks {
    std::vector<const Tensor*> blocks;
    std::size_t rows() const;
    std::size_t cols() const;
    const double* row(std::size_t r) const;
};

void attention_forward(const Tensor& q, const RowBlocks& k, const RowBlocks& v, const AttentionMask& mask,
                       std::size_t heads, std::size_t kv_heads, Tensor& out, std::vector<double>& probs);

}  // namespace detail
}  // namespace upw
