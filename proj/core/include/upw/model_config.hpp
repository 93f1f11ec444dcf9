#pragma once

#include <cstddef>
#include <string>

#include "upw/key_value.hpp"
#include "upw/pix_tokenizer.hpp"

namespace upw {

// Hyperparameters of the hierarchical model. Defaults are the reference
// full-size configuration; tiny() is the desk-scale configuration used for
// tests and smoke training.
struct ModelConfig {
    std::size_t dim = 768;
    std::size_t layers = 12;
    std::size_t heads = 12;
    std::size_t kv_heads = 6;
    std::size_t image_dim = 768;
    std::size_t image_layers = 5;
    std::size_t fold_factor = 16;
    std::size_t image_size = 224;
    std::size_t window_size = 16;
    // Side of the sub-window attention pattern inside each window; 0 disables it.
    std::size_t sub_window = 0;
    // Rows of the global position table; 0 means one image plus its delimiters.
    std::size_t max_seq_len = 0;

    static ModelConfig tiny();

    // Throws ErrorKind::Config on the first violated invariant.
    void validate() const;

    FoldingFactor factor() const { return FoldingFactor(static_cast<int>(fold_factor)); }
    std::size_t windows_per_side() const { return (image_size + window_size - 1) / window_size; }
    std::size_t windows_per_image() const { return windows_per_side() * windows_per_side(); }
    std::size_t window_len() const { return window_size * window_size; }
    std::size_t global_context() const { return max_seq_len != 0 ? max_seq_len : windows_per_image() + 2; }

    // Key/value text using the field names above.
    std::string to_key_values() const;
    // Reads known keys, consuming them from kv; missing keys keep defaults from `base`.
    static ModelConfig take_from(KeyValues& kv, const ModelConfig& base);
    static ModelConfig take_from(KeyValues& kv);

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace upw
