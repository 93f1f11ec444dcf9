#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "upw/attention.hpp"
#include "upw/autograd.hpp"
#include "upw/model_config.hpp"
#include "upw/sequence.hpp"
#include "upw/tensor.hpp"
#include "upw/unified_vocab.hpp"

namespace upw {

struct LocalOutput {
    Var hidden;            // residual stream, one row per local position
    Var window_embedding;  // 1 x image_dim, the row of the last window position
};

// Per-layer key/value rows of the global stack seen so far.
struct GlobalState {
    std::vector<std::vector<Var>> keys;
    std::vector<std::vector<Var>> values;
    std::size_t position = 0;
};

struct TargetLoss {
    std::size_t item = 0;       // index into Sequence::items
    std::size_t offset = 0;     // pixel index inside the window (0 for token items)
    std::uint32_t target = 0;   // unified id
    double loss = 0.0;          // nats; 0 for excluded pad targets
    bool counted = true;
};

struct SequenceLoss {
    Var total;               // 1x1 sum over counted targets
    std::size_t count = 0;   // number of counted targets
};

// Hierarchical model: a local stack over the pix tokens of one window,
// conditioned on a projected global hidden state, and a global causal stack
// over word tokens and window embeddings. One prediction head over the
// unified vocabulary serves both stacks. Both stacks use grouped-query
// attention with pre-norm blocks and GELU feed-forward layers.
class Model {
public:
    Model(const ModelConfig& config, std::uint64_t seed, double init_std = 0.02);

    const ModelConfig& config() const noexcept { return config_; }
    const UnifiedVocab& vocab() const noexcept { return vocab_; }

    std::vector<Parameter>& parameters() noexcept { return params_; }
    const std::vector<Parameter>& parameters() const noexcept { return params_; }
    Parameter* find(std::string_view name);
    std::size_t parameter_count() const;
    void zero_grad();

    // Local stack over unified pix/pad ids of one window (possibly a prefix of
    // it). With a condition (1 x image_dim) the sequence is [condition, ids...],
    // otherwise just ids (which must then be non-empty). Token j always sits at
    // local position j + 1.
    LocalOutput forward_local(Graph& g, std::span<const std::uint32_t> ids, std::optional<Var> condition);

    // Global hidden row (1 x dim) -> local conditioning prefix (1 x image_dim).
    Var condition_from_global(Graph& g, Var global_hidden);
    // Window embedding (1 x image_dim) -> global input row (1 x dim).
    Var window_to_global(Graph& g, Var window_embedding);
    // Local residual rows -> rows of width dim ready for the prediction head.
    Var local_head_input(Graph& g, Var local_hidden);

    Var embed_tokens(Graph& g, std::span<const std::uint32_t> ids);
    GlobalState begin_global() const;
    // Feeds one input row (1 x dim) and returns its normalized hidden row.
    Var step_global(Graph& g, GlobalState& state, Var input_row);
    // Causal global stack over n input rows; returns n x dim hidden rows.
    Var forward_global(Graph& g, Var inputs);

    // Affine head, n x dim -> n x total_vocab.
    Var predict_logits(Graph& g, Var hidden);

    // Teacher-forced next-token loss over a sequence. Pix tokens are predicted
    // by the local stack, token items by the global stack from the previous
    // position. Pad pix targets are excluded.
    SequenceLoss sequence_loss(Graph& g, const Sequence& seq, std::vector<TargetLoss>* per_target = nullptr);

private:
    struct Linear {
        std::size_t weight = 0;
        std::size_t bias = 0;
    };
    struct Norm {
        std::size_t gamma = 0;
        std::size_t beta = 0;
    };
    struct Block {
        Norm ln1;
        Linear wq, wk, wv, wo;
        Norm ln2;
        Linear up, down;
    };

    std::size_t add_param(std::string name, std::size_t rows, std::size_t cols);
    Linear add_linear(const std::string& name, std::size_t in, std::size_t out);
    Norm add_norm(const std::string& name, std::size_t width);
    Block add_block(const std::string& name, std::size_t width);

    Var p(Graph& g, std::size_t index) { return g.param(params_[index]); }
    Var linear(Graph& g, const Linear& l, Var x);
    Var norm(Graph& g, const Norm& n, Var x);
    Var block_forward(Graph& g, const Block& b, Var x, const AttentionMask& mask);
    Var feed_forward(Graph& g, const Block& b, Var x);

    ModelConfig config_;
    UnifiedVocab vocab_;
    std::vector<Parameter> params_;

    std::size_t pix_embed_ = 0;
    std::size_t local_pos_ = 0;
    std::vector<Block> local_blocks_;
    Norm local_norm_;
    Linear local_out_;
    Linear condition_proj_;
    Linear window_proj_;

    std::size_t token_embed_ = 0;
    std::size_t global_pos_ = 0;
    std::vector<Block> global_blocks_;
    Norm global_norm_;
    Linear head_;

    AttentionMask conditioned_mask_;
    AttentionMask plain_mask_;
};

}  // namespace upw
