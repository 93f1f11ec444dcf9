#include "upw/model.hpp"

#include <array>
#include <numeric>
#include <random>
#include <string>

#include "upw/error.hpp"

namespace upw {
Model::Model(const ModelConfig& config, std::uint64_t seed, double init_std)
    : config_(config), vocab_((config.validate(), config.factor())) {
    std::mt19937_64 rng(seed);
    const std::size_t idim = config_.image_dim;
    const std::size_t gdim = config_.dim;

    pix_embed_ = add_param("local.pix_embed", vocab_.pix_count() + 1, idim);
    local_pos_ = add_param("local.pos", config_.window_len() + 1, idim);
    for (std::size_t i = 0; i < config_.image_layers; ++i) {
        local_blocks_.push_back(add_block("local.block" + std::to_string(i), idim));
    }
    local_norm_ = add_norm("local.norm", idim);
    local_out_ = add_linear("local.out", idim, gdim);
    condition_proj_ = add_linear("condition_proj", gdim, idim);
    window_proj_ = add_linear("window_proj", idim, gdim);

    token_embed_ = add_param("global.token_embed", vocab_.total(), gdim);
    global_pos_ = add_param("global.pos", config_.global_context(), gdim);
    for (std::size_t i = 0; i < config_.layers; ++i) {
        global_blocks_.push_back(add_block("global.block" + std::to_string(i), gdim));
    }
    global_norm_ = add_norm("global.norm", gdim);
    head_ = add_linear("head", gdim, vocab_.total());

    // Weights ~ N(0), drawn in parameter order; biases zero, norms identity.
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Parameter& param : params_) {
        const bool is_weight = param.name.ends_with(".weight") || param.name.ends_with("embed") ||
                               param.name.ends_with(".pos");
        if (param.name.ends_with(".gamma")) {
            std::fill(param.value.data.begin(), param.value.data.end(), 1.0);
        } else if (is_weight) {
            for (double& v : param.value.data) v = init_std * normal(rng);
        }
    }

    const std::size_t len = config_.window_len();
    const std::optional<std::size_t> sub =
        config_.sub_window != 0 ? std::optional<std::size_t>(config_.sub_window) : std::nullopt;
    plain_mask_ = local_window_mask(len, 0, sub);
    const AttentionMask window_rows = local_window_mask(len, 1, sub);
    conditioned_mask_ = AttentionMask(len + 1, len + 1);
    conditioned_mask_.set(0, 0, true);
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t j = 0; j <= len; ++j) conditioned_mask_.set(i + 1, j, window_rows(i, j));
    }
}

std::size_t Model::add_param(std::string name, std::size_t rows, std::size_t cols) {
    params_.emplace_back(std::move(name), Tensor(rows, cols));
    return params_.size() - 1;
}

Model::Linear Model::add_linear(const std::string& name, std::size_t in, std::size_t out) {
    Linear l;
    l.weight = add_param(name + ".weight", in, out);
    l.bias = add_param(name + ".bias", 1, out);
    return l;
}

Model::Norm Model::add_norm(const std::string& name, std::size_t width) {
    Norm n;
    n.gamma = add_param(name + ".gamma", 1, width);
    n.beta = add_param(name + ".beta", 1, width);
    return n;
}

Model::Block Model::add_block(const std::string& name, std::size_t width) {
    const std::size_t head_dim = width / config_.heads;
    const std::size_t kv_width = head_dim * config_.kv_heads;
    Block b;
    b.ln1 = add_norm(name + ".ln1", width);
    b.wq = add_linear(name + ".wq", width, width);
    b.wk = add_linear(name + ".wk", width, kv_width);
    b.wv = add_linear(name + ".wv", width, kv_width);
    b.wo = add_linear(name + ".wo", width, width);
    b.ln2 = add_norm(name + ".ln2", width);
    b.up = add_linear(name + ".up", width, 4 * width);
    b.down = add_linear(name + ".down", 4 * width, width);
    return b;
}

Parameter* Model::find(std::string_view name) {
    for (Parameter& param : params_) {
        if (param.name == name) return &param;
    }
    return nullptr;
}

std::size_t Model::parameter_count() const {
    return std::accumulate(params_.begin(), params_.end(), std::size_t{0},
                           [](std::size_t acc, const Parameter& p) { return acc + p.value.size(); });
}

void Model::zero_grad() {
    for (Parameter& param : params_) param.zero_grad();
}

Var Model::linear(Graph& g, const Linear& l, Var x) { return add_row(g, matmul(g, x, p(g, l.weight)), p(g, l.bias)); }

Var Model::norm(Graph& g, const Norm& n, Var x) { return layer_norm(g, x, p(g, n.gamma), p(g, n.beta)); }

Var Model::feed_forward(Graph& g, const Block& b, Var x) {
    const Var h = norm(g, b.ln2, x);
    return add(g, x, linear(g, b.down, gelu(g, linear(g, b.up, h))));
}

Var Model::block_forward(Graph& g, const Block& b, Var x, const AttentionMask& mask) {
    const Var h = norm(g, b.ln1, x);
    const Var q = linear(g, b.wq, h);
    const Var k = linear(g, b.wk, h);
    const Var v = linear(g, b.wv, h);
    const Var a = attention(g, q, std::span<const Var>(&k, 1), std::span<const Var>(&v, 1), mask, config_.heads,
                            config_.kv_heads);
    return feed_forward(g, b, add(g, x, linear(g, b.wo, a)));
}

LocalOutput Model::forward_local(Graph& g, std::span<const std::uint32_t> ids, std::optional<Var> condition) {
    const std::size_t len = ids.size();
    if ((len == 0 && !condition) || len > config_.window_len()) {
        throw Error(ErrorKind::Shape, "local window of " + std::to_string(len) + " tokens; expected " +
                                          (condition ? "0.." : "1..") + std::to_string(config_.window_len()));
    }
    std::vector<std::uint32_t> rows(len);
    for (std::size_t i = 0; i < len; ++i) rows[i] = vocab_.to_grid_id(ids[i]);

    const Var pos = p(g, local_pos_);
    Var x;
    AttentionMask mask;
    if (condition) {
        const Tensor& c = g.value(*condition);
        if (c.rows != 1 || c.cols != config_.image_dim) {
            throw Error(ErrorKind::Shape, "condition embedding must be 1 x image_dim (" +
                                              std::to_string(config_.image_dim) + ")");
        }
        x = add(g, *condition, slice_rows(g, pos, 0, 1));
        if (len > 0) {
            const Var tokens = add(g, embedding(g, p(g, pix_embed_), rows), slice_rows(g, pos, 1, len));
            const std::array<Var, 2> parts{x, tokens};
            x = concat_rows(g, parts);
        }
        mask = conditioned_mask_.slice(len + 1, len + 1);
    } else {
        x = add(g, embedding(g, p(g, pix_embed_), rows), slice_rows(g, pos, 1, len));
        mask = plain_mask_.slice(len, len);
    }
    for (const Block& b : local_blocks_) x = block_forward(g, b, x, mask);
    const std::size_t total_rows = g.value(x).rows;
    return LocalOutput{x, slice_rows(g, x, total_rows - 1, 1)};
}

Var Model::condition_from_global(Graph& g, Var global_hidden) { return linear(g, condition_proj_, global_hidden); }

Var Model::window_to_global(Graph& g, Var window_embedding) { return linear(g, window_proj_, window_embedding); }

Var Model::local_head_input(Graph& g, Var local_hidden) {
    return linear(g, local_out_, norm(g, local_norm_, local_hidden));
}

Var Model::embed_tokens(Graph& g, std::span<const std::uint32_t> ids) { return embedding(g, p(g, token_embed_), ids); }

GlobalState Model::begin_global() const {
    GlobalState state;
    state.keys.resize(global_blocks_.size());
    state.values.resize(global_blocks_.size());
    return state;
}

Var Model::step_global(Graph& g, GlobalState& state, Var input_row) {
    const Tensor& in = g.value(input_row);
    if (in.rows != 1 || in.cols != config_.dim) throw Error(ErrorKind::Shape, "global input row must be 1 x dim");
    if (state.position >= config_.global_context()) {
        throw Error(ErrorKind::Shape, "global sequence longer than max_seq_len (" +
                                          std::to_string(config_.global_context()) + ")");
    }
    Var x = add(g, input_row, slice_rows(g, p(g, global_pos_), state.position, 1));
    for (std::size_t l = 0; l < global_blocks_.size(); ++l) {
        const Block& b = global_blocks_[l];
        const Var h = norm(g, b.ln1, x);
        const Var q = linear(g, b.wq, h);
        state.keys[l].push_back(linear(g, b.wk, h));
        state.values[l].push_back(linear(g, b.wv, h));
        const AttentionMask all(1, state.keys[l].size(), true);
        const Var a = attention(g, q, state.keys[l], state.values[l], all, config_.heads, config_.kv_heads);
        x = feed_forward(g, b, add(g, x, linear(g, b.wo, a)));
    }
    ++state.position;
    return norm(g, global_norm_, x);
}

Var Model::forward_global(Graph& g, Var inputs) {
    const std::size_t n = g.value(inputs).rows;
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "global sequence is empty");
    GlobalState state = begin_global();
    std::vector<Var> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(step_global(g, state, slice_rows(g, inputs, i, 1)));
    return concat_rows(g, rows);
}

Var Model::predict_logits(Graph& g, Var hidden) {
    if (g.value(hidden).cols != config_.dim) throw Error(ErrorKind::Shape, "head input width must equal dim");
    return linear(g, head_, hidden);
}

SequenceLoss Model::sequence_loss(Graph& g, const Sequence& seq, std::vector<TargetLoss>* per_target) {
    if (seq.items.empty()) throw Error(ErrorKind::InvalidArgument, "sequence is empty");
    if (seq.items.front().kind != GlobalItem::Kind::Token) {
        throw Error(ErrorKind::InvalidArgument, "sequence must start with a token (e.g. ImgStart)");
    }
    GlobalState state = begin_global();
    std::vector<Var> head_rows;
    std::vector<std::int64_t> targets;
    std::vector<TargetLoss> info;
    Var previous;

    for (std::size_t i = 0; i < seq.items.size(); ++i) {
        const GlobalItem& item = seq.items[i];
        Var input;
        if (item.kind == GlobalItem::Kind::Token) {
            if (previous.valid()) {
                head_rows.push_back(previous);
                targets.push_back(item.token);
                info.push_back(TargetLoss{i, 0, item.token, 0.0, true});
            }
            input = embed_tokens(g, std::span<const std::uint32_t>(&item.token, 1));
        } else {
            const WindowGrid& grid = seq.images.at(item.image);
            const auto& window = grid.windows.at(item.window);
            std::vector<std::uint32_t> ids(window.size());
            for (std::size_t k = 0; k < window.size(); ++k) ids[k] = vocab_.from_grid_id(window[k]);
            const LocalOutput local = forward_local(g, ids, condition_from_global(g, previous));
            head_rows.push_back(local_head_input(g, slice_rows(g, local.hidden, 0, ids.size())));
            for (std::size_t k = 0; k < ids.size(); ++k) {
                const bool counted = ids[k] != vocab_.pad_pix();
                targets.push_back(counted ? static_cast<std::int64_t>(ids[k]) : -1);
                info.push_back(TargetLoss{i, k, ids[k], 0.0, counted});
            }
            input = window_to_global(g, local.window_embedding);
        }
        if (i + 1 < seq.items.size()) previous = step_global(g, state, input);
    }

    SequenceLoss result;
    if (targets.empty()) {
        result.total = g.constant(Tensor(1, 1));
        return result;
    }
    std::vector<double> row_losses;
    const Var logits = predict_logits(g, concat_rows(g, head_rows));
    result.total = cross_entropy_sum(g, logits, targets, per_target ? &row_losses : nullptr);
    for (const std::int64_t t : targets) result.count += t >= 0 ? 1 : 0;
    if (per_target) {
        for (std::size_t k = 0; k < info.size(); ++k) info[k].loss = row_losses[k];
        *per_target = std::move(info);
    }
    return result;
}

}  // namespace upw
