#include "upw/diagnostics.hpp"

#include <random>

#include "upw/autograd.hpp"
#include "upw/model.hpp"
#include "upw/trainer.hpp"

namespace upw {
namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, double std_dev, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, std_dev);
    Tensor t(rows, cols);
    for (double& v : t.data) v = normal(rng);
    return t;
}

std::vector<Parameter*> pointers(std::vector<Parameter>& params) {
    std::vector<Parameter*> out;
    for (Parameter& p : params) out.push_back(&p);
    return out;
}

// Runs `build` on a fresh graph; with backprop the result is differentiated.
template <typename Build>
ObjectiveFn objective(Build build) {
    return [build](bool backprop) {
        Graph g(backprop);
        const Var out = build(g);
        const double value = g.value(out)(0, 0);
        if (backprop) g.backward(out);
        return value;
    };
}

}  // namespace

GradCheckReport grad_check_linear(const GradCheckOptions& options, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Parameter> params;
    params.emplace_back("x", random_tensor(3, 4, 1.0, rng));
    params.emplace_back("w", random_tensor(4, 5, 1.0, rng));
    params.emplace_back("b", random_tensor(1, 5, 1.0, rng));
    const Tensor weights = random_tensor(3, 5, 1.0, rng);
    auto build = [&params, weights](Graph& g) {
        const Var y = add_row(g, matmul(g, g.param(params[0]), g.param(params[1])), g.param(params[2]));
        return weighted_sum(g, y, weights);
    };
    const auto ptrs = pointers(params);
    return grad_check(ptrs, objective(build), options);
}

GradCheckReport grad_check_feed_forward(std::size_t width, std::size_t rows, const GradCheckOptions& options,
                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Parameter> params;
    params.emplace_back("x", random_tensor(rows, width, 1.0, rng));
    params.emplace_back("ln.gamma", random_tensor(1, width, 0.3, rng));
    params.emplace_back("ln.beta", random_tensor(1, width, 0.3, rng));
    params.emplace_back("up.weight", random_tensor(width, 4 * width, 0.3, rng));
    params.emplace_back("up.bias", random_tensor(1, 4 * width, 0.3, rng));
    params.emplace_back("down.weight", random_tensor(4 * width, width, 0.3, rng));
    params.emplace_back("down.bias", random_tensor(1, width, 0.3, rng));
    for (double& v : params[1].value.data) v += 1.0;
    const Tensor weights = random_tensor(rows, width, 1.0, rng);
    auto build = [&params, weights](Graph& g) {
        auto P = [&](std::size_t i) { return g.param(params[i]); };
        const Var x = P(0);
        const Var h = layer_norm(g, x, P(1), P(2));
        const Var u = gelu(g, add_row(g, matmul(g, h, P(3)), P(4)));
        const Var y = add(g, x, add_row(g, matmul(g, u, P(5)), P(6)));
        return weighted_sum(g, y, weights);
    };
    const auto ptrs = pointers(params);
    return grad_check(ptrs, objective(build), options);
}

GradCheckReport grad_check_attention_block(std::size_t width, std::size_t rows, std::size_t heads,
                                           std::size_t kv_heads, const GradCheckOptions& options, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t kv_width = width / heads * kv_heads;
    std::vector<Parameter> params;
    params.emplace_back("x", random_tensor(rows, width, 1.0, rng));
    params.emplace_back("ln.gamma", random_tensor(1, width, 0.3, rng));
    params.emplace_back("ln.beta", random_tensor(1, width, 0.3, rng));
    params.emplace_back("wq", random_tensor(width, width, 0.5, rng));
    params.emplace_back("wk", random_tensor(width, kv_width, 0.5, rng));
    params.emplace_back("wv", random_tensor(width, kv_width, 0.5, rng));
    params.emplace_back("wo", random_tensor(width, width, 0.5, rng));
    for (double& v : params[1].value.data) v += 1.0;
    const Tensor weights = random_tensor(rows, width, 1.0, rng);
    const AttentionMask mask = causal_mask(rows);
    auto build = [&params, weights, mask, heads, kv_heads](Graph& g) {
        auto P = [&](std::size_t i) { return g.param(params[i]); };
        const Var x = P(0);
        const Var h = layer_norm(g, x, P(1), P(2));
        const Var q = matmul(g, h, P(3));
        const Var k = matmul(g, h, P(4));
        const Var v = matmul(g, h, P(5));
        const Var a = attention(g, q, std::span<const Var>(&k, 1), std::span<const Var>(&v, 1), mask, heads, kv_heads);
        const Var y = add(g, x, matmul(g, a, P(6)));
        return weighted_sum(g, y, weights);
    };
    const auto ptrs = pointers(params);
    return grad_check(ptrs, objective(build), options);
}

GradCheckReport grad_check_cross_entropy(std::size_t rows, std::size_t classes, const GradCheckOptions& options,
                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Parameter> params;
    params.emplace_back("logits", random_tensor(rows, classes, 1.0, rng));
    std::vector<std::int64_t> targets(rows);
    for (std::size_t i = 0; i < rows; ++i) targets[i] = i % 3 == 2 ? -1 : static_cast<std::int64_t>(rng() % classes);
    auto build = [&params, targets](Graph& g) { return cross_entropy_sum(g, g.param(params[0]), targets); };
    const auto ptrs = pointers(params);
    return grad_check(ptrs, objective(build), options);
}

GradCheckReport grad_check_full_model(const ModelConfig& config, double init_std, const GradCheckOptions& options,
                                      std::uint64_t seed) {
    Model model(config, seed, init_std);
    std::mt19937_64 rng(seed + 7);
    RgbImage img(config.image_size, config.image_size);
    for (auto& px : img.pixels) px = static_cast<std::uint8_t>(rng() & 0xFF);
    const std::vector<RgbImage> images{img};
    const std::vector<Sequence> data = image_sequences(images, config);

    auto build = [&model, &data](Graph& g) {
        const SequenceLoss l = model.sequence_loss(g, data[0]);
        return scale(g, l.total, 1.0 / static_cast<double>(l.count));
    };
    const auto ptrs = pointers(model.parameters());
    return grad_check(ptrs, objective(build), options);
}

std::vector<NamedGradCheck> standard_grad_checks(const GradCheckOptions& options, std::uint64_t seed) {
    std::vector<NamedGradCheck> out;
    out.push_back({"linear", 1e-8, grad_check_linear(options, seed)});
    out.push_back({"feed_forward", 1e-4, grad_check_feed_forward(8, 5, options, seed)});
    out.push_back({"attention_mha", 1e-4, grad_check_attention_block(8, 5, 2, 2, options, seed)});
    out.push_back({"attention_gqa", 1e-4, grad_check_attention_block(8, 5, 4, 2, options, seed)});
    out.push_back({"cross_entropy", 1e-4, grad_check_cross_entropy(6, 11, options, seed)});
    GradCheckOptions full = options;
    if (full.max_coords_per_param == 0) full.max_coords_per_param = 16;
    out.push_back({"full_tiny_model", 1e-3, grad_check_full_model(ModelConfig::tiny(), 0.02, full, seed)});
    return out;
}

}  // namespace upw
