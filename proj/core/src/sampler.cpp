#include "upw/sampler.hpp"

#include <cmath>
#include <random>

#include "upw/error.hpp"
#include "upw/window_partitioner.hpp"

namespace upw {
namespace {

std::uint32_t choose(std::span<const double> logits, double temperature, std::mt19937_64& rng) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[best]) best = i;
    }
    if (temperature <= 0.0) return static_cast<std::uint32_t>(best);

    std::vector<double> weights(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        weights[i] = std::exp((logits[i] - logits[best]) / temperature);
        total += weights[i];
    }
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<std::uint32_t>(i);
    }
    return static_cast<std::uint32_t>(best);
}

}  // namespace

FoldedImage sample_image(Model& model, const SampleOptions& options) {
    const ModelConfig& cfg = model.config();
    const UnifiedVocab& vocab = model.vocab();
    const std::size_t ws = cfg.window_size;
    const std::size_t per_side = cfg.windows_per_side();
    const std::size_t len = cfg.window_len();
    std::mt19937_64 rng(options.seed);

    WindowGrid grid;
    grid.windows_x = grid.windows_y = per_side;
    grid.window_size = ws;
    grid.orig_width = grid.orig_height = cfg.image_size;
    grid.factor = cfg.factor();

    Graph global(false);
    GlobalState state = model.begin_global();
    const std::uint32_t start = vocab.img_start();
    Var hidden = model.step_global(global, state, model.embed_tokens(global, std::span<const std::uint32_t>(&start, 1)));

    for (std::size_t w = 0; w < per_side * per_side; ++w) {
        const Tensor condition = global.value(model.condition_from_global(global, hidden));
        const std::size_t x0 = (w % per_side) * ws;
        const std::size_t y0 = (w / per_side) * ws;

        std::vector<std::uint32_t> ids;
        ids.reserve(len);
        for (std::size_t k = 0; k < len; ++k) {
            const bool margin = x0 + k % ws >= cfg.image_size || y0 + k / ws >= cfg.image_size;
            if (margin) {
                ids.push_back(vocab.pad_pix());
                continue;
            }
            Graph g(false);
            const Var cond = g.constant(condition);
            const LocalOutput local = model.forward_local(g, ids, cond);
            const Var row = slice_rows(g, local.hidden, ids.size(), 1);
            const Tensor& logits = g.value(model.predict_logits(g, model.local_head_input(g, row)));
            const std::span<const double> pix(logits.data.data() + vocab.pix_begin(), vocab.pix_count());
            ids.push_back(vocab.pix_begin() + choose(pix, options.temperature, rng));
        }

        std::vector<std::uint32_t> window(len);
        for (std::size_t k = 0; k < len; ++k) window[k] = vocab.to_grid_id(ids[k]);
        grid.windows.push_back(std::move(window));

        if (w + 1 < per_side * per_side) {
            Graph g(false);
            const LocalOutput local = model.forward_local(g, ids, g.constant(condition));
            const Tensor embedding = g.value(local.window_embedding);
            hidden = model.step_global(global, state, model.window_to_global(global, global.constant(embedding)));
        }
    }
    return unpartition(grid);
}

}  // namespace upw
