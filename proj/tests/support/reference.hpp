#pragma once
// Straightforward re-implementations used as test oracles, plus a probe that
// exposes the logits and window embeddings of a sequence.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "upw/attention.hpp"
#include "upw/model.hpp"
#include "upw/sequence.hpp"

namespace upw::testing {

// Plain multi-head attention, one head at a time, no grouping and no shared code
// with the library kernel.
inline Tensor reference_mha(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask& mask,
                            std::size_t heads) {
    const std::size_t d = q.cols / heads;
    Tensor out(q.rows, q.cols);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < q.rows; ++i) {
            std::vector<double> s(k.rows, -std::numeric_limits<double>::infinity());
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k.rows; ++j) {
                if (!mask(i, j)) continue;
                double dot = 0.0;
                for (std::size_t c = 0; c < d; ++c) dot += q(i, h * d + c) * k(j, h * d + c);
                s[j] = dot / std::sqrt(static_cast<double>(d));
                best = std::max(best, s[j]);
            }
            double z = 0.0;
            for (double& x : s) {
                x = std::isinf(x) ? 0.0 : std::exp(x - best);
                z += x;
            }
            for (std::size_t j = 0; j < k.rows; ++j) {
                for (std::size_t c = 0; c < d; ++c) out(i, h * d + c) += s[j] / z * v(j, h * d + c);
            }
        }
    }
    return out;
}

// Copies each of kv_heads column groups heads/kv_heads times.
inline Tensor repeat_kv(const Tensor& x, std::size_t heads, std::size_t kv_heads) {
    const std::size_t d = x.cols / kv_heads;
    const std::size_t group = heads / kv_heads;
    Tensor out(x.rows, heads * d);
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t h = 0; h < heads; ++h) {
            for (std::size_t c = 0; c < d; ++c) out(r, h * d + c) = x(r, (h / group) * d + c);
        }
    }
    return out;
}

inline Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Tensor t(r, c);
    for (double& x : t.data) x = n(rng);
    return t;
}

struct SequenceProbe {
    std::vector<std::vector<double>> logits;             // one row per prediction, in order
    std::vector<std::vector<double>> window_embeddings;  // one per window item
};

// Mirrors the training forward pass without building gradients.
inline SequenceProbe probe_sequence(Model& model, const Sequence& seq) {
    Graph g(false);
    GlobalState state = model.begin_global();
    SequenceProbe probe;
    Var previous;
    auto push_logits = [&](Var head_rows) {
        const Tensor& t = g.value(model.predict_logits(g, head_rows));
        for (std::size_t r = 0; r < t.rows; ++r) probe.logits.emplace_back(t.row(r).begin(), t.row(r).end());
    };
    for (std::size_t i = 0; i < seq.items.size(); ++i) {
        const GlobalItem& item = seq.items[i];
        Var input;
        if (item.kind == GlobalItem::Kind::Token) {
            if (previous.valid()) push_logits(previous);
            input = model.embed_tokens(g, std::span<const std::uint32_t>(&item.token, 1));
        } else {
            const auto& window = seq.images.at(item.image).windows.at(item.window);
            std::vector<std::uint32_t> ids;
            for (std::uint32_t t : window) ids.push_back(model.vocab().from_grid_id(t));
            const LocalOutput local = model.forward_local(g, ids, model.condition_from_global(g, previous));
            push_logits(model.local_head_input(g, slice_rows(g, local.hidden, 0, ids.size())));
            const Tensor& e = g.value(local.window_embedding);
            probe.window_embeddings.emplace_back(e.data.begin(), e.data.end());
            input = model.window_to_global(g, local.window_embedding);
        }
        if (i + 1 < seq.items.size()) previous = model.step_global(g, state, input);
    }
    return probe;
}

}  // namespace upw::testing
