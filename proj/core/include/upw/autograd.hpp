#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "upw/attention.hpp"
#include "upw/tensor.hpp"

namespace upw {

// Handle to a node on a Graph tape.
struct Var {
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t index = kNone;
    bool valid() const noexcept { return index != kNone; }
};

// Reverse-mode tape. Nodes are recorded in creation order, so walking the tape
// backwards visits every node after all of its consumers. A graph built with
// tracking disabled records values only and cannot be differentiated.
class Graph {
public:
    using BackwardFn = std::function<void(Graph&, std::size_t self)>;

    explicit Graph(bool track_gradients = true) : track_(track_gradients) {}
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    bool tracking() const noexcept { return track_; }

    Var constant(Tensor value);
    // One leaf per parameter per graph; backward() adds into Parameter::grad.
    Var param(Parameter& p);

    const Tensor& value(Var v) const { return nodes_.at(v.index).value; }
    // Gradient buffer of a node, allocated (zeroed) on first access.
    Tensor& grad(std::size_t index);
    Tensor& grad(Var v) { return grad(v.index); }

    // Seeds d(out)/d(out) = 1 for a 1x1 output and propagates to every parameter leaf.
    void backward(Var out);

    Var record(Tensor value, BackwardFn backward);

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        BackwardFn backward;
        Parameter* param = nullptr;
    };

    bool track_;
    std::deque<Node> nodes_;
    std::unordered_map<const Parameter*, std::size_t> param_leaves_;
};

Var matmul(Graph& g, Var a, Var b);
Var add(Graph& g, Var a, Var b);
// Adds a 1 x n row to every row of a.
Var add_row(Graph& g, Var a, Var row);
Var scale(Graph& g, Var a, double s);
// Exact (erf) GELU.
Var gelu(Graph& g, Var a);
Var layer_norm(Graph& g, Var x, Var gamma, Var beta, double eps = 1e-5);
Var embedding(Graph& g, Var table, std::span<const std::uint32_t> ids);
Var slice_rows(Graph& g, Var x, std::size_t start, std::size_t count);
Var concat_rows(Graph& g, std::span<const Var> parts);
// Grouped-query attention over keys/values given as row blocks (logically concatenated).
Var attention(Graph& g, Var q, std::span<const Var> k_blocks, std::span<const Var> v_blocks, const AttentionMask& mask,
              std::size_t heads, std::size_t kv_heads);
// Sum over rows with target >= 0 of -log softmax(logits)[target]; 1x1 result.
// Rows with a negative target are ignored. per_row, if given, gets each row's
// loss (0 for ignored rows).
Var cross_entropy_sum(Graph& g, Var logits, std::span<const std::int64_t> targets,
                      std::vector<double>* per_row = nullptr);
// sum(weights .* x), 1x1.
Var weighted_sum(Graph& g, Var x, const Tensor& weights);

}  // namespace upw
