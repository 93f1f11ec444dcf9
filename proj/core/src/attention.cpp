#include "upw/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "upw/error.hpp"

namespace upw {

AttentionMask AttentionMask::slice(std::size_t r, std::size_t c) const {
    if (r > rows || c > cols) throw Error(ErrorKind::Shape, "mask slice larger than mask");
    AttentionMask out(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) out.set(i, j, (*this)(i, j));
    }
    return out;
}

AttentionMask causal_mask(std::size_t len) {
    AttentionMask mask(len, len);
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t j = 0; j <= i; ++j) mask.set(i, j, true);
    }
    return mask;
}

AttentionMask local_window_mask(std::size_t window_len, std::size_t condition_len, std::optional<std::size_t> sub_size) {
    if (window_len == 0) throw Error(ErrorKind::InvalidArgument, "window length must be positive");

    // Sub-window id per raster position and the last raster index of each sub-window.
    std::vector<std::size_t> sub_of(window_len, 0);
    std::vector<std::size_t> last_of(1, window_len - 1);
    if (sub_size) {
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(window_len))));
        if (side * side != window_len) {
            throw Error(ErrorKind::Alignment, "sub-window masks need a square window; got length " +
                                                  std::to_string(window_len));
        }
        if (*sub_size == 0 || side % *sub_size != 0) {
            throw Error(ErrorKind::Alignment, "sub-window size " + std::to_string(*sub_size) +
                                                  " does not divide window size " + std::to_string(side));
        }
        const std::size_t per_side = side / *sub_size;
        last_of.assign(per_side * per_side, 0);
        for (std::size_t i = 0; i < window_len; ++i) {
            const std::size_t s = (i / side / *sub_size) * per_side + (i % side) / *sub_size;
            sub_of[i] = s;
            last_of[s] = std::max(last_of[s], i);
        }
    }

    AttentionMask mask(window_len, condition_len + window_len);
    for (std::size_t i = 0; i < window_len; ++i) {
        for (std::size_t c = 0; c < condition_len; ++c) mask.set(i, c, true);
        for (std::size_t j = 0; j <= i; ++j) {
            const bool same = sub_of[j] == sub_of[i];
            const bool earlier_complete = sub_of[j] < sub_of[i] && last_of[sub_of[j]] <= i;
            mask.set(i, condition_len + j, same || earlier_complete);
        }
    }
    return mask;
}

void check_head_grouping(std::size_t heads, std::size_t kv_heads) {
    if (heads == 0 || kv_heads == 0 || heads % kv_heads != 0) {
        throw Error(ErrorKind::Config, "kv_heads (" + std::to_string(kv_heads) + ") must divide heads (" +
                                           std::to_string(heads) + ")");
    }
}

namespace detail {

std::size_t RowBlocks::rows() const {
    std::size_t n = 0;
    for (const Tensor* b : blocks) n += b->rows;
    return n;
}

std::size_t RowBlocks::cols() const { return blocks.empty() ? 0 : blocks.front()->cols; }

const double* RowBlocks::row(std::size_t r) const {
    for (const Tensor* b : blocks) {
        if (r < b->rows) return b->data.data() + r * b->cols;
        r -= b->rows;
    }
    return nullptr;
}

void attention_forward(const Tensor& q, const RowBlocks& k, const RowBlocks& v, const AttentionMask& mask,
                       std::size_t heads, std::size_t kv_heads, Tensor& out, std::vector<double>& probs) {
    check_head_grouping(heads, kv_heads);
    const std::size_t n = q.rows;
    const std::size_t m = k.rows();
    if (q.cols % heads != 0) throw Error(ErrorKind::Shape, "query width is not a multiple of heads");
    const std::size_t d = q.cols / heads;
    for (const Tensor* b : k.blocks) {
        if (b->cols != kv_heads * d) throw Error(ErrorKind::Shape, "key width must be kv_heads * head_dim");
    }
    for (const Tensor* b : v.blocks) {
        if (b->cols != kv_heads * d) throw Error(ErrorKind::Shape, "value width must be kv_heads * head_dim");
    }
    if (v.rows() != m) throw Error(ErrorKind::Shape, "key and value row counts differ");
    if (mask.rows != n || mask.cols != m) {
        throw Error(ErrorKind::Shape, "mask is " + std::to_string(mask.rows) + "x" + std::to_string(mask.cols) +
                                          ", attention needs " + std::to_string(n) + "x" + std::to_string(m));
    }

    const std::size_t group = heads / kv_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    out = Tensor(n, heads * d);
    probs.assign(heads * n * m, 0.0);

    std::vector<const double*> krows(m);
    std::vector<const double*> vrows(m);
    for (std::size_t j = 0; j < m; ++j) {
        krows[j] = k.row(j);
        vrows[j] = v.row(j);
    }

    for (std::size_t i = 0; i < n; ++i) {
        bool any = false;
        for (std::size_t j = 0; j < m; ++j) any = any || mask(i, j);
        if (!any) throw Error(ErrorKind::InvalidArgument, "attention mask row " + std::to_string(i) + " is empty");

        for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t kvh = h / group;
            const double* qi = q.data.data() + i * q.cols + h * d;
            double* p = probs.data() + (h * n + i) * m;
            double max_score = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j) {
                if (!mask(i, j)) continue;
                const double* kj = krows[j] + kvh * d;
                double s = 0.0;
                for (std::size_t t = 0; t < d; ++t) s += qi[t] * kj[t];
                p[j] = s * scale;
                max_score = std::max(max_score, p[j]);
            }
            double total = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (!mask(i, j)) continue;
                p[j] = std::exp(p[j] - max_score);
                total += p[j];
            }
            double* oi = out.data.data() + i * out.cols + h * d;
            for (std::size_t j = 0; j < m; ++j) {
                if (!mask(i, j)) continue;
                p[j] /= total;
                const double* vj = vrows[j] + kvh * d;
                for (std::size_t t = 0; t < d; ++t) oi[t] += p[j] * vj[t];
            }
        }
    }
}

}  // namespace detail

Tensor gqa_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask& mask, std::size_t heads,
                     std::size_t kv_heads, std::vector<double>* probs) {
    Tensor out;
    std::vector<double> local_probs;
    detail::attention_forward(q, detail::RowBlocks{{&k}}, detail::RowBlocks{{&v}}, mask, heads, kv_heads, out,
                              local_probs);
    if (probs) *probs = std::move(local_probs);
    return out;
}

}  // namespace upw
