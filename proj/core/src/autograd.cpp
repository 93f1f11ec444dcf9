#include "upw/autograd.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "upw/error.hpp"

namespace upw {
namespace {

void require(bool ok, const char* message) {
    if (!ok) throw Error(ErrorKind::Shape, message);
}

}  // namespace

Var Graph::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, {}, nullptr});
    return Var{nodes_.size() - 1};
}

Var Graph::param(Parameter& p) {
    if (auto it = param_leaves_.find(&p); it != param_leaves_.end()) return Var{it->second};
    nodes_.push_back(Node{p.value, {}, {}, &p});
    const std::size_t index = nodes_.size() - 1;
    param_leaves_.emplace(&p, index);
    return Var{index};
}

Tensor& Graph::grad(std::size_t index) {
    Node& node = nodes_.at(index);
    if (node.grad.empty() && !node.value.empty()) node.grad = Tensor(node.value.rows, node.value.cols);
    return node.grad;
}

Var Graph::record(Tensor value, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), {}, track_ ? std::move(backward) : BackwardFn{}, nullptr});
    return Var{nodes_.size() - 1};
}

void Graph::backward(Var out) {
    if (!track_) throw Error(ErrorKind::InvalidArgument, "graph was built without gradient tracking");
    const Tensor& v = value(out);
    require(v.rows == 1 && v.cols == 1, "backward() needs a scalar (1x1) output");
    grad(out)(0, 0) = 1.0;
    for (std::size_t i = out.index + 1; i-- > 0;) {
        Node& node = nodes_[i];
        if (node.grad.empty()) continue;
        if (node.backward) node.backward(*this, i);
        if (node.param) {
            for (std::size_t k = 0; k < node.grad.data.size(); ++k) node.param->grad.data[k] += node.grad.data[k];
        }
    }
}

Var matmul(Graph& g, Var a, Var b) {
    const Tensor& A = g.value(a);
    const Tensor& B = g.value(b);
    require(A.cols == B.rows, "matmul: inner dimensions differ");
    Tensor C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        double* c = C.data.data() + i * C.cols;
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = A(i, k);
            const double* brow = B.data.data() + k * B.cols;
            for (std::size_t j = 0; j < B.cols; ++j) c[j] += aik * brow[j];
        }
    }
    return g.record(std::move(C), [a, b](Graph& gr, std::size_t self) {
        const Tensor& dC = gr.grad(self);
        const Tensor& A = gr.value(a);
        const Tensor& B = gr.value(b);
        Tensor& dA = gr.grad(a);
        for (std::size_t i = 0; i < A.rows; ++i) {
            const double* dc = dC.data.data() + i * dC.cols;
            for (std::size_t k = 0; k < A.cols; ++k) {
                const double* brow = B.data.data() + k * B.cols;
                double s = 0.0;
                for (std::size_t j = 0; j < B.cols; ++j) s += dc[j] * brow[j];
                dA(i, k) += s;
            }
        }
        Tensor& dB = gr.grad(b);
        for (std::size_t i = 0; i < A.rows; ++i) {
            const double* dc = dC.data.data() + i * dC.cols;
            for (std::size_t k = 0; k < A.cols; ++k) {
                const double aik = A(i, k);
                double* db = dB.data.data() + k * dB.cols;
                for (std::size_t j = 0; j < B.cols; ++j) db[j] += aik * dc[j];
            }
        }
    });
}

Var add(Graph& g, Var a, Var b) {
    const Tensor& A = g.value(a);
    const Tensor& B = g.value(b);
    require(A.rows == B.rows && A.cols == B.cols, "add: shapes differ");
    Tensor C = A;
    for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] += B.data[i];
    return g.record(std::move(C), [a, b](Graph& gr, std::size_t self) {
        const Tensor& d = gr.grad(self);
        Tensor& da = gr.grad(a);
        for (std::size_t i = 0; i < d.data.size(); ++i) da.data[i] += d.data[i];
        Tensor& db = gr.grad(b);
        for (std::size_t i = 0; i < d.data.size(); ++i) db.data[i] += d.data[i];
    });
}

Var add_row(Graph& g, Var a, Var row) {
    const Tensor& A = g.value(a);
    const Tensor& R = g.value(row);
    require(R.rows == 1 && R.cols == A.cols, "add_row: row must be 1 x cols");
    Tensor C = A;
    for (std::size_t i = 0; i < C.rows; ++i) {
        for (std::size_t j = 0; j < C.cols; ++j) C(i, j) += R.data[j];
    }
    return g.record(std::move(C), [a, row](Graph& gr, std::size_t self) {
        const Tensor& d = gr.grad(self);
        Tensor& da = gr.grad(a);
        for (std::size_t i = 0; i < d.data.size(); ++i) da.data[i] += d.data[i];
        Tensor& dr = gr.grad(row);
        for (std::size_t i = 0; i < d.rows; ++i) {
            for (std::size_t j = 0; j < d.cols; ++j) dr.data[j] += d(i, j);
        }
    });
}

Var scale(Graph& g, Var a, double s) {
    Tensor C = g.value(a);
    for (double& x : C.data) x *= s;
    return g.record(std::move(C), [a, s](Graph& gr, std::size_t self) {
        const Tensor& d = gr.grad(self);
        Tensor& da = gr.grad(a);
        for (std::size_t i = 0; i < d.data.size(); ++i) da.data[i] += s * d.data[i];
    });
}

Var gelu(Graph& g, Var a) {
    Tensor C = g.value(a);
    for (double& x : C.data) x = 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2));
    return g.record(std::move(C), [a](Graph& gr, std::size_t self) {
        const Tensor& d = gr.grad(self);
        const Tensor& X = gr.value(a);
        Tensor& da = gr.grad(a);
        constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
        for (std::size_t i = 0; i < d.data.size(); ++i) {
            const double x = X.data[i];
            const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
            const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
            da.data[i] += d.data[i] * (cdf + x * pdf);
        }
    });
}

Var layer_norm(Graph& g, Var x, Var gamma, Var beta, double eps) {
    const Tensor& X = g.value(x);
    const Tensor& G = g.value(gamma);
    const Tensor& B = g.value(beta);
    require(G.rows == 1 && G.cols == X.cols && B.rows == 1 && B.cols == X.cols, "layer_norm: affine shape");
    const std::size_t n = X.cols;
    auto xhat = std::make_shared<Tensor>(X.rows, n);
    auto rstd = std::make_shared<std::vector<double>>(X.rows);
    Tensor Y(X.rows, n);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += X(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) var += (X(i, j) - mean) * (X(i, j) - mean);
        var /= static_cast<double>(n);
        const double r = 1.0 / std::sqrt(var + eps);
        (*rstd)[i] = r;
        for (std::size_t j = 0; j < n; ++j) {
            const double h = (X(i, j) - mean) * r;
            (*xhat)(i, j) = h;
            Y(i, j) = h * G.data[j] + B.data[j];
        }
    }
    return g.record(std::move(Y), [x, gamma, beta, xhat, rstd](Graph& gr, std::size_t self) {
        const Tensor& dY = gr.grad(self);
        const Tensor& G = gr.value(gamma);
        const std::size_t n = dY.cols;
        Tensor& dG = gr.grad(gamma);
        Tensor& dB = gr.grad(beta);
        Tensor& dX = gr.grad(x);
        std::vector<double> dxhat(n);
        for (std::size_t i = 0; i < dY.rows; ++i) {
            double mean_d = 0.0;
            double mean_dx = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                dG.data[j] += dY(i, j) * (*xhat)(i, j);
                dB.data[j] += dY(i, j);
                dxhat[j] = dY(i, j) * G.data[j];
                mean_d += dxhat[j];
                mean_dx += dxhat[j] * (*xhat)(i, j);
            }
            mean_d /= static_cast<double>(n);
            mean_dx /= static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
                dX(i, j) += (*rstd)[i] * (dxhat[j] - mean_d - (*xhat)(i, j) * mean_dx);
            }
        }
    });
}

Var embedding(Graph& g, Var table, std::span<const std::uint32_t> ids) {
    const Tensor& T = g.value(table);
    Tensor out(ids.size(), T.cols);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= T.rows) {
            throw Error(ErrorKind::InvalidToken, "embedding id " + std::to_string(ids[i]) + " outside table of " +
                                                     std::to_string(T.rows) + " rows");
        }
        std::copy_n(T.data.begin() + static_cast<std::ptrdiff_t>(ids[i] * T.cols), T.cols,
                    out.data.begin() + static_cast<std::ptrdiff_t>(i * T.cols));
    }
    auto kept = std::make_shared<std::vector<std::uint32_t>>(ids.begin(), ids.end());
    return g.record(std::move(out), [table, kept](Graph& gr, std::size_t self) {
        const Tensor& d = gr.grad(self);
        Tensor& dT = gr.grad(table);
        for (std::size_t i = 0; i < kept->size(); ++i) {
            for (std::size_t j = 0; j < d.cols; ++j) dT((*kept)[i], j) += d(i, j);
        }
    });
}

Var slice_rows(Graph& g, Var x, std::size_t start, std::size_t count) {
    const Tensor& X = g.value(x);
    require(start + count <= X.rows, "slice_rows: range out of bounds");
    Tensor out(count, X.cols);
    std::copy_n(X.data.begin() + static_cast<std::ptrdiff_t>(start * X.cols), count * X.cols, out.data.begin());
    return g.record(std::move(out), [x, start](Graph& gr, std::size_t self) {
        const Tensor& d = gr.grad(self);
        Tensor& dx = gr.grad(x);
        for (std::size_t i = 0; i < d.data.size(); ++i) dx.data[start * d.cols + i] += d.data[i];
    });
}

Var concat_rows(Graph& g, std::span<const Var> parts) {
    require(!parts.empty(), "concat_rows: nothing to concatenate");
    const std::size_t cols = g.value(parts.front()).cols;
    std::size_t rows = 0;
    for (const Var p : parts) {
        require(g.value(p).cols == cols, "concat_rows: column counts differ");
        rows += g.value(p).rows;
    }
    Tensor out(rows, cols);
    std::size_t offset = 0;
    for (const Var p : parts) {
        const Tensor& t = g.value(p);
        std::copy(t.data.begin(), t.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(offset));
        offset += t.data.size();
    }
    auto kept = std::make_shared<std::vector<Var>>(parts.begin(), parts.end());
    return g.record(std::move(out), [kept](Graph& gr, std::size_t self) {
        const Tensor& d = gr.grad(self);
        std::size_t offset = 0;
        for (const Var p : *kept) {
            Tensor& dp = gr.grad(p);
            for (std::size_t i = 0; i < dp.data.size(); ++i) dp.data[i] += d.data[offset + i];
            offset += dp.data.size();
        }
    });
}

Var attention(Graph& g, Var q, std::span<const Var> k_blocks, std::span<const Var> v_blocks, const AttentionMask& mask,
              std::size_t heads, std::size_t kv_heads) {
    detail::RowBlocks kb;
    detail::RowBlocks vb;
    for (const Var k : k_blocks) kb.blocks.push_back(&g.value(k));
    for (const Var v : v_blocks) vb.blocks.push_back(&g.value(v));
    require(!kb.blocks.empty() && kb.blocks.size() == vb.blocks.size(), "attention: key/value block lists differ");
    for (std::size_t i = 0; i < kb.blocks.size(); ++i) {
        require(kb.blocks[i]->rows == vb.blocks[i]->rows, "attention: key/value block rows differ");
    }

    Tensor out;
    auto probs = std::make_shared<std::vector<double>>();
    detail::attention_forward(g.value(q), kb, vb, mask, heads, kv_heads, out, *probs);

    auto ks = std::make_shared<std::vector<Var>>(k_blocks.begin(), k_blocks.end());
    auto vs = std::make_shared<std::vector<Var>>(v_blocks.begin(), v_blocks.end());
    return g.record(std::move(out), [q, ks, vs, probs, heads, kv_heads](Graph& gr, std::size_t self) {
        const Tensor& dO = gr.grad(self);
        const Tensor& Q = gr.value(q);
        Tensor& dQ = gr.grad(q);
        const std::size_t n = Q.rows;
        const std::size_t d = Q.cols / heads;
        const std::size_t group = heads / kv_heads;
        const double scale = 1.0 / std::sqrt(static_cast<double>(d));

        // Flatten key/value rows into (value row, grad row) pointers.
        std::vector<const double*> krow;
        std::vector<const double*> vrow;
        std::vector<double*> dkrow;
        std::vector<double*> dvrow;
        for (std::size_t b = 0; b < ks->size(); ++b) {
            const Tensor& K = gr.value((*ks)[b]);
            const Tensor& V = gr.value((*vs)[b]);
            Tensor& dK = gr.grad((*ks)[b]);
            Tensor& dV = gr.grad((*vs)[b]);
            for (std::size_t r = 0; r < K.rows; ++r) {
                krow.push_back(K.data.data() + r * K.cols);
                vrow.push_back(V.data.data() + r * V.cols);
                dkrow.push_back(dK.data.data() + r * dK.cols);
                dvrow.push_back(dV.data.data() + r * dV.cols);
            }
        }
        const std::size_t m = krow.size();
        std::vector<double> dp(m);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t h = 0; h < heads; ++h) {
                const std::size_t off = (h / group) * d;
                const double* p = probs->data() + (h * n + i) * m;
                const double* doi = dO.data.data() + i * dO.cols + h * d;
                const double* qi = Q.data.data() + i * Q.cols + h * d;
                double* dqi = dQ.data.data() + i * dQ.cols + h * d;
                double weighted = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    if (p[j] == 0.0) {
                        dp[j] = 0.0;
                        continue;
                    }
                    double s = 0.0;
                    for (std::size_t t = 0; t < d; ++t) s += doi[t] * vrow[j][off + t];
                    dp[j] = s;
                    weighted += p[j] * s;
                }
                for (std::size_t j = 0; j < m; ++j) {
                    if (p[j] == 0.0) continue;
                    const double ds = p[j] * (dp[j] - weighted) * scale;
                    for (std::size_t t = 0; t < d; ++t) {
                        dqi[t] += ds * krow[j][off + t];
                        dkrow[j][off + t] += ds * qi[t];
                        dvrow[j][off + t] += p[j] * doi[t];
                    }
                }
            }
        }
    });
}

Var cross_entropy_sum(Graph& g, Var logits, std::span<const std::int64_t> targets, std::vector<double>* per_row) {
    const Tensor& L = g.value(logits);
    require(targets.size() == L.rows, "cross_entropy: one target per row required");
    auto softmax = std::make_shared<Tensor>(L.rows, L.cols);
    auto kept = std::make_shared<std::vector<std::int64_t>>(targets.begin(), targets.end());
    if (per_row) per_row->assign(L.rows, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < L.rows; ++i) {
        const std::int64_t t = targets[i];
        if (t < 0) continue;
        if (static_cast<std::size_t>(t) >= L.cols) throw Error(ErrorKind::InvalidToken, "target id outside logits");
        double mx = L(i, 0);
        for (std::size_t j = 1; j < L.cols; ++j) mx = std::max(mx, L(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < L.cols; ++j) {
            (*softmax)(i, j) = std::exp(L(i, j) - mx);
            z += (*softmax)(i, j);
        }
        for (std::size_t j = 0; j < L.cols; ++j) (*softmax)(i, j) /= z;
        const double loss = std::log(z) + mx - L(i, static_cast<std::size_t>(t));
        if (per_row) (*per_row)[i] = loss;
        total += loss;
    }
    return g.record(Tensor(1, 1, total), [logits, softmax, kept](Graph& gr, std::size_t self) {
        const double up = gr.grad(self)(0, 0);
        Tensor& dL = gr.grad(logits);
        for (std::size_t i = 0; i < kept->size(); ++i) {
            const std::int64_t t = (*kept)[i];
            if (t < 0) continue;
            for (std::size_t j = 0; j < dL.cols; ++j) dL(i, j) += up * (*softmax)(i, j);
            dL(i, static_cast<std::size_t>(t)) -= up;
        }
    });
}

Var weighted_sum(Graph& g, Var x, const Tensor& weights) {
    const Tensor& X = g.value(x);
    require(X.rows == weights.rows && X.cols == weights.cols, "weighted_sum: weight shape");
    double s = 0.0;
    for (std::size_t i = 0; i < X.data.size(); ++i) s += weights.data[i] * X.data[i];
    auto w = std::make_shared<Tensor>(weights);
    return g.record(Tensor(1, 1, s), [x, w](Graph& gr, std::size_t self) {
        const double up = gr.grad(self)(0, 0);
        Tensor& dx = gr.grad(x);
        for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += up * w->data[i];
    });
}

}  // namespace upw
