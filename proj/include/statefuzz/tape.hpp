#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "statefuzz/tensor.hpp"

namespace statefuzz {

using NodeId = std::size_t;

// Reverse-mode accumulation over an explicit operation tape. The op set is
// exactly what the recurrent engine and the objectives need: matmul, adds,
// elementwise sigmoid/tanh/mul, concat/slice, gather-by-index and fused
// softmax cross-entropy. Nodes are appended in evaluation order, so the
// creation order is already a topological order.
class Tape {
  public:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&, NodeId)> backward;  // empty for leaves
    };

    NodeId leaf(Tensor value) { return push(std::move(value), {}); }

    const Tensor& value(NodeId id) const { return nodes_[id].value; }
    const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
    Tensor& grad_mut(NodeId id) { return nodes_[id].grad; }
    std::size_t size() const { return nodes_.size(); }

    // ---- binary matrix ops ----

    NodeId matmul(NodeId a, NodeId b) {
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        if (av.shape()[1] != bv.shape()[0])
            throw ConfigError("matmul inner extents differ: " + Tensor::shape_str(av.shape()) +
                              " x " + Tensor::shape_str(bv.shape()));
        Tensor out({av.shape()[0], bv.shape()[1]});
        matmul_acc(av, bv, out);
        return push(std::move(out), [a, b](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            matmul_a_bt_acc(g, t.nodes_[b].value, t.nodes_[a].grad);
            matmul_at_b_acc(t.nodes_[a].value, g, t.nodes_[b].grad);
        });
    }

    NodeId add(NodeId a, NodeId b) {
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        require_same(av, bv, "add");
        Tensor out = av;
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
        return push(std::move(out), [a, b](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            acc(t.nodes_[a].grad, g);
            acc(t.nodes_[b].grad, g);
        });
    }

    NodeId sub(NodeId a, NodeId b) {
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        require_same(av, bv, "sub");
        Tensor out = av;
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= bv[i];
        return push(std::move(out), [a, b](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            acc(t.nodes_[a].grad, g);
            for (std::size_t i = 0; i < g.numel(); ++i) t.nodes_[b].grad[i] -= g[i];
        });
    }

    NodeId mul(NodeId a, NodeId b) {
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        require_same(av, bv, "mul");
        Tensor out = av;
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
        return push(std::move(out), [a, b](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& av2 = t.nodes_[a].value;
            const Tensor& bv2 = t.nodes_[b].value;
            for (std::size_t i = 0; i < g.numel(); ++i) {
                t.nodes_[a].grad[i] += g[i] * bv2[i];
                t.nodes_[b].grad[i] += g[i] * av2[i];
            }
        });
    }

    // (m,n) + (n) row-vector broadcast, used for biases.
    NodeId add_rowvec(NodeId a, NodeId v) {
        const Tensor& av = nodes_[a].value;
        const Tensor& vv = nodes_[v].value;
        if (av.shape()[1] != vv.numel()) throw ConfigError("add_rowvec extent mismatch");
        Tensor out = av;
        const std::size_t m = av.shape()[0], n = av.shape()[1];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += vv[j];
        return push(std::move(out), [a, v, m, n](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            acc(t.nodes_[a].grad, g);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) t.nodes_[v].grad[j] += g[i * n + j];
        });
    }

    // ---- elementwise ----

    NodeId sigmoid(NodeId a) {
        Tensor out = nodes_[a].value;
        for (auto& x : out.vec()) x = 1.0 / (1.0 + std::exp(-x));
        return push(std::move(out), [a](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value;
            for (std::size_t i = 0; i < g.numel(); ++i)
                t.nodes_[a].grad[i] += g[i] * y[i] * (1.0 - y[i]);
        });
    }

    NodeId tanh(NodeId a) {
        Tensor out = nodes_[a].value;
        for (auto& x : out.vec()) x = std::tanh(x);
        return push(std::move(out), [a](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& y = t.nodes_[self].value;
            for (std::size_t i = 0; i < g.numel(); ++i)
                t.nodes_[a].grad[i] += g[i] * (1.0 - y[i] * y[i]);
        });
    }

    // out = k*a + c elementwise with scalar constants (e.g. 1-z for GRU).
    NodeId affine(NodeId a, double k, double c) {
        Tensor out = nodes_[a].value;
        for (auto& x : out.vec()) x = k * x + c;
        return push(std::move(out), [a, k](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            for (std::size_t i = 0; i < g.numel(); ++i) t.nodes_[a].grad[i] += k * g[i];
        });
    }

    // ---- structural ----

    NodeId concat_cols(NodeId a, NodeId b) {
        const Tensor& av = nodes_[a].value;
        const Tensor& bv = nodes_[b].value;
        if (av.shape()[0] != bv.shape()[0]) throw ConfigError("concat_cols row mismatch");
        const std::size_t m = av.shape()[0], p = av.shape()[1], q = bv.shape()[1];
        Tensor out({m, p + q});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < p; ++j) out[i * (p + q) + j] = av[i * p + j];
            for (std::size_t j = 0; j < q; ++j) out[i * (p + q) + p + j] = bv[i * q + j];
        }
        return push(std::move(out), [a, b, m, p, q](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < p; ++j)
                    t.nodes_[a].grad[i * p + j] += g[i * (p + q) + j];
                for (std::size_t j = 0; j < q; ++j)
                    t.nodes_[b].grad[i * q + j] += g[i * (p + q) + p + j];
            }
        });
    }

    NodeId slice_cols(NodeId a, std::size_t c0, std::size_t c1) {
        const Tensor& av = nodes_[a].value;
        const std::size_t m = av.shape()[0], n = av.shape()[1], w = c1 - c0;
        Tensor out({m, w});
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < w; ++j) out[i * w + j] = av[i * n + c0 + j];
        return push(std::move(out), [a, c0, m, n, w](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    t.nodes_[a].grad[i * n + c0 + j] += g[i * w + j];
        });
    }

    NodeId slice_rows(NodeId a, std::size_t r0, std::size_t r1) {
        const Tensor& av = nodes_[a].value;
        const std::size_t n = av.shape()[1], h = r1 - r0;
        Tensor out({h, n});
        for (std::size_t i = 0; i < h * n; ++i) out[i] = av[r0 * n + i];
        return push(std::move(out), [a, r0, n, h](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            for (std::size_t i = 0; i < h * n; ++i) t.nodes_[a].grad[r0 * n + i] += g[i];
        });
    }

    // Embedding lookup: rows of (V,D) table selected by ids, out (N,D).
    NodeId gather_rows(NodeId table, std::vector<std::size_t> ids) {
        const Tensor& tv = nodes_[table].value;
        const std::size_t v = tv.shape()[0], d = tv.shape()[1], n = ids.size();
        Tensor out({n, d});
        for (std::size_t i = 0; i < n; ++i) {
            if (ids[i] >= v) throw InputError("token id out of vocabulary");
            for (std::size_t j = 0; j < d; ++j) out[i * d + j] = tv[ids[i] * d + j];
        }
        return push(std::move(out), [table, ids = std::move(ids), d](Tape& t, NodeId self) {
            const Tensor& g = t.nodes_[self].grad;
            for (std::size_t i = 0; i < ids.size(); ++i)
                for (std::size_t j = 0; j < d; ++j)
                    t.nodes_[table].grad[ids[i] * d + j] += g[i * d + j];
        });
    }

    // ---- reductions ----

    NodeId sum_all(NodeId a) {
        double s = 0.0;
        for (double x : nodes_[a].value.vec()) s += x;
        return push(Tensor::scalar(s), [a](Tape& t, NodeId self) {
            const double g = t.nodes_[self].grad[0];
            for (auto& x : t.nodes_[a].grad.vec()) x += g;
        });
    }

    // Scalar = sum_i weights[i] * a[i]; weights is a constant tensor.
    NodeId weighted_sum(NodeId a, Tensor weights) {
        const Tensor& av = nodes_[a].value;
        if (weights.numel() != av.numel()) throw ConfigError("weighted_sum size mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < av.numel(); ++i) s += weights[i] * av[i];
        return push(Tensor::scalar(s), [a, w = std::move(weights)](Tape& t, NodeId self) {
            const double g = t.nodes_[self].grad[0];
            for (std::size_t i = 0; i < w.numel(); ++i) t.nodes_[a].grad[i] += g * w[i];
        });
    }

    // Fused softmax cross-entropy over rows of logits (N,V) against target
    // ids, with a 0/1 row mask for padded positions. Value is the summed
    // negative log-likelihood of the masked rows.
    NodeId softmax_xent(NodeId logits, std::vector<std::size_t> targets, std::vector<double> mask) {
        const Tensor& lv = nodes_[logits].value;
        const std::size_t n = lv.shape()[0], v = lv.shape()[1];
        if (targets.size() != n || mask.size() != n)
            throw ConfigError("softmax_xent target/mask length mismatch");
        Tensor probs({n, v});
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = lv.data() + i * v;
            double mx = row[0];
            for (std::size_t j = 1; j < v; ++j) mx = std::max(mx, row[j]);
            double z = 0.0;
            for (std::size_t j = 0; j < v; ++j) z += std::exp(row[j] - mx);
            const double logz = std::log(z) + mx;
            for (std::size_t j = 0; j < v; ++j) probs[i * v + j] = std::exp(row[j] - logz);
            if (targets[i] >= v) throw InputError("target id out of vocabulary");
            loss += mask[i] * (logz - row[targets[i]]);
        }
        return push(Tensor::scalar(loss),
                    [logits, targets = std::move(targets), mask = std::move(mask),
                     probs = std::move(probs), n, v](Tape& t, NodeId self) {
                        const double g = t.nodes_[self].grad[0];
                        Tensor& lg = t.nodes_[logits].grad;
                        for (std::size_t i = 0; i < n; ++i) {
                            if (mask[i] == 0.0) continue;
                            const double gm = g * mask[i];
                            for (std::size_t j = 0; j < v; ++j)
                                lg[i * v + j] += gm * probs[i * v + j];
                            lg[i * v + targets[i]] -= gm;
                        }
                    });
    }

    // Seed d(root) = 1 and sweep the tape in reverse creation order.
    void backward(NodeId root) {
        if (nodes_[root].value.numel() != 1)
            throw ConfigError("backward root must be a scalar");
        nodes_[root].grad[0] = 1.0;
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            if (nodes_[i].backward) nodes_[i].backward(*this, i);
        }
    }

  private:
    NodeId push(Tensor value, std::function<void(Tape&, NodeId)> backward) {
        Node n;
        n.grad = Tensor::zeros(value.shape());
        n.value = std::move(value);
        n.backward = std::move(backward);
        nodes_.push_back(std::move(n));
        return nodes_.size() - 1;
    }

    static void require_same(const Tensor& a, const Tensor& b, const char* op) {
        if (!a.same_shape(b))
            throw ConfigError(std::string(op) + " shape mismatch: " + Tensor::shape_str(a.shape()) +
                              " vs " + Tensor::shape_str(b.shape()));
    }

    static void acc(Tensor& dst, const Tensor& src) {
        for (std::size_t i = 0; i < src.numel(); ++i) dst[i] += src[i];
    }

    std::vector<Node> nodes_;
};

}  // namespace statefuzz
