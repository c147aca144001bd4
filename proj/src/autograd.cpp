#include "pixforge/autograd.hpp"

#include "pixforge/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace pixforge::ag {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;

std::size_t shape_numel(const Shape& s) noexcept {
    std::size_t n = 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
}

std::string shape_str(const Shape& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

namespace {

std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

void check_shape(const Shape& s) {
    for (int d : s) {
        if (d < 1) throw ShapeError("tensor dimensions must be positive, got " + shape_str(s));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
    }
}

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
    if (t.rank() != rank) {
        throw ShapeError(std::string(op) + ": " + what + " must have rank " +
                         std::to_string(rank) + ", got " + shape_str(t.shape()));
    }
}

}  // namespace

// Tensor ---------------------------------------------------------------------------

Tensor Tensor::make(Shape shape, std::vector<double> values, std::vector<NodePtr> inputs,
                    detail::BackwardFn backward) {
    check_shape(shape);
    if (values.size() != shape_numel(shape)) {
        throw ShapeError("tensor of shape " + shape_str(shape) + " given " +
                         std::to_string(values.size()) + " values");
    }
    auto n = std::make_shared<Node>();
    n->id = next_id();
    n->shape = std::move(shape);
    n->grad.assign(values.size(), 0.0);
    n->value = std::move(values);
    n->inputs = std::move(inputs);
    n->backward = std::move(backward);
    return Tensor(std::move(n));
}

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
    check_shape(shape);
    const auto n = shape_numel(shape);
    return make(std::move(shape), std::vector<double>(n, value), {}, nullptr);
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
    return make(std::move(shape), std::move(values), {}, nullptr);
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item() on a tensor of shape " + shape_str(shape()));
    return node_->value[0];
}

void Tensor::zero_grad() noexcept { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

Tensor Tensor::detach() const { return from(shape(), node_->value); }

// Tape -----------------------------------------------------------------------------

Tape Tape::record(const Tensor& root) {
    Tape tape;
    std::unordered_map<const Node*, bool> seen;
    // Iterative post-order DFS: a node is emitted after all of its inputs.
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    seen[root.node().get()] = true;
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node* in = node->inputs[next++].get();
            if (!seen[in]) {
                seen[in] = true;
                stack.emplace_back(in, 0);
            }
        } else {
            tape.nodes_.push_back(node);
            stack.pop_back();
        }
    }
    return tape;
}

std::vector<Tape::Entry> Tape::entries() const {
    std::vector<Entry> out;
    out.reserve(nodes_.size());
    for (const Node* n : nodes_) {
        Entry e{n->id, {}};
        for (const auto& in : n->inputs) e.inputs.push_back(in->id);
        out.push_back(std::move(e));
    }
    return out;
}

void backward(const Tensor& loss) {
    if (!loss.defined()) throw ArgumentError("backward on an undefined tensor");
    if (loss.numel() != 1) {
        throw ShapeError("backward needs a scalar loss, got shape " + shape_str(loss.shape()));
    }
    const Tape tape = Tape::record(loss);
    const auto& order = tape.nodes();
    std::unordered_map<const Node*, std::size_t> slot;
    for (std::size_t i = 0; i < order.size(); ++i) slot[order[i]] = i;

    // Per-pass buffers, so repeated passes add whole gradients to .grad.
    std::vector<std::vector<double>> buf(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) buf[i].assign(order[i]->value.size(), 0.0);
    buf.back()[0] = 1.0;

    std::vector<std::span<double>> gin;
    for (std::size_t i = order.size(); i-- > 0;) {
        const Node* n = order[i];
        if (!n->backward) continue;
        gin.clear();
        for (const auto& in : n->inputs) gin.emplace_back(buf[slot.at(in.get())]);
        n->backward(*n, buf[i], gin);
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto& g = order[i]->grad;
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += buf[i][k];
    }
}

void zero_grad(std::span<Tensor> params) {
    for (auto& p : params) p.zero_grad();
}

void sgd_step(std::span<Tensor> params, double lr) {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ArgumentError("learning rate must be >= 0");
    for (auto& p : params) {
        if (p.frozen()) continue;
        auto v = p.mutable_values();
        const auto g = p.grad();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
    }
}

// Elementwise ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
    return Tensor::make(a.shape(), std::move(out), {a.node(), b.node()},
                        [](const Node&, std::span<const double> g, std::span<const std::span<double>> in) {
                            for (std::size_t i = 0; i < g.size(); ++i) {
                                in[0][i] += g[i];
                                in[1][i] += g[i];
                            }
                        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
    return Tensor::make(a.shape(), std::move(out), {a.node(), b.node()},
                        [](const Node&, std::span<const double> g, std::span<const std::span<double>> in) {
                            for (std::size_t i = 0; i < g.size(); ++i) {
                                in[0][i] += g[i];
                                in[1][i] -= g[i];
                            }
                        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
    return Tensor::make(a.shape(), std::move(out), {a.node(), b.node()},
                        [](const Node& self, std::span<const double> g, std::span<const std::span<double>> in) {
                            const auto& x = self.inputs[0]->value;
                            const auto& y = self.inputs[1]->value;
                            for (std::size_t i = 0; i < g.size(); ++i) {
                                in[0][i] += g[i] * y[i];
                                in[1][i] += g[i] * x[i];
                            }
                        });
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * a.values()[i];
    return Tensor::make(a.shape(), std::move(out), {a.node()},
                        [c](const Node&, std::span<const double> g, std::span<const std::span<double>> in) {
                            for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += c * g[i];
                        });
}

Tensor relu(const Tensor& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, x.values()[i]);
    return Tensor::make(x.shape(), std::move(out), {x.node()},
                        [](const Node& self, std::span<const double> g, std::span<const std::span<double>> in) {
                            const auto& v = self.inputs[0]->value;
                            // Subgradient at 0 is 0.
                            for (std::size_t i = 0; i < g.size(); ++i) {
                                if (v[i] > 0.0) in[0][i] += g[i];
                            }
                        });
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = x.values()[i];
        // Stable on both tails.
        out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return Tensor::make(x.shape(), std::move(out), {x.node()},
                        [](const Node& self, std::span<const double> g, std::span<const std::span<double>> in) {
                            const auto& s = self.value;
                            for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i] * s[i] * (1.0 - s[i]);
                        });
}

// Shape and linear algebra ----------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul", "left operand");
    if (b.rank() != 1 && b.rank() != 2) {
        throw ShapeError("matmul: right operand must have rank 1 or 2, got " + shape_str(b.shape()));
    }
    const int m = a.dim(0), k = a.dim(1);
    const int n = b.rank() == 2 ? b.dim(1) : 1;
    if (b.dim(0) != k) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
    }
    const auto A = a.values();
    const auto B = b.values();
    std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            const double aip = A[static_cast<std::size_t>(i) * k + p];
            for (int j = 0; j < n; ++j) {
                out[static_cast<std::size_t>(i) * n + j] += aip * B[static_cast<std::size_t>(p) * n + j];
            }
        }
    }
    Shape shape = b.rank() == 2 ? Shape{m, n} : Shape{m};
    return Tensor::make(std::move(shape), std::move(out), {a.node(), b.node()},
                        [m, k, n](const Node& self, std::span<const double> g,
                                  std::span<const std::span<double>> in) {
                            const auto& A = self.inputs[0]->value;
                            const auto& B = self.inputs[1]->value;
                            for (int i = 0; i < m; ++i) {
                                for (int p = 0; p < k; ++p) {
                                    double ga = 0.0;
                                    const double aip = A[static_cast<std::size_t>(i) * k + p];
                                    for (int j = 0; j < n; ++j) {
                                        const double gij = g[static_cast<std::size_t>(i) * n + j];
                                        ga += gij * B[static_cast<std::size_t>(p) * n + j];
                                        in[1][static_cast<std::size_t>(p) * n + j] += aip * gij;
                                    }
                                    in[0][static_cast<std::size_t>(i) * k + p] += ga;
                                }
                            }
                        });
}

Tensor transpose(const Tensor& a) {
    require_rank(a, 2, "transpose", "operand");
    const int m = a.dim(0), n = a.dim(1);
    std::vector<double> out(a.numel());
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            out[static_cast<std::size_t>(j) * m + i] = a.values()[static_cast<std::size_t>(i) * n + j];
        }
    }
    return Tensor::make({n, m}, std::move(out), {a.node()},
                        [m, n](const Node&, std::span<const double> g, std::span<const std::span<double>> in) {
                            for (int i = 0; i < m; ++i) {
                                for (int j = 0; j < n; ++j) {
                                    in[0][static_cast<std::size_t>(i) * n + j] +=
                                        g[static_cast<std::size_t>(j) * m + i];
                                }
                            }
                        });
}

Tensor reshape(const Tensor& a, Shape shape) {
    check_shape(shape);
    if (shape_numel(shape) != a.numel()) {
        throw ShapeError("reshape " + shape_str(a.shape()) + " to " + shape_str(shape) +
                         " changes the element count");
    }
    return Tensor::make(std::move(shape), std::vector<double>(a.values().begin(), a.values().end()),
                        {a.node()},
                        [](const Node&, std::span<const double> g, std::span<const std::span<double>> in) {
                            for (std::size_t i = 0; i < g.size(); ++i) in[0][i] += g[i];
                        });
}

Tensor linear(const Tensor& x, const Tensor& A, const Tensor& B) {
    require_rank(A, 2, "linear", "weight");
    require_rank(B, 1, "linear", "bias");
    const int m = A.dim(0), n = A.dim(1);
    if (B.dim(0) != m) {
        throw ShapeError("linear: bias " + shape_str(B.shape()) + " does not match weight " +
                         shape_str(A.shape()));
    }
    if ((x.rank() != 1 && x.rank() != 2) || x.shape().back() != n) {
        throw ShapeError("linear: input " + shape_str(x.shape()) + " does not match weight " +
                         shape_str(A.shape()));
    }
    const int batch = x.rank() == 2 ? x.dim(0) : 1;
    const auto X = x.values(), W = A.values(), b = B.values();
    std::vector<double> out(static_cast<std::size_t>(batch) * m);
    for (int s = 0; s < batch; ++s) {
        for (int i = 0; i < m; ++i) {
            double acc = b[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) {
                acc += W[static_cast<std::size_t>(i) * n + j] * X[static_cast<std::size_t>(s) * n + j];
            }
            out[static_cast<std::size_t>(s) * m + i] = acc;
        }
    }
    Shape shape = x.rank() == 2 ? Shape{batch, m} : Shape{m};
    return Tensor::make(std::move(shape), std::move(out), {x.node(), A.node(), B.node()},
                        [batch, m, n](const Node& self, std::span<const double> g,
                                      std::span<const std::span<double>> in) {
                            const auto& X = self.inputs[0]->value;
                            const auto& W = self.inputs[1]->value;
                            for (int s = 0; s < batch; ++s) {
                                for (int i = 0; i < m; ++i) {
                                    const double gi = g[static_cast<std::size_t>(s) * m + i];
                                    if (gi == 0.0) continue;
                                    in[2][static_cast<std::size_t>(i)] += gi;
                                    for (int j = 0; j < n; ++j) {
                                        const auto wij = static_cast<std::size_t>(i) * n + j;
                                        const auto xsj = static_cast<std::size_t>(s) * n + j;
                                        in[1][wij] += gi * X[xsj];
                                        in[0][xsj] += gi * W[wij];
                                    }
                                }
                            }
                        });
}

// Reductions and losses ----------------------------------------------------------------------

Tensor sum(const Tensor& x) {
    const double s = std::accumulate(x.values().begin(), x.values().end(), 0.0);
    return Tensor::make({1}, {s}, {x.node()},
                        [](const Node&, std::span<const double> g, std::span<const std::span<double>> in) {
                            for (auto& v : in[0]) v += g[0];
                        });
}

Tensor mean(const Tensor& x) {
    const double n = static_cast<double>(x.numel());
    const double s = std::accumulate(x.values().begin(), x.values().end(), 0.0) / n;
    return Tensor::make({1}, {s}, {x.node()},
                        [n](const Node&, std::span<const double> g, std::span<const std::span<double>> in) {
                            for (auto& v : in[0]) v += g[0] / n;
                        });
}

Tensor sqnorm(const Tensor& x) {
    double s = 0.0;
    for (double v : x.values()) s += v * v;
    return Tensor::make({1}, {s}, {x.node()},
                        [](const Node& self, std::span<const double> g, std::span<const std::span<double>> in) {
                            const auto& v = self.inputs[0]->value;
                            for (std::size_t i = 0; i < v.size(); ++i) in[0][i] += 2.0 * v[i] * g[0];
                        });
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.begin(), logits.end());
    if (p.empty()) return p;
    const double top = *std::max_element(p.begin(), p.end());
    double z = 0.0;
    for (auto& v : p) {
        v = std::exp(v - top);
        z += v;
    }
    for (auto& v : p) v /= z;
    return p;
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
    if (logits.rank() != 1 && logits.rank() != 2) {
        throw ShapeError("softmax_cross_entropy: logits must be (K) or (batch, K), got " +
                         shape_str(logits.shape()));
    }
    const int batch = logits.rank() == 2 ? logits.dim(0) : 1;
    const int k = logits.shape().back();
    if (static_cast<int>(labels.size()) != batch) {
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for a batch of " + std::to_string(batch));
    }
    std::vector<double> probs;
    probs.reserve(logits.numel());
    double loss = 0.0;
    for (int s = 0; s < batch; ++s) {
        const int label = labels[static_cast<std::size_t>(s)];
        if (label < 0 || label >= k) {
            throw ArgumentError("label " + std::to_string(label) + " outside [0, " +
                                std::to_string(k) + ")");
        }
        const auto row = logits.values().subspan(static_cast<std::size_t>(s) * k, static_cast<std::size_t>(k));
        const double top = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (double v : row) z += std::exp(v - top);
        const double log_z = top + std::log(z);
        loss += log_z - row[static_cast<std::size_t>(label)];
        for (double v : row) probs.push_back(std::exp(v - log_z));
    }
    loss /= batch;
    std::vector<int> saved(labels.begin(), labels.end());
    return Tensor::make({1}, {loss}, {logits.node()},
                        [probs = std::move(probs), saved = std::move(saved), batch, k](
                            const Node&, std::span<const double> g, std::span<const std::span<double>> in) {
                            const double w = g[0] / batch;
                            for (int s = 0; s < batch; ++s) {
                                for (int c = 0; c < k; ++c) {
                                    const auto idx = static_cast<std::size_t>(s) * k + c;
                                    const double target = c == saved[static_cast<std::size_t>(s)] ? 1.0 : 0.0;
                                    in[0][idx] += w * (probs[idx] - target);
                                }
                            }
                        });
}

Tensor bce_with_logits(const Tensor& logits, std::span<const int> labels) {
    if (logits.numel() != labels.size()) {
        throw ShapeError("bce_with_logits: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(logits.numel()) + " logits");
    }
    const auto n = static_cast<double>(labels.size());
    double loss = 0.0;
    std::vector<double> probs(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw ArgumentError("binary labels must be 0 or 1");
        const double z = logits.values()[i];
        // log(1 + e^z) − y z, evaluated without overflow.
        loss += std::max(z, 0.0) - z * labels[i] + std::log1p(std::exp(-std::abs(z)));
        probs[i] = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    std::vector<int> saved(labels.begin(), labels.end());
    return Tensor::make({1}, {loss / n}, {logits.node()},
                        [probs = std::move(probs), saved = std::move(saved), n](
                            const Node&, std::span<const double> g, std::span<const std::span<double>> in) {
                            for (std::size_t i = 0; i < probs.size(); ++i) {
                                in[0][i] += g[0] * (probs[i] - saved[i]) / n;
                            }
                        });
}

// Image layers -------------------------------------------------------------------------------------

Tensor conv2d(const Tensor& x, const Tensor& filters, const Tensor& bias, int stride) {
    require_rank(x, 3, "conv2d", "input");
    require_rank(filters, 4, "conv2d", "filters");
    require_rank(bias, 1, "conv2d", "bias");
    if (stride < 1) throw ArgumentError("conv2d: stride must be >= 1");
    const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
    const int O = filters.dim(0), kh = filters.dim(2), kw = filters.dim(3);
    if (filters.dim(1) != C) {
        throw ShapeError("conv2d: filters " + shape_str(filters.shape()) + " expect " +
                         std::to_string(filters.dim(1)) + " channels, input has " + std::to_string(C));
    }
    if (bias.dim(0) != O) throw ShapeError("conv2d: bias size does not match filter count");
    if (kh > H || kw > W) {
        throw ShapeError("conv2d: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                         " larger than input " + std::to_string(H) + "x" + std::to_string(W));
    }
    const int Ho = (H - kh) / stride + 1, Wo = (W - kw) / stride + 1;
    const auto X = x.values(), F = filters.values(), b = bias.values();
    const auto xi = [=](int c, int r, int col) {
        return (static_cast<std::size_t>(c) * H + r) * W + col;
    };
    const auto fi = [=](int o, int c, int r, int col) {
        return ((static_cast<std::size_t>(o) * C + c) * kh + r) * kw + col;
    };
    std::vector<double> out(static_cast<std::size_t>(O) * Ho * Wo);
    for (int o = 0; o < O; ++o) {
        for (int i = 0; i < Ho; ++i) {
            for (int j = 0; j < Wo; ++j) {
                double acc = b[static_cast<std::size_t>(o)];
                for (int c = 0; c < C; ++c) {
                    for (int r = 0; r < kh; ++r) {
                        for (int q = 0; q < kw; ++q) {
                            acc += F[fi(o, c, r, q)] * X[xi(c, i * stride + r, j * stride + q)];
                        }
                    }
                }
                out[(static_cast<std::size_t>(o) * Ho + i) * Wo + j] = acc;
            }
        }
    }
    return Tensor::make({O, Ho, Wo}, std::move(out), {x.node(), filters.node(), bias.node()},
                        [=](const Node& self, std::span<const double> g, std::span<const std::span<double>> in) {
                            const auto& X = self.inputs[0]->value;
                            const auto& F = self.inputs[1]->value;
                            for (int o = 0; o < O; ++o) {
                                for (int i = 0; i < Ho; ++i) {
                                    for (int j = 0; j < Wo; ++j) {
                                        const double go = g[(static_cast<std::size_t>(o) * Ho + i) * Wo + j];
                                        if (go == 0.0) continue;
                                        in[2][static_cast<std::size_t>(o)] += go;
                                        for (int c = 0; c < C; ++c) {
                                            for (int r = 0; r < kh; ++r) {
                                                for (int q = 0; q < kw; ++q) {
                                                    const auto xk = xi(c, i * stride + r, j * stride + q);
                                                    const auto fk = fi(o, c, r, q);
                                                    in[1][fk] += go * X[xk];
                                                    in[0][xk] += go * F[fk];
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        });
}

Tensor maxpool2d(const Tensor& x, int window, int stride) {
    require_rank(x, 3, "maxpool2d", "input");
    if (window < 2) throw ArgumentError("maxpool2d: window must be >= 2");
    if (stride < 1) throw ArgumentError("maxpool2d: stride must be >= 1");
    const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
    if (window > H || window > W) {
        throw ShapeError("maxpool2d: window " + std::to_string(window) + " larger than input " +
                         std::to_string(H) + "x" + std::to_string(W));
    }
    const int Ho = (H - window) / stride + 1, Wo = (W - window) / stride + 1;
    const auto X = x.values();
    std::vector<double> out(static_cast<std::size_t>(C) * Ho * Wo);
    std::vector<std::size_t> argmax(out.size());
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < Ho; ++i) {
            for (int j = 0; j < Wo; ++j) {
                std::size_t best = (static_cast<std::size_t>(c) * H + i * stride) * W + j * stride;
                for (int r = 0; r < window; ++r) {
                    for (int q = 0; q < window; ++q) {
                        const auto k = (static_cast<std::size_t>(c) * H + i * stride + r) * W + j * stride + q;
                        if (X[k] > X[best]) best = k;  // strict: ties keep the first cell
                    }
                }
                const auto o = (static_cast<std::size_t>(c) * Ho + i) * Wo + j;
                out[o] = X[best];
                argmax[o] = best;
            }
        }
    }
    return Tensor::make({C, Ho, Wo}, std::move(out), {x.node()},
                        [argmax = std::move(argmax)](const Node&, std::span<const double> g,
                                                     std::span<const std::span<double>> in) {
                            for (std::size_t o = 0; o < g.size(); ++o) in[0][argmax[o]] += g[o];
                        });
}

}  // namespace pixforge::ag
