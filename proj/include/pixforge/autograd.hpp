#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pixforge::ag {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& s) noexcept;
std::string shape_str(const Shape& s);

namespace detail {

struct Node;

/// Backward rule: given d(loss)/d(output), accumulate into the input slots.
using BackwardFn = std::function<void(const Node& self, std::span<const double> grad_out,
                                      std::span<const std::span<double>> grad_in)>;

struct Node {
    std::uint64_t id = 0;
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool frozen = false;
    std::vector<std::shared_ptr<Node>> inputs;
    BackwardFn backward;
};

}  // namespace detail

/// Shared handle to a node of the define-by-run graph.
///
/// Every op returns a fresh Tensor that records its inputs and a backward
/// rule; the graph reachable from a loss is the tape that `backward` replays.
/// Copies of a Tensor alias the same storage.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor from(Shape shape, std::vector<double> values);
    static Tensor scalar(double value);

    bool defined() const noexcept { return node_ != nullptr; }
    std::uint64_t node_id() const noexcept { return node_->id; }
    const Shape& shape() const noexcept { return node_->shape; }
    int dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t rank() const noexcept { return node_->shape.size(); }
    std::size_t numel() const noexcept { return node_->value.size(); }

    std::span<const double> values() const noexcept { return node_->value; }
    /// In-place access for optimisers; does not touch the graph.
    std::span<double> mutable_values() noexcept { return node_->value; }
    std::span<const double> grad() const noexcept { return node_->grad; }
    double item() const;

    bool frozen() const noexcept { return node_->frozen; }
    /// Frozen tensors still receive gradients but optimisers leave them alone.
    void set_frozen(bool f) noexcept { node_->frozen = f; }
    void zero_grad() noexcept;

    /// Fresh leaf holding a copy of the values (and nothing of the history).
    Tensor detach() const;

    const std::shared_ptr<detail::Node>& node() const noexcept { return node_; }
    static Tensor make(Shape shape, std::vector<double> values,
                       std::vector<std::shared_ptr<detail::Node>> inputs,
                       detail::BackwardFn backward);

private:
    explicit Tensor(std::shared_ptr<detail::Node> n) : node_(std::move(n)) {}
    std::shared_ptr<detail::Node> node_;
};

/// Topologically ordered record of the graph reachable from a root.
class Tape {
public:
    struct Entry {
        std::uint64_t id;
        std::vector<std::uint64_t> inputs;
    };

    static Tape record(const Tensor& root);

    std::size_t size() const noexcept { return nodes_.size(); }
    std::vector<Entry> entries() const;
    /// Inputs always precede the nodes that consume them.
    const std::vector<detail::Node*>& nodes() const noexcept { return nodes_; }

private:
    std::vector<detail::Node*> nodes_;
};

// Elementwise ------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// Shape and linear algebra -----------------------------------------------------

/// (m,k)·(k,n) -> (m,n) and (m,k)·(k) -> (m).
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

/// y = A x + B for x of shape (n) or (batch, n); A is (m, n), B is (m).
Tensor linear(const Tensor& x, const Tensor& A, const Tensor& B);

// Reductions and losses -----------------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Σ x².
Tensor sqnorm(const Tensor& x);

/// Mean cross-entropy of softmax(logits) against integer labels.
/// Logits are (K) with one label or (batch, K) with one label per row.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);
/// Mean binary cross-entropy of sigmoid(logit) against labels in {0, 1}.
/// Logits hold one value per label.
Tensor bce_with_logits(const Tensor& logits, std::span<const int> labels);

std::vector<double> softmax(std::span<const double> logits);

// Image layers -----------------------------------------------------------------------

/// Valid cross-correlation of x (C,H,W) with filters (O,C,kh,kw) plus bias (O).
Tensor conv2d(const Tensor& x, const Tensor& filters, const Tensor& bias, int stride);
/// Window max over each channel of x (C,H,W); gradient goes to the first
/// maximal cell in row-major order.
Tensor maxpool2d(const Tensor& x, int window, int stride);

// Differentiation and updates --------------------------------------------------------

/// Accumulate d(loss)/d(t) into the grad of every tensor reachable from a
/// scalar loss, frozen ones included.
void backward(const Tensor& loss);

void zero_grad(std::span<Tensor> params);
/// p <- p − lr · grad for every non-frozen p.
void sgd_step(std::span<Tensor> params, double lr);

}  // namespace pixforge::ag
