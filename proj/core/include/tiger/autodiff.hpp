#pragma once

// Reverse-mode automatic differentiation over dense Tensors.
//
// A Var is a handle to a node in a dynamically built computation graph.
// Every operation below records its inputs and a backward rule; calling
// backward() on a scalar Var walks the graph in reverse topological order
// and accumulates gradients into every node that requires them.
//
// Parameters are long-lived leaf nodes. Intermediate nodes live as long as
// some Var (typically the loss) still references them.

#include "tiger/tensor.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace tiger::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node&)>;

struct Node {
    const char* op = "leaf";
    std::vector<NodePtr> inputs;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;

    /// Gradient buffer, allocated as zeros on first use.
    Tensor& grad_buffer();
    bool has_grad() const noexcept { return !grad.empty() || value.empty(); }
};

class Var {
public:
    Var() = default;
    explicit Var(NodePtr node) : node_(std::move(node)) {}

    static Var constant(Tensor value);
    static Var parameter(Tensor value);

    const Tensor& value() const { return node_->value; }
    /// Mutable access for optimizers and finite-difference probes. Only valid
    /// on leaves; mutating an interior node does not re-run the forward pass.
    Tensor& mutable_value() { return node_->value; }
    /// Gradient after backward(); zeros when nothing flowed into this node.
    Tensor grad() const;

    bool requires_grad() const { return node_->requires_grad; }
    std::size_t rows() const { return node_->value.rows(); }
    std::size_t cols() const { return node_->value.cols(); }
    const char* op() const { return node_->op; }

    const NodePtr& node() const { return node_; }
    explicit operator bool() const { return static_cast<bool>(node_); }

private:
    NodePtr node_;
};

/// Registers a new graph node. `fn` receives the node itself and must add
/// its contribution into each differentiable input's grad_buffer().
Var make_op(const char* op, std::vector<Var> inputs, Tensor value, BackwardFn fn);

/// Runs reverse-mode accumulation from a 1x1 loss.
void backward(const Var& loss);
void zero_grad(std::span<Var> params);

// Linear algebra
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

// Element-wise arithmetic. add() broadcasts b when it is 1x1 or 1 x a.cols().
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var maximum(const Var& a, const Var& b);
Var scale(const Var& a, double factor);

// Non-linearities
Var relu(const Var& a);
Var sigmoid(const Var& a);
/// Natural log of max(x, 1e-12).
Var log(const Var& a);

// Reductions
Var sum(const Var& a);
Var mean(const Var& a);
/// m x n -> m x 1.
Var row_sum(const Var& a);
/// Row-wise inner product of two m x n matrices -> m x 1.
Var rowwise_dot(const Var& a, const Var& b);

// Softmax
Var softmax(const Var& a);
Var softmax_rows(const Var& a);

// Structural
Var gather_rows(const Var& a, std::span<const std::size_t> index);
Var concat_rows(const Var& a, const Var& b);
Var concat_cols(std::span<const Var> parts);

// Segmented ops: entry e belongs to segment owner[e] in [0, num_segments).
/// Softmax of an E x 1 column within each segment.
Var segment_softmax(const Var& logits, std::span<const std::size_t> owner,
                    std::size_t num_segments);
/// out[s] = sum_{e : owner[e]=s} weight[e] * values[e, :]  (E x 1, E x k -> S x k).
Var segment_weighted_sum(const Var& weight, const Var& values,
                         std::span<const std::size_t> owner, std::size_t num_segments);

// Losses
inline constexpr double kProbabilityClamp = 1e-7;
/// Mean binary cross-entropy; predictions clamped to [1e-7, 1 - 1e-7].
Var bce_loss(const Var& pred, const Tensor& label);
/// Mean softmax cross-entropy of `logits` rows listed in `rows` against
/// integer class targets.
Var softmax_cross_entropy(const Var& logits, std::span<const std::size_t> rows,
                          std::span<const std::size_t> targets);

}  // namespace tiger::ad
