#pragma once

// Two-layer graph convolutional encoder:
//
//   H = A_hat * relu(A_hat * X * W1 + b1) * W2 + b2
//
// Used as the trainable encoder inside the long-term scorer and as the
// node classifier whose class probabilities drive the short-term scorer.

#include "tiger/autodiff.hpp"
#include "tiger/random.hpp"
#include "tiger/temporal_graph.hpp"

#include <memory>
#include <string>
#include <vector>

namespace tiger {

struct GcnParams {
    ad::Var w1;
    ad::Var b1;
    ad::Var w2;
    ad::Var b2;

    /// Glorot-uniform weights, zero biases.
    static GcnParams init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim, Rng& rng);
    /// All-zero weights and biases.
    static GcnParams zeros(std::size_t in_dim, std::size_t hidden, std::size_t out_dim);

    std::size_t in_dim() const { return w1.rows(); }
    std::size_t hidden_dim() const { return w1.cols(); }
    std::size_t out_dim() const { return w2.cols(); }

    std::vector<ad::Var> parameters() const { return {w1, b1, w2, b2}; }
    std::vector<Tensor> snapshot() const;
    void restore(const std::vector<Tensor>& values);
};

/// Glorot-uniform parameter of the given shape.
ad::Var glorot(std::size_t rows, std::size_t cols, Rng& rng);

using AdjacencyPtr = std::shared_ptr<const NormalizedAdjacency>;

AdjacencyPtr share_adjacency(const TemporalGraph& graph, View view);

/// Sparse neighbourhood aggregation A_hat * x as a differentiable op.
ad::Var aggregate(AdjacencyPtr adj, const ad::Var& x);

ad::Var gcn_forward(const GcnParams& params, const AdjacencyPtr& adj, const ad::Var& features);
ad::Var gcn_forward(const GcnParams& params, const TemporalGraph& graph, View view);

struct NodeSplit {
    std::vector<NodeId> train;
    std::vector<NodeId> val;
    std::vector<NodeId> test;
};

struct ClassifierConfig {
    std::size_t epochs = 200;
    std::size_t patience = 20;
    std::size_t hidden = 64;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
};

struct ClassifierReport {
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    double test_accuracy = 0.0;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    bool degenerate = false;
    std::vector<double> loss_trace;
    std::vector<std::string> warnings;
};

struct TrainedClassifier {
    GcnParams params;
    std::size_t num_classes = 0;
    ClassifierReport report;
};

/// Full-batch cross-entropy training on the split's present training nodes,
/// with early stopping on validation accuracy. Throws ConfigError when no
/// labeled training node is present.
TrainedClassifier train_classifier(const TemporalGraph& graph, View view, const NodeSplit& split,
                                   const ClassifierConfig& config);

/// Fraction of present, labeled `nodes` whose arg-max logit matches the label.
double classification_accuracy(const Tensor& logits, const std::vector<int>& labels,
                               const std::vector<NodeId>& nodes, const TemporalGraph& graph);

/// Row-wise softmax of the classifier logits on the given view.
Tensor class_probabilities(const GcnParams& params, const TemporalGraph& graph, View view);

}  // namespace tiger
