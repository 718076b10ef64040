#include "tiger/gcn.hpp"

#include "tiger/error.hpp"
#include "tiger/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tiger {

namespace {

const char* kModule = "gcn";

std::size_t argmax_row(const Tensor& t, std::size_t r) {
    auto row = t.row_span(r);
    return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

ad::Var glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor w(rows, cols);
    for (double& v : w.data()) v = dist(rng);
    return ad::Var::parameter(std::move(w));
}

GcnParams GcnParams::init(std::size_t in_dim, std::size_t hidden, std::size_t out_dim, Rng& rng) {
    GcnParams p;
    p.w1 = glorot(in_dim, hidden, rng);
    p.b1 = ad::Var::parameter(Tensor(1, hidden));
    p.w2 = glorot(hidden, out_dim, rng);
    p.b2 = ad::Var::parameter(Tensor(1, out_dim));
    return p;
}

GcnParams GcnParams::zeros(std::size_t in_dim, std::size_t hidden, std::size_t out_dim) {
    return {ad::Var::parameter(Tensor(in_dim, hidden)), ad::Var::parameter(Tensor(1, hidden)),
            ad::Var::parameter(Tensor(hidden, out_dim)), ad::Var::parameter(Tensor(1, out_dim))};
}

std::vector<Tensor> GcnParams::snapshot() const {
    return {w1.value(), b1.value(), w2.value(), b2.value()};
}

void GcnParams::restore(const std::vector<Tensor>& values) {
    auto params = parameters();
    if (values.size() != params.size()) throw ShapeError(kModule, "snapshot size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].value().same_shape(values[i])) throw ShapeError(kModule, "snapshot shape mismatch");
        params[i].mutable_value() = values[i];
    }
}

AdjacencyPtr share_adjacency(const TemporalGraph& graph, View view) {
    return std::make_shared<const NormalizedAdjacency>(graph.normalized_adjacency(view));
}

ad::Var aggregate(AdjacencyPtr adj_ptr, const ad::Var& x) {
    const NormalizedAdjacency& adj = *adj_ptr;
    const Tensor& in = x.value();
    if (in.rows() != adj.size()) {
        throw ShapeError(kModule, "feature rows " + std::to_string(in.rows()) +
                                      " do not match adjacency size " + std::to_string(adj.size()));
    }
    const std::size_t cols = in.cols();
    Tensor out(in.rows(), cols);
    for (std::size_t i = 0; i < adj.size(); ++i) {
        auto dst = out.row_span(i);
        auto self = in.row_span(i);
        const double sw = adj.self_weight[i];
        for (std::size_t c = 0; c < cols; ++c) dst[c] = sw * self[c];
        for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
            auto src = in.row_span(adj.neighbors[k]);
            const double w = adj.weights[k];
            for (std::size_t c = 0; c < cols; ++c) dst[c] += w * src[c];
        }
    }
    // A_hat is symmetric, so the backward pass is the same aggregation.
    return ad::make_op("aggregate", {x}, std::move(out), [adj_ptr](ad::Node& n) {
        const NormalizedAdjacency& adj = *adj_ptr;
        Tensor& g = n.inputs[0]->grad_buffer();
        const std::size_t width = g.cols();
        for (std::size_t i = 0; i < adj.size(); ++i) {
            auto dst = g.row_span(i);
            auto self = n.grad.row_span(i);
            const double sw = adj.self_weight[i];
            for (std::size_t c = 0; c < width; ++c) dst[c] += sw * self[c];
            for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) {
                auto src = n.grad.row_span(adj.neighbors[k]);
                const double w = adj.weights[k];
                for (std::size_t c = 0; c < width; ++c) dst[c] += w * src[c];
            }
        }
    });
}

ad::Var gcn_forward(const GcnParams& params, const AdjacencyPtr& adj, const ad::Var& features) {
    if (features.cols() != params.in_dim()) {
        throw ShapeError(kModule, "feature dimension " + std::to_string(features.cols()) +
                                      " does not match encoder input " + std::to_string(params.in_dim()));
    }
    // A (X W) == (A X) W; aggregating after the product touches fewer columns.
    ad::Var hidden = ad::relu(ad::add(aggregate(adj, ad::matmul(features, params.w1)), params.b1));
    return ad::add(aggregate(adj, ad::matmul(hidden, params.w2)), params.b2);
}

ad::Var gcn_forward(const GcnParams& params, const TemporalGraph& graph, View view) {
    return gcn_forward(params, share_adjacency(graph, view), ad::Var::constant(graph.features()));
}

double classification_accuracy(const Tensor& logits, const std::vector<int>& labels,
                               const std::vector<NodeId>& nodes, const TemporalGraph& graph) {
    std::size_t total = 0;
    std::size_t correct = 0;
    for (NodeId v : nodes) {
        if (!graph.contains_node(v) || labels[v] < 0) continue;
        ++total;
        if (argmax_row(logits, v) == static_cast<std::size_t>(labels[v])) ++correct;
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

TrainedClassifier train_classifier(const TemporalGraph& graph, View view, const NodeSplit& split,
                                   const ClassifierConfig& config) {
    if (!graph.has_labels()) throw ConfigError(kModule, "classifier training needs node labels");
    const auto& labels = graph.labels();
    std::vector<std::size_t> rows;
    std::vector<std::size_t> targets;
    std::set<int> train_classes;
    for (NodeId v : split.train) {
        if (!graph.contains_node(v) || labels[v] < 0) continue;
        rows.push_back(v);
        targets.push_back(static_cast<std::size_t>(labels[v]));
        train_classes.insert(labels[v]);
    }
    if (rows.empty()) throw ConfigError(kModule, "training split has no labeled present node");

    const int max_label = *std::max_element(labels.begin(), labels.end());
    TrainedClassifier result;
    result.num_classes = static_cast<std::size_t>(std::max(max_label, 0)) + 1;
    Rng rng(config.seed);
    result.params = GcnParams::init(graph.features().cols(), config.hidden, result.num_classes, rng);
    if (train_classes.size() < 2) {
        result.report.degenerate = true;
        result.report.warnings.push_back("training labels contain a single class; accuracy is trivial");
    }

    const AdjacencyPtr adj = share_adjacency(graph, view);
    const ad::Var x = ad::Var::constant(graph.features());
    ad::Adam optimizer(ad::AdamConfig{config.learning_rate});
    auto params = result.params.parameters();

    double best_val = -1.0;
    std::vector<Tensor> best = result.params.snapshot();
    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        ad::zero_grad(params);
        ad::Var logits = gcn_forward(result.params, adj, x);
        ad::Var loss = ad::softmax_cross_entropy(logits, rows, targets);
        ad::backward(loss);
        optimizer.step(params);
        result.report.loss_trace.push_back(loss.value().item());
        result.report.epochs_run = epoch;

        if (split.val.empty()) continue;
        const Tensor after = gcn_forward(result.params, adj, x).value();
        const double val = classification_accuracy(after, labels, split.val, graph);
        if (val > best_val) {
            best_val = val;
            best = result.params.snapshot();
            result.report.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    if (!split.val.empty()) result.params.restore(best);

    const Tensor logits = gcn_forward(result.params, adj, x).value();
    result.report.train_accuracy = classification_accuracy(logits, labels, split.train, graph);
    result.report.val_accuracy = classification_accuracy(logits, labels, split.val, graph);
    result.report.test_accuracy = classification_accuracy(logits, labels, split.test, graph);
    return result;
}

Tensor class_probabilities(const GcnParams& params, const TemporalGraph& graph, View view) {
    const Tensor logits = gcn_forward(params, graph, view).value();
    return ad::softmax_rows(ad::Var::constant(logits)).value();
}

}  // namespace tiger
