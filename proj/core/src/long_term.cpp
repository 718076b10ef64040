#include "tiger/long_term.hpp"

#include "tiger/error.hpp"
#include "tiger/gcn.hpp"

#include <algorithm>

namespace tiger {

namespace {

const char* kModule = "long-term";
const std::deque<std::vector<double>> kEmpty;

}  // namespace

void EmbeddingMemory::push(std::size_t step, const Tensor& embeddings, std::span<const NodeId> nodes) {
    for (NodeId v : nodes) {
        if (v >= embeddings.rows()) {
            throw ShapeError(kModule, "embedding matrix has no row for node " + std::to_string(v));
        }
        if (v >= store_.size()) store_.resize(static_cast<std::size_t>(v) + 1);
        auto row = embeddings.row_span(v);
        auto& list = store_[v];
        list.emplace_back(row.begin(), row.end());
        while (cap_ != 0 && list.size() > cap_) list.pop_front();
    }
    last_step_ = step;
}

std::size_t EmbeddingMemory::length(NodeId v) const noexcept {
    return v < store_.size() ? store_[v].size() : 0;
}

const std::deque<std::vector<double>>& EmbeddingMemory::entries(NodeId v) const {
    return v < store_.size() ? store_[v] : kEmpty;
}

void EmbeddingMemory::clear() {
    store_.clear();
    last_step_ = 0;
}

AttentionParams AttentionParams::init(std::size_t dim, Rng& rng) {
    return {glorot(dim, dim, rng), glorot(dim, dim, rng), glorot(dim, dim, rng)};
}

BilinearParams BilinearParams::init(std::size_t dim, Rng& rng) {
    return {glorot(dim, dim, rng), ad::Var::parameter(Tensor(1, 1))};
}

ad::Var BilinearParams::effective() const {
    return ad::scale(ad::add(raw, ad::transpose(raw)), 0.5);
}

FusedBatch fuse_all(const EmbeddingMemory& memory, const ad::Var& embeddings,
                    std::span<const NodeId> nodes, const AttentionParams& params,
                    bool use_attention) {
    const std::size_t dim = embeddings.cols();
    FusedBatch out;
    out.nodes.assign(nodes.begin(), nodes.end());
    out.row_of.assign(embeddings.rows(), FusedBatch::npos);
    std::vector<std::size_t> rows(nodes.begin(), nodes.end());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k] >= embeddings.rows()) {
            throw ShapeError(kModule, "no embedding row for node " + std::to_string(nodes[k]));
        }
        out.row_of[nodes[k]] = k;
    }
    ad::Var current = ad::gather_rows(embeddings, rows);

    if (!use_attention) {
        out.z = ad::matmul(current, params.wv);
        out.alpha = ad::Var::constant(Tensor(nodes.size(), 1, 1.0));
        out.owner.resize(nodes.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) out.owner[k] = k;
        return out;
    }

    std::size_t past_count = 0;
    for (NodeId v : nodes) past_count += memory.entries(v).size();
    Tensor past(past_count, dim);
    out.owner.reserve(past_count + nodes.size());
    std::size_t r = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        for (const auto& entry : memory.entries(nodes[k])) {
            if (entry.size() != dim) {
                throw ShapeError(kModule, "memory entry width " + std::to_string(entry.size()) +
                                              " differs from embedding width " + std::to_string(dim));
            }
            std::copy(entry.begin(), entry.end(), past.row_span(r++).begin());
            out.owner.push_back(k);
        }
    }
    for (std::size_t k = 0; k < nodes.size(); ++k) out.owner.push_back(k);

    ad::Var all = ad::concat_rows(ad::Var::constant(std::move(past)), current);
    ad::Var queries = ad::gather_rows(ad::matmul(current, params.wq), out.owner);
    ad::Var logits = ad::rowwise_dot(queries, ad::matmul(all, params.wk));
    out.alpha = ad::segment_softmax(logits, out.owner, nodes.size());
    out.z = ad::segment_weighted_sum(out.alpha, ad::matmul(all, params.wv), out.owner, nodes.size());
    return out;
}

ad::Var fuse(const EmbeddingMemory& memory, NodeId v, const ad::Var& current,
             const AttentionParams& params) {
    if (current.rows() != 1) throw ShapeError(kModule, "fuse expects a 1 x d current embedding");
    const std::size_t dim = current.cols();
    const auto& history = memory.entries(v);
    Tensor past(history.size(), dim);
    for (std::size_t r = 0; r < history.size(); ++r) {
        if (history[r].size() != dim) throw ShapeError(kModule, "memory entry width mismatch");
        std::copy(history[r].begin(), history[r].end(), past.row_span(r).begin());
    }
    const std::vector<std::size_t> owner(history.size() + 1, 0);
    ad::Var all = ad::concat_rows(ad::Var::constant(std::move(past)), current);
    ad::Var queries = ad::gather_rows(ad::matmul(current, params.wq), owner);
    ad::Var logits = ad::rowwise_dot(queries, ad::matmul(all, params.wk));
    ad::Var alpha = ad::segment_softmax(logits, owner, 1);
    return ad::segment_weighted_sum(alpha, ad::matmul(all, params.wv), owner, 1);
}

ad::Var score_long_batch(const ad::Var& z, std::span<const std::size_t> rows_i,
                         std::span<const std::size_t> rows_j, const BilinearParams& params) {
    if (rows_i.size() != rows_j.size()) throw ShapeError(kModule, "pair lists differ in length");
    ad::Var projected = ad::matmul(z, params.effective());
    ad::Var zi = ad::gather_rows(z, rows_i);
    ad::Var zj = ad::gather_rows(z, rows_j);
    // z_i W z_j and z_j W z_i agree mathematically; summing both makes the
    // floating-point result independent of argument order.
    ad::Var forward = ad::rowwise_dot(ad::gather_rows(projected, rows_i), zj);
    ad::Var reverse = ad::rowwise_dot(ad::gather_rows(projected, rows_j), zi);
    return ad::sigmoid(ad::add(ad::scale(ad::add(forward, reverse), 0.5), params.bias));
}

double score_long(const Tensor& z_i, const Tensor& z_j, const BilinearParams& params) {
    if (!z_i.same_shape(z_j) || z_i.rows() != 1) {
        throw ShapeError(kModule, "score_long expects two 1 x d rows");
    }
    ad::Var z = ad::concat_rows(ad::Var::constant(z_i), ad::Var::constant(z_j));
    const std::size_t a = 0;
    const std::size_t b = 1;
    return score_long_batch(z, std::span(&a, 1), std::span(&b, 1), params).value().item();
}

}  // namespace tiger
