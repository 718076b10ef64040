#pragma once

// Long-term scorer.
//
// Every node keeps the embeddings it had at each past step. At step t the
// current embedding h_i^(t) attends over {h_i^(t)} plus that history:
//
//   alpha_i^(tau) = softmax_tau( (h_i^(t) W_Q) . (h_i^(tau) W_K) )
//   z_i           = sum_tau alpha_i^(tau) h_i^(tau) W_V
//
// (row-vector convention; no 1/sqrt(d) scaling). An edge is then scored by a
// symmetric bilinear form S_L(i, j) = sigmoid(z_i W_L z_j^T + b_L) with
// W_L = (B + B^T) / 2.
//
// History entries are constants: gradient reaches the encoder only through
// the current step's embedding.

#include "tiger/autodiff.hpp"
#include "tiger/random.hpp"
#include "tiger/temporal_graph.hpp"

#include <deque>
#include <limits>
#include <span>
#include <vector>

namespace tiger {

class EmbeddingMemory {
public:
    /// `cap` bounds the stored entries per node; 0 keeps everything.
    explicit EmbeddingMemory(std::size_t cap = 0) : cap_(cap) {}

    /// Appends row v of `embeddings` to the history of each listed node,
    /// dropping the oldest entries beyond the cap.
    void push(std::size_t step, const Tensor& embeddings, std::span<const NodeId> nodes);

    std::size_t length(NodeId v) const noexcept;
    /// Stored embeddings of v, oldest first.
    const std::deque<std::vector<double>>& entries(NodeId v) const;
    std::size_t cap() const noexcept { return cap_; }
    std::size_t last_step() const noexcept { return last_step_; }
    void clear();

private:
    std::size_t cap_;
    std::size_t last_step_ = 0;
    std::vector<std::deque<std::vector<double>>> store_;
};

struct AttentionParams {
    ad::Var wq;
    ad::Var wk;
    ad::Var wv;

    static AttentionParams init(std::size_t dim, Rng& rng);
    std::vector<ad::Var> parameters() const { return {wq, wk, wv}; }
};

struct BilinearParams {
    ad::Var raw;   // B
    ad::Var bias;  // b_L, 1x1

    static BilinearParams init(std::size_t dim, Rng& rng);
    /// W_L = (B + B^T) / 2, differentiable w.r.t. B.
    ad::Var effective() const;
    std::vector<ad::Var> parameters() const { return {raw, bias}; }
};

struct FusedBatch {
    ad::Var z;                        // one row per fused node
    ad::Var alpha;                    // attention weight per memory entry
    std::vector<std::size_t> owner;   // memory entry -> row of z
    std::vector<NodeId> nodes;        // row of z -> node id
    std::vector<std::size_t> row_of;  // node id -> row of z (npos if absent)

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
};

/// Fuses the listed nodes. `embeddings` is the current-step encoder output
/// with one row per node id. With `use_attention` false the history is
/// ignored and z_i = h_i^(t) W_V.
FusedBatch fuse_all(const EmbeddingMemory& memory, const ad::Var& embeddings,
                    std::span<const NodeId> nodes, const AttentionParams& params,
                    bool use_attention = true);

/// Single-node fusion; `current` is 1 x d. Equivalent to fuse_all on {v}.
ad::Var fuse(const EmbeddingMemory& memory, NodeId v, const ad::Var& current,
             const AttentionParams& params);

/// S_L for each pair (rows_i[k], rows_j[k]) of `z`, as an E x 1 column.
/// Exactly symmetric: swapping the two row lists gives bit-identical scores.
ad::Var score_long_batch(const ad::Var& z, std::span<const std::size_t> rows_i,
                         std::span<const std::size_t> rows_j, const BilinearParams& params);

/// S_L of two fused representations given as 1 x d rows.
double score_long(const Tensor& z_i, const Tensor& z_j, const BilinearParams& params);

}  // namespace tiger
