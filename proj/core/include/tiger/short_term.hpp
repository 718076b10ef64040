#pragma once

// Short-term scorer: how consistent is a candidate neighbour's class
// distribution with the distributions of a node's existing neighbours?
//
// For an edge (i, j), K_i holds kl(l_i, l_k) over the neighbours k of i
// (excluding j by default). The edge's divergence kl(l_i, l_j) is turned
// into a Z-score against K_i, likewise for j, and the score is
// -(Z_i + Z_j) / 2. Scores are never positive; 0 means fully consistent.

#include "tiger/temporal_graph.hpp"
#include "tiger/tensor.hpp"

#include <span>
#include <vector>

namespace tiger {

inline constexpr double kDistributionFloor = 1e-12;

/// Per-node class distributions, floored at 1e-12 and renormalised.
class LatentMatrix {
public:
    LatentMatrix() = default;
    /// Rows must be non-negative with a positive sum.
    static LatentMatrix from_probabilities(const Tensor& probabilities);
    /// Row-wise softmax of classifier logits, then smoothed.
    static LatentMatrix from_logits(const Tensor& logits);

    std::size_t rows() const noexcept { return probs_.rows(); }
    std::size_t classes() const noexcept { return probs_.cols(); }
    std::span<const double> row(NodeId v) const;
    const Tensor& tensor() const noexcept { return probs_; }
    bool empty() const noexcept { return probs_.empty(); }

private:
    Tensor probs_;
};

/// Floors every entry at 1e-12 and renormalises to sum 1.
std::vector<double> smooth_distribution(std::span<const double> p);

/// KL(p || q) = sum p ln(p / q) on smoothed copies of both arguments.
double kl(std::span<const double> p, std::span<const double> q);

struct ShortTermConfig {
    /// Leave the candidate partner out of the reference neighbourhood.
    bool exclude_partner = true;
    View view = View::purified;
};

struct Consistency {
    double z_i = 0.0;
    double z_j = 0.0;
    double score = 0.0;
};

/// Both Z-scores and the combined consistency score of edge e.
Consistency consistency_detail(Edge e, const LatentMatrix& latent, const TemporalGraph& graph,
                               const ShortTermConfig& config = {});

double consistency_score(Edge e, const LatentMatrix& latent, const TemporalGraph& graph,
                         const ShortTermConfig& config = {});

std::vector<double> score_short_batch(std::span<const Edge> candidates, const LatentMatrix& latent,
                                      const TemporalGraph& graph, const ShortTermConfig& config = {});

}  // namespace tiger
