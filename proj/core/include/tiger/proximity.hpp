#pragma once

// Structural similarity scores for candidate edges, and the baseline
// purifiers that remove the K least similar candidates.

#include "tiger/random.hpp"
#include "tiger/temporal_graph.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tiger {

/// Sum over common neighbours w of 1 / ln(deg(w)).
double adamic_adar(const TemporalGraph& graph, Edge e, View view);

/// |N(u) & N(v)| / |N(u) | N(v)| with u and v left out of both neighbourhoods;
/// 0 when the union is empty.
double jaccard(const TemporalGraph& graph, Edge e, View view);

struct SvdConfig {
    std::size_t rank = 10;
    double tolerance = 1e-8;
    std::size_t max_iterations = 500;
    std::uint64_t seed = 0;
};

struct LowRank {
    std::vector<double> values;  // Ritz values, largest |value| first
    Tensor vectors;              // n x r, one eigenvector per column
    std::size_t iterations = 0;
    double residual = 0.0;       // max_k ||A v_k - value_k v_k||
};

/// Top-`rank` eigenpairs (by magnitude) of a symmetric matrix by block
/// subspace iteration. Throws NumericalError when the residual does not
/// reach tolerance * max(1, |value_1|) within max_iterations.
LowRank symmetric_low_rank(const Tensor& matrix, const SvdConfig& config);

/// Rank-r reconstruction of the adjacency matrix read at each candidate.
std::vector<double> svd_scores(const TemporalGraph& graph, std::span<const Edge> candidates, View view,
                               const SvdConfig& config = {});

enum class BaselineMethod { jaccard, adamic_adar, svd, random };

BaselineMethod parse_baseline(std::string_view name);
std::string to_string(BaselineMethod method);

/// Indices of the k lowest scores; ties go to the canonically smaller edge.
std::vector<std::size_t> bottom_k(std::span<const Edge> edges, std::span<const double> scores, std::size_t k);

/// Removes nothing itself: returns the K candidates the method would drop,
/// sorted canonically. Throws ConfigError if K exceeds the candidate count.
std::vector<Edge> baseline_purify(const TemporalGraph& graph, std::span<const Edge> candidates,
                                  std::size_t k, BaselineMethod method, View view,
                                  std::uint64_t seed = 0, const SvdConfig& svd = {});

}  // namespace tiger
