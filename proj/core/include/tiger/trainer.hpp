#pragma once

// Self-supervised training of the purifier at one time step.
//
// Positives are the current edges, negatives an equal number of uniformly
// drawn non-edges. Each epoch scores both sets, keeps the top beta fraction
// of positives by final score, and minimises
//
//   bce(kept positives, 1) + bce(negatives, 0)
//
// jointly over the encoder, attention, bilinear and both weight MLPs.

#include "tiger/ensemble.hpp"
#include "tiger/gcn.hpp"
#include "tiger/long_term.hpp"
#include "tiger/optimizer.hpp"
#include "tiger/short_term.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace tiger {

struct PurifierConfig {
    std::size_t hidden = 64;
    double beta = 0.2;
    double wp = 10.0;
    std::size_t epochs = 100;
    double learning_rate = 1e-3;
    /// Stop once the best loss has not improved by min_improvement for this many epochs.
    std::size_t patience = 10;
    double min_improvement = 1e-5;
    bool use_attention = true;
    bool use_short_term = true;
    bool exclude_partner = true;
    std::size_t memory_cap = 0;
    /// Uniform subsample of the positives per step; 0 uses every edge.
    std::size_t max_positives = 0;
    bool warm_start = true;

    void validate() const;
};

struct PurifierModel {
    GcnParams encoder;
    AttentionParams attention;
    BilinearParams bilinear;
    EnsembleParams ensemble;

    static PurifierModel init(std::size_t in_dim, std::size_t hidden, std::size_t classes, Rng& rng);
    std::vector<ad::Var> parameters() const;
    std::vector<Tensor> snapshot() const;
    void restore(const std::vector<Tensor>& values);
};

/// Everything the scorer reads besides the parameters.
struct ScoringContext {
    const TemporalGraph* graph = nullptr;
    View view = View::purified;
    const EmbeddingMemory* memory = nullptr;
    /// Class distributions from the previous classifier; null disables M_S.
    const LatentMatrix* latent = nullptr;
    ShortTermConfig short_term;
    bool use_attention = true;
    EnsembleConfig ensemble;
    AdjacencyPtr adjacency;
};

/// Raw, parameter-free sub-scores of a pair list.
struct RawSubScores {
    std::vector<double> s_short;  // empty when M_S is disabled
    std::vector<double> s_prox;
};

RawSubScores raw_subscores(const ScoringContext& ctx, std::span<const Edge> pairs);

struct ScoredBatch {
    ad::Var embeddings;  // encoder output, one row per node id
    FusedBatch fused;
    ad::Var s_long;
    Combined combined;
    std::optional<Tensor> s_short_norm;
    Tensor s_prox_norm;
};

/// Differentiable final scores of `pairs`; sub-scores are min-max normalised
/// over exactly this batch.
ScoredBatch score_pairs(const PurifierModel& model, const ScoringContext& ctx, std::span<const Edge> pairs,
                        const RawSubScores& raw);

/// Per-edge breakdown of a scored batch.
std::vector<SubScores> unpack_subscores(const ScoredBatch& batch, const RawSubScores& raw);

/// ceil(beta * n), robust to beta * n landing just above an integer.
std::size_t filtered_size(std::size_t n, double beta);

/// Uniform draw without replacement of `count` unordered non-adjacent pairs
/// of present nodes. Throws ConfigError if fewer exist.
std::vector<Edge> sample_negatives(const TemporalGraph& graph, View view, std::size_t count, Rng& rng);

/// Indices of the ceil(beta * n) highest-scoring positives, ties to the
/// canonically smaller edge, returned in ascending index order.
std::vector<std::size_t> filter_positives(std::span<const Edge> positives, std::span<const double> scores,
                                          double beta);

/// bce(scores[pos], 1) + bce(scores[neg], 0); each term a mean.
ad::Var pseudo_label_loss(const ad::Var& scores, std::span<const std::size_t> pos_rows,
                          std::span<const std::size_t> neg_rows);

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::size_t filtered = 0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    bool early_stopped = false;

    std::vector<double> losses() const;
};

/// Trains `model` in place on the context's graph.
TrainReport train_step(PurifierModel& model, ad::Adam& optimizer, const ScoringContext& ctx,
                       const PurifierConfig& config, Rng& rng);

}  // namespace tiger
