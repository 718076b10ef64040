#pragma once

// Ensemble of the three sub-scores. Each candidate edge gets its own weights
//
//   (a_L, a_S, a_P) = softmax(MLP_L(pair(z_i, z_j)), MLP_S(pair(l_i, l_j)), w_p)
//
// and the final score is a_L * S_L + a_S * norm(S_S) + a_P * norm(S_P), where
// norm is min-max over the scored batch. Without the short-term scorer the
// softmax runs over (MLP_L, w_p) only.

#include "tiger/autodiff.hpp"
#include "tiger/random.hpp"

#include <optional>
#include <span>
#include <vector>

namespace tiger {

/// in -> hidden -> 1 perceptron with a ReLU in between.
struct WeightMlp {
    ad::Var w1;
    ad::Var b1;
    ad::Var w2;
    ad::Var b2;

    static WeightMlp init(std::size_t in_dim, std::size_t hidden, Rng& rng);
    /// One logit per row of x.
    ad::Var forward(const ad::Var& x) const;
    std::vector<ad::Var> parameters() const { return {w1, b1, w2, b2}; }
};

/// [ (a + b) / 2 || max(a, b) ] for two 1 x d rows.
Tensor pair_features(const Tensor& a, const Tensor& b);

/// Batched pair features of rows (rows_i[k], rows_j[k]) of x: E x 2d.
ad::Var pair_features(const ad::Var& x, std::span<const std::size_t> rows_i,
                      std::span<const std::size_t> rows_j);

/// (x - min) / (max - min); every output is 0.5 when max - min < 1e-12.
std::vector<double> minmax_normalize(std::span<const double> scores);

struct EnsembleConfig {
    double wp = 10.0;
};

struct Combined {
    ad::Var score;    // E x 1
    ad::Var weights;  // E x 3 (or E x 2 without the short-term column)
};

/// Weighted sum of the sub-scores. `s_long` and the logits are E x 1;
/// `short_logit` and `s_short_norm` are both present or both absent.
Combined combine(const ad::Var& s_long, const ad::Var& long_logit, const std::optional<ad::Var>& short_logit,
                 const std::optional<Tensor>& s_short_norm, const Tensor& s_prox_norm,
                 const EnsembleConfig& config);

struct EnsembleParams {
    WeightMlp mlp_long;
    WeightMlp mlp_short;

    std::vector<ad::Var> parameters() const;
};

struct SubScores {
    double s_long = 0.0;
    double s_short = 0.0;  // raw, <= 0
    double s_prox = 0.0;   // raw, >= 0
    double s_short_norm = 0.0;
    double s_prox_norm = 0.0;
    std::vector<double> weights;  // (a_L, a_S, a_P), or (a_L, a_P) without M_S
    double score = 0.0;
    bool short_term = false;
};

/// Final score of a single edge given its fused representations, class
/// distributions and already-normalised sub-scores. Pass empty l_i / l_j to
/// leave the short-term scorer out.
double final_score(const Tensor& z_i, const Tensor& z_j, const Tensor& l_i, const Tensor& l_j,
                   const SubScores& sub, const EnsembleParams& params, const EnsembleConfig& config);

}  // namespace tiger
