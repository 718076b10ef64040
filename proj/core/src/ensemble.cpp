#include "tiger/ensemble.hpp"

#include "tiger/error.hpp"
#include "tiger/gcn.hpp"

#include <algorithm>
#include <cmath>

namespace tiger {

namespace {

const char* kModule = "ensemble";

}  // namespace

WeightMlp WeightMlp::init(std::size_t in_dim, std::size_t hidden, Rng& rng) {
    WeightMlp m;
    m.w1 = glorot(in_dim, hidden, rng);
    m.b1 = ad::Var::parameter(Tensor(1, hidden));
    m.w2 = glorot(hidden, 1, rng);
    m.b2 = ad::Var::parameter(Tensor(1, 1));
    return m;
}

ad::Var WeightMlp::forward(const ad::Var& x) const {
    if (x.cols() != w1.rows()) {
        throw ShapeError(kModule, "weight MLP expects " + std::to_string(w1.rows()) + " inputs, got " +
                                      std::to_string(x.cols()));
    }
    ad::Var hidden = ad::relu(ad::add(ad::matmul(x, w1), b1));
    return ad::add(ad::matmul(hidden, w2), b2);
}

Tensor pair_features(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b) || a.rows() != 1) {
        throw ShapeError(kModule, "pair_features needs two rows of equal width, got " + shape_string(a) +
                                      " and " + shape_string(b));
    }
    const std::size_t d = a.cols();
    Tensor out(1, 2 * d);
    for (std::size_t c = 0; c < d; ++c) {
        out(0, c) = (a(0, c) + b(0, c)) * 0.5;
        out(0, d + c) = std::max(a(0, c), b(0, c));
    }
    return out;
}

ad::Var pair_features(const ad::Var& x, std::span<const std::size_t> rows_i,
                      std::span<const std::size_t> rows_j) {
    if (rows_i.size() != rows_j.size()) throw ShapeError(kModule, "pair lists differ in length");
    ad::Var a = ad::gather_rows(x, rows_i);
    ad::Var b = ad::gather_rows(x, rows_j);
    const ad::Var parts[] = {ad::scale(ad::add(a, b), 0.5), ad::maximum(a, b)};
    return ad::concat_cols(parts);
}

std::vector<double> minmax_normalize(std::span<const double> scores) {
    if (scores.empty()) throw ContractError(kModule, "cannot normalise an empty batch");
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    if (!std::isfinite(*lo) || !std::isfinite(*hi)) throw ContractError(kModule, "sub-scores must be finite");
    const double range = *hi - *lo;
    std::vector<double> out(scores.size(), 0.5);
    if (range < 1e-12) return out;
    for (std::size_t k = 0; k < scores.size(); ++k) out[k] = (scores[k] - *lo) / range;
    return out;
}

Combined combine(const ad::Var& s_long, const ad::Var& long_logit, const std::optional<ad::Var>& short_logit,
                 const std::optional<Tensor>& s_short_norm, const Tensor& s_prox_norm,
                 const EnsembleConfig& config) {
    if (short_logit.has_value() != s_short_norm.has_value()) {
        throw ContractError(kModule, "short-term logit and sub-score must be supplied together");
    }
    const std::size_t n = s_long.rows();
    auto check = [&](std::size_t rows, const char* what) {
        if (rows != n) throw ContractError(kModule, std::string("missing ") + what + " sub-score for some edges");
    };
    check(long_logit.rows(), "long-term weight");
    check(s_prox_norm.rows(), "proximity");
    const ad::Var wp = ad::Var::constant(Tensor(n, 1, config.wp));
    const ad::Var prox = ad::Var::constant(s_prox_norm);

    std::vector<ad::Var> logits{long_logit};
    std::vector<ad::Var> subs{s_long};
    if (short_logit) {
        check(short_logit->rows(), "short-term weight");
        check(s_short_norm->rows(), "short-term");
        logits.push_back(*short_logit);
        subs.push_back(ad::Var::constant(*s_short_norm));
    }
    logits.push_back(wp);
    subs.push_back(prox);

    Combined out;
    out.weights = ad::softmax_rows(ad::concat_cols(logits));
    out.score = ad::row_sum(ad::mul(out.weights, ad::concat_cols(subs)));
    return out;
}

std::vector<ad::Var> EnsembleParams::parameters() const {
    auto out = mlp_long.parameters();
    const auto s = mlp_short.parameters();
    out.insert(out.end(), s.begin(), s.end());
    return out;
}

double final_score(const Tensor& z_i, const Tensor& z_j, const Tensor& l_i, const Tensor& l_j,
                   const SubScores& sub, const EnsembleParams& params, const EnsembleConfig& config) {
    const ad::Var long_logit = params.mlp_long.forward(ad::Var::constant(pair_features(z_i, z_j)));
    std::optional<ad::Var> short_logit;
    std::optional<Tensor> short_norm;
    if (!l_i.empty() || !l_j.empty()) {
        short_logit = params.mlp_short.forward(ad::Var::constant(pair_features(l_i, l_j)));
        short_norm = Tensor::scalar(sub.s_short_norm);
    }
    const Combined c = combine(ad::Var::constant(Tensor::scalar(sub.s_long)), long_logit, short_logit, short_norm,
                               Tensor::scalar(sub.s_prox_norm), config);
    return c.score.value().item();
}

}  // namespace tiger
