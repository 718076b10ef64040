#include "tiger/trainer.hpp"

#include "tiger/error.hpp"
#include "tiger/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace tiger {

namespace {

const char* kModule = "trainer";

std::vector<Tensor> values_of(const std::vector<ad::Var>& params) {
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(p.value());
    return out;
}

std::string describe_failure(std::size_t epoch, const ScoredBatch& batch, std::size_t positives,
                             std::size_t negatives, const std::vector<ad::Var>& params) {
    std::ostringstream msg;
    msg << "non-finite loss at epoch " << epoch << " (" << positives << " positives, " << negatives
        << " negatives)";
    std::size_t bad_scores = 0;
    for (double s : batch.combined.score.value().data()) bad_scores += std::isfinite(s) ? 0 : 1;
    msg << "; non-finite final scores: " << bad_scores;
    std::size_t bad_params = 0;
    for (const auto& p : params) bad_params += p.value().all_finite() ? 0 : 1;
    msg << "; non-finite parameter tensors: " << bad_params;
    return msg.str();
}

}  // namespace

void PurifierConfig::validate() const {
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError(kModule, "beta must lie in (0, 1]");
    if (!std::isfinite(wp)) throw ConfigError(kModule, "w_p must be finite");
    if (hidden == 0) throw ConfigError(kModule, "hidden width must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError(kModule, "learning rate must be positive");
}

PurifierModel PurifierModel::init(std::size_t in_dim, std::size_t hidden, std::size_t classes, Rng& rng) {
    PurifierModel m;
    m.encoder = GcnParams::init(in_dim, hidden, hidden, rng);
    m.attention = AttentionParams::init(hidden, rng);
    m.bilinear = BilinearParams::init(hidden, rng);
    m.ensemble.mlp_long = WeightMlp::init(2 * hidden, hidden, rng);
    m.ensemble.mlp_short = WeightMlp::init(2 * std::max<std::size_t>(classes, 1), hidden, rng);
    return m;
}

std::vector<ad::Var> PurifierModel::parameters() const {
    std::vector<ad::Var> out = encoder.parameters();
    for (const auto& group : {attention.parameters(), bilinear.parameters(), ensemble.parameters()})
        out.insert(out.end(), group.begin(), group.end());
    return out;
}

std::vector<Tensor> PurifierModel::snapshot() const { return values_of(parameters()); }

void PurifierModel::restore(const std::vector<Tensor>& values) {
    auto params = parameters();
    if (values.size() != params.size()) {
        throw ShapeError(kModule, "checkpoint holds " + std::to_string(values.size()) + " tensors, model has " +
                                      std::to_string(params.size()));
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (!values[k].same_shape(params[k].value())) {
            throw ShapeError(kModule, "checkpoint tensor " + std::to_string(k) + " has shape " +
                                          shape_string(values[k]) + ", expected " +
                                          shape_string(params[k].value()));
        }
        params[k].mutable_value() = values[k];
    }
}

RawSubScores raw_subscores(const ScoringContext& ctx, std::span<const Edge> pairs) {
    RawSubScores raw;
    raw.s_prox.reserve(pairs.size());
    for (const Edge& e : pairs) raw.s_prox.push_back(adamic_adar(*ctx.graph, e, ctx.view));
    if (ctx.latent) {
        ShortTermConfig cfg = ctx.short_term;
        cfg.view = ctx.view;
        raw.s_short = score_short_batch(pairs, *ctx.latent, *ctx.graph, cfg);
    }
    return raw;
}

ScoredBatch score_pairs(const PurifierModel& model, const ScoringContext& ctx, std::span<const Edge> pairs,
                        const RawSubScores& raw) {
    if (!ctx.graph || !ctx.memory) throw ContractError(kModule, "scoring context is missing the graph or memory");
    if (raw.s_prox.size() != pairs.size() || (ctx.latent && raw.s_short.size() != pairs.size())) {
        throw ContractError(kModule, "missing sub-scores for some pairs");
    }
    const TemporalGraph& graph = *ctx.graph;
    const AdjacencyPtr adj = ctx.adjacency ? ctx.adjacency : share_adjacency(graph, ctx.view);

    ScoredBatch out;
    out.embeddings = gcn_forward(model.encoder, adj, ad::Var::constant(graph.features()));
    out.fused = fuse_all(*ctx.memory, out.embeddings, graph.present_nodes(), model.attention, ctx.use_attention);

    std::vector<std::size_t> rows_i(pairs.size());
    std::vector<std::size_t> rows_j(pairs.size());
    std::vector<std::size_t> ids_i(pairs.size());
    std::vector<std::size_t> ids_j(pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const Edge& e = pairs[k];
        if (e.u >= out.fused.row_of.size() || e.v >= out.fused.row_of.size() ||
            out.fused.row_of[e.u] == FusedBatch::npos || out.fused.row_of[e.v] == FusedBatch::npos) {
            throw LookupError(kModule, "pair (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                           ") has an endpoint that is not present");
        }
        rows_i[k] = out.fused.row_of[e.u];
        rows_j[k] = out.fused.row_of[e.v];
        ids_i[k] = e.u;
        ids_j[k] = e.v;
    }

    out.s_long = score_long_batch(out.fused.z, rows_i, rows_j, model.bilinear);
    const ad::Var long_logit = model.ensemble.mlp_long.forward(pair_features(out.fused.z, rows_i, rows_j));

    std::optional<ad::Var> short_logit;
    if (ctx.latent) {
        const ad::Var latent = ad::Var::constant(ctx.latent->tensor());
        short_logit = model.ensemble.mlp_short.forward(pair_features(latent, ids_i, ids_j));
        out.s_short_norm = Tensor::column(minmax_normalize(raw.s_short));
    }
    out.s_prox_norm = Tensor::column(minmax_normalize(raw.s_prox));
    out.combined = combine(out.s_long, long_logit, short_logit, out.s_short_norm, out.s_prox_norm, ctx.ensemble);
    return out;
}

std::vector<SubScores> unpack_subscores(const ScoredBatch& batch, const RawSubScores& raw) {
    const std::size_t n = batch.s_prox_norm.rows();
    const Tensor& weights = batch.combined.weights.value();
    std::vector<SubScores> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        SubScores& s = out[k];
        s.s_long = batch.s_long.value()(k, 0);
        s.s_prox = raw.s_prox[k];
        s.s_prox_norm = batch.s_prox_norm(k, 0);
        s.short_term = batch.s_short_norm.has_value();
        if (s.short_term) {
            s.s_short = raw.s_short[k];
            s.s_short_norm = (*batch.s_short_norm)(k, 0);
        }
        auto row = weights.row_span(k);
        s.weights.assign(row.begin(), row.end());
        s.score = batch.combined.score.value()(k, 0);
    }
    return out;
}

std::size_t filtered_size(std::size_t n, double beta) {
    const double exact = beta * static_cast<double>(n);
    const auto kept = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
    return std::min(kept, n);
}

std::vector<Edge> sample_negatives(const TemporalGraph& graph, View view, std::size_t count, Rng& rng) {
    if (count == 0) return {};
    const auto& nodes = graph.present_nodes();
    const std::size_t p = nodes.size();
    const std::size_t pairs = p < 2 ? 0 : p * (p - 1) / 2;
    const std::size_t edges = graph.edge_count(view);
    const std::size_t available = pairs - std::min(pairs, edges);
    if (count > available) {
        throw ConfigError(kModule, "requested " + std::to_string(count) + " negatives but only " +
                                       std::to_string(available) + " non-edges exist");
    }
    std::vector<Edge> out;
    out.reserve(count);
    if (2 * count > available) {
        std::vector<Edge> pool;
        pool.reserve(available);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a + 1; b < p; ++b) {
                const Edge e = Edge::canonical(nodes[a], nodes[b]);
                if (!graph.has_edge(e, view)) pool.push_back(e);
            }
        for (std::size_t k = 0; k < count; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
            std::swap(pool[k], pool[pick(rng)]);
            out.push_back(pool[k]);
        }
        return out;
    }
    std::unordered_set<std::uint64_t> chosen;
    std::uniform_int_distribution<std::size_t> pick(0, p - 1);
    while (out.size() < count) {
        const std::size_t a = pick(rng);
        const std::size_t b = pick(rng);
        if (a == b) continue;
        const Edge e = Edge::canonical(nodes[a], nodes[b]);
        if (graph.has_edge(e, view) || !chosen.insert(e.key()).second) continue;
        out.push_back(e);
    }
    return out;
}

std::vector<std::size_t> filter_positives(std::span<const Edge> positives, std::span<const double> scores,
                                          double beta) {
    if (positives.size() != scores.size()) throw ContractError(kModule, "every positive needs a score");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError(kModule, "beta must lie in (0, 1]");
    const std::size_t keep = filtered_size(positives.size(), beta);
    std::vector<std::size_t> order(positives.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return positives[a] < positives[b];
                      });
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

ad::Var pseudo_label_loss(const ad::Var& scores, std::span<const std::size_t> pos_rows,
                          std::span<const std::size_t> neg_rows) {
    if (pos_rows.empty() || neg_rows.empty()) throw ContractError(kModule, "loss needs positives and negatives");
    const ad::Var pos = ad::gather_rows(scores, pos_rows);
    const ad::Var neg = ad::gather_rows(scores, neg_rows);
    return ad::add(ad::bce_loss(pos, Tensor(pos_rows.size(), 1, 1.0)),
                   ad::bce_loss(neg, Tensor(neg_rows.size(), 1, 0.0)));
}

std::vector<double> TrainReport::losses() const {
    std::vector<double> out;
    out.reserve(epochs.size());
    for (const auto& e : epochs) out.push_back(e.loss);
    return out;
}

TrainReport train_step(PurifierModel& model, ad::Adam& optimizer, const ScoringContext& ctx,
                       const PurifierConfig& config, Rng& rng) {
    config.validate();
    TrainReport report;
    const TemporalGraph& graph = *ctx.graph;
    std::vector<Edge> positives = graph.edges(ctx.view);
    if (config.max_positives != 0 && positives.size() > config.max_positives) {
        std::shuffle(positives.begin(), positives.end(), rng);
        positives.resize(config.max_positives);
        std::sort(positives.begin(), positives.end());
    }
    if (positives.empty()) return report;

    ScoringContext scoring = ctx;
    if (!scoring.adjacency) scoring.adjacency = share_adjacency(graph, ctx.view);

    const RawSubScores raw_pos = raw_subscores(scoring, positives);
    const std::size_t n_pos = positives.size();
    std::vector<std::size_t> neg_rows(n_pos);
    std::iota(neg_rows.begin(), neg_rows.end(), n_pos);

    auto params = model.parameters();
    double best = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const std::vector<Edge> negatives = sample_negatives(graph, ctx.view, n_pos, rng);
        const RawSubScores raw_neg = raw_subscores(scoring, negatives);

        std::vector<Edge> pairs = positives;
        pairs.insert(pairs.end(), negatives.begin(), negatives.end());
        RawSubScores raw = raw_pos;
        raw.s_prox.insert(raw.s_prox.end(), raw_neg.s_prox.begin(), raw_neg.s_prox.end());
        raw.s_short.insert(raw.s_short.end(), raw_neg.s_short.begin(), raw_neg.s_short.end());

        const ScoredBatch batch = score_pairs(model, scoring, pairs, raw);
        const auto all_scores = batch.combined.score.value().data();
        const std::vector<std::size_t> kept =
            filter_positives(positives, all_scores.subspan(0, n_pos), config.beta);
        const ad::Var loss = pseudo_label_loss(batch.combined.score, kept, neg_rows);
        const double value = loss.value().item();
        if (!std::isfinite(value)) {
            throw TrainingError(kModule, describe_failure(epoch, batch, n_pos, negatives.size(), params));
        }

        ad::zero_grad(params);
        ad::backward(loss);
        optimizer.step(params);
        report.epochs.push_back({epoch, value, n_pos, negatives.size(), kept.size()});

        if (value < best - config.min_improvement) {
            best = value;
            stale = 0;
        } else if (++stale >= config.patience) {
            report.early_stopped = true;
            break;
        }
    }
    return report;
}

}  // namespace tiger
