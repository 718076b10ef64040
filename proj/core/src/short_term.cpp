#include "tiger/short_term.hpp"

#include "tiger/error.hpp"

#include <cmath>

namespace tiger {

namespace {

const char* kModule = "short-term";

// Assumes both arguments are already smoothed.
double kl_smoothed(std::span<const double> p, std::span<const double> q) {
    double total = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) total += p[c] * std::log(p[c] / q[c]);
    return total;
}

double z_score(NodeId self, NodeId partner, const LatentMatrix& latent, const TemporalGraph& graph,
               const ShortTermConfig& config) {
    const auto own = latent.row(self);
    std::vector<double> reference;
    for (NodeId k : graph.neighbor_span(self, config.view)) {
        if (config.exclude_partner && k == partner) continue;
        reference.push_back(kl_smoothed(own, latent.row(k)));
    }
    if (reference.empty()) return 0.0;
    double mean = 0.0;
    for (double x : reference) mean += x;
    mean /= static_cast<double>(reference.size());
    double var = 0.0;
    for (double x : reference) var += (x - mean) * (x - mean);
    const double sigma = std::sqrt(var / static_cast<double>(reference.size()));
    if (sigma < 1e-12) return 0.0;
    return std::abs(kl_smoothed(own, latent.row(partner)) - mean) / sigma;
}

}  // namespace

std::vector<double> smooth_distribution(std::span<const double> p) {
    std::vector<double> out(p.begin(), p.end());
    double total = 0.0;
    for (double& x : out) {
        if (!std::isfinite(x) || x < 0.0) throw ContractError(kModule, "distribution entries must be finite and non-negative");
        x = std::max(x, kDistributionFloor);
        total += x;
    }
    for (double& x : out) x /= total;
    return out;
}

LatentMatrix LatentMatrix::from_probabilities(const Tensor& probabilities) {
    LatentMatrix m;
    m.probs_ = Tensor(probabilities.rows(), probabilities.cols());
    for (std::size_t r = 0; r < probabilities.rows(); ++r) {
        const auto smoothed = smooth_distribution(probabilities.row_span(r));
        std::copy(smoothed.begin(), smoothed.end(), m.probs_.row_span(r).begin());
    }
    return m;
}

LatentMatrix LatentMatrix::from_logits(const Tensor& logits) {
    Tensor probs(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto row = logits.row_span(r);
        const Tensor p = softmax(Tensor(1, row.size(), std::vector<double>(row.begin(), row.end())));
        std::copy(p.data().begin(), p.data().end(), probs.row_span(r).begin());
    }
    return from_probabilities(probs);
}

std::span<const double> LatentMatrix::row(NodeId v) const {
    if (v >= probs_.rows()) throw LookupError(kModule, "no latent row for node " + std::to_string(v));
    return probs_.row_span(v);
}

double kl(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw ShapeError(kModule, "kl of distributions with " + std::to_string(p.size()) + " and " +
                                      std::to_string(q.size()) + " classes");
    }
    return kl_smoothed(smooth_distribution(p), smooth_distribution(q));
}

Consistency consistency_detail(Edge e, const LatentMatrix& latent, const TemporalGraph& graph,
                               const ShortTermConfig& config) {
    for (NodeId v : {e.u, e.v}) {
        if (!graph.contains_node(v)) throw LookupError(kModule, "node " + std::to_string(v) + " is not in the graph");
    }
    Consistency out;
    out.z_i = z_score(e.u, e.v, latent, graph, config);
    out.z_j = z_score(e.v, e.u, latent, graph, config);
    out.score = -(out.z_i + out.z_j) / 2.0;
    return out;
}

double consistency_score(Edge e, const LatentMatrix& latent, const TemporalGraph& graph,
                         const ShortTermConfig& config) {
    return consistency_detail(e, latent, graph, config).score;
}

std::vector<double> score_short_batch(std::span<const Edge> candidates, const LatentMatrix& latent,
                                      const TemporalGraph& graph, const ShortTermConfig& config) {
    std::vector<double> out;
    out.reserve(candidates.size());
    for (const Edge& e : candidates) out.push_back(consistency_score(e, latent, graph, config));
    return out;
}

}  // namespace tiger
