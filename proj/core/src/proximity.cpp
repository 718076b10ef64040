#include "tiger/proximity.hpp"

#include "tiger/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tiger {

namespace {

const char* kModule = "proximity";

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Walks two sorted neighbour lists and counts (or visits) the intersection.
template <typename Fn>
void for_each_common(std::span<const NodeId> a, std::span<const NodeId> b, Fn&& fn) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            fn(*i);
            ++i;
            ++j;
        }
    }
}

Matrix orthonormal_basis(const Matrix& block) {
    Eigen::HouseholderQR<Matrix> qr(block);
    return qr.householderQ() * Matrix::Identity(block.rows(), block.cols());
}

}  // namespace

double adamic_adar(const TemporalGraph& graph, Edge e, View view) {
    double total = 0.0;
    for_each_common(graph.neighbor_span(e.u, view), graph.neighbor_span(e.v, view), [&](NodeId w) {
        total += 1.0 / std::log(static_cast<double>(graph.degree(w, view)));
    });
    return total;
}

double jaccard(const TemporalGraph& graph, Edge e, View view) {
    const auto nu = graph.neighbor_span(e.u, view);
    const auto nv = graph.neighbor_span(e.v, view);
    std::size_t common = 0;
    for_each_common(nu, nv, [&](NodeId) { ++common; });
    // u and v are never common neighbours of each other; only the sizes need fixing.
    const bool linked = std::binary_search(nu.begin(), nu.end(), e.v);
    const std::size_t size_u = nu.size() - (linked ? 1 : 0);
    const std::size_t size_v = nv.size() - (linked ? 1 : 0);
    const std::size_t united = size_u + size_v - common;
    return united == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(united);
}

LowRank symmetric_low_rank(const Tensor& matrix, const SvdConfig& config) {
    const std::size_t n = matrix.rows();
    if (matrix.cols() != n) throw ShapeError(kModule, "low-rank factorisation needs a square matrix");
    if (config.rank == 0) throw ConfigError(kModule, "svd rank must be at least 1");
    LowRank out;
    if (n == 0) {
        out.vectors = Tensor(0, 0);
        return out;
    }
    const std::size_t rank = std::min(config.rank, n);
    const std::size_t block = std::min(rank + 10, n);
    Eigen::Map<const Matrix> a(matrix.data().data(), n, n);

    Rng rng(config.seed);
    std::normal_distribution<double> gauss;
    Matrix q(n, block);
    for (Eigen::Index r = 0; r < q.rows(); ++r)
        for (Eigen::Index c = 0; c < q.cols(); ++c) q(r, c) = gauss(rng);
    q = orthonormal_basis(q);

    Eigen::VectorXd values;
    Matrix ritz;
    std::vector<Eigen::Index> order(block);
    for (std::size_t it = 1; it <= config.max_iterations; ++it) {
        const Matrix aq = a * q;
        const Matrix small = q.transpose() * aq;
        Eigen::SelfAdjointEigenSolver<Matrix> eig((small + small.transpose()) * 0.5);
        values = eig.eigenvalues();
        ritz = q * eig.eigenvectors();
        const Matrix a_ritz = aq * eig.eigenvectors();
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
            return std::abs(values(x)) > std::abs(values(y));
        });
        double residual = 0.0;
        for (std::size_t k = 0; k < rank; ++k) {
            const Eigen::Index c = order[k];
            residual = std::max(residual, (a_ritz.col(c) - values(c) * ritz.col(c)).norm());
        }
        out.iterations = it;
        out.residual = residual;
        const double scale = std::max(1.0, std::abs(values(order[0])));
        if (residual <= config.tolerance * scale || block == n) break;
        if (it == config.max_iterations) {
            throw NumericalError(kModule, "subspace iteration did not converge in " + std::to_string(it) +
                                              " iterations (residual " + std::to_string(residual) +
                                              ", tolerance " + std::to_string(config.tolerance * scale) + ")");
        }
        q = orthonormal_basis(aq);
    }

    out.vectors = Tensor(n, rank);
    for (std::size_t k = 0; k < rank; ++k) {
        const Eigen::Index c = order[k];
        out.values.push_back(values(c));
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = ritz(static_cast<Eigen::Index>(r), c);
    }
    return out;
}

std::vector<double> svd_scores(const TemporalGraph& graph, std::span<const Edge> candidates, View view,
                               const SvdConfig& config) {
    const std::size_t n = graph.capacity();
    Tensor adjacency(n, n);
    for (const Edge& e : graph.edges(view)) {
        adjacency(e.u, e.v) = 1.0;
        adjacency(e.v, e.u) = 1.0;
    }
    const LowRank low = symmetric_low_rank(adjacency, config);
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const Edge& e : candidates) {
        if (e.u >= n || e.v >= n) throw LookupError(kModule, "candidate endpoint outside the graph");
        double value = 0.0;
        for (std::size_t k = 0; k < low.values.size(); ++k)
            value += low.values[k] * low.vectors(e.u, k) * low.vectors(e.v, k);
        scores.push_back(value);
    }
    return scores;
}

BaselineMethod parse_baseline(std::string_view name) {
    if (name == "jaccard") return BaselineMethod::jaccard;
    if (name == "adamic-adar") return BaselineMethod::adamic_adar;
    if (name == "svd") return BaselineMethod::svd;
    if (name == "random") return BaselineMethod::random;
    throw ConfigError(kModule, "unknown baseline '" + std::string(name) + "'");
}

std::string to_string(BaselineMethod method) {
    switch (method) {
        case BaselineMethod::jaccard: return "jaccard";
        case BaselineMethod::adamic_adar: return "adamic-adar";
        case BaselineMethod::svd: return "svd";
        case BaselineMethod::random: return "random";
    }
    return "unknown";
}

std::vector<std::size_t> bottom_k(std::span<const Edge> edges, std::span<const double> scores, std::size_t k) {
    if (edges.size() != scores.size()) throw ShapeError(kModule, "one score per edge expected");
    if (k > edges.size()) {
        throw ConfigError(kModule, "budget " + std::to_string(k) + " exceeds " + std::to_string(edges.size()) +
                                       " candidates");
    }
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] < scores[b];
                          return edges[a] < edges[b];
                      });
    order.resize(k);
    return order;
}

std::vector<Edge> baseline_purify(const TemporalGraph& graph, std::span<const Edge> candidates,
                                  std::size_t k, BaselineMethod method, View view, std::uint64_t seed,
                                  const SvdConfig& svd) {
    if (k > candidates.size()) {
        throw ConfigError(kModule, "budget " + std::to_string(k) + " exceeds " +
                                       std::to_string(candidates.size()) + " candidates");
    }
    std::vector<double> scores;
    switch (method) {
        case BaselineMethod::jaccard:
            for (const Edge& e : candidates) scores.push_back(jaccard(graph, e, view));
            break;
        case BaselineMethod::adamic_adar:
            for (const Edge& e : candidates) scores.push_back(adamic_adar(graph, e, view));
            break;
        case BaselineMethod::svd:
            scores = svd_scores(graph, candidates, view, svd);
            break;
        case BaselineMethod::random: {
            // Random scores over the canonically sorted candidates, so the
            // draw does not depend on input order.
            std::vector<Edge> sorted(candidates.begin(), candidates.end());
            std::sort(sorted.begin(), sorted.end());
            Rng rng(seed);
            std::shuffle(sorted.begin(), sorted.end(), rng);
            sorted.resize(k);
            std::sort(sorted.begin(), sorted.end());
            return sorted;
        }
    }
    std::vector<Edge> removed;
    for (std::size_t idx : bottom_k(candidates, scores, k)) removed.push_back(candidates[idx]);
    std::sort(removed.begin(), removed.end());
    return removed;
}

}  // namespace tiger
