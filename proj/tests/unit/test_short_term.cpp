#include "doctest.h"

#include "oracles.hpp"

#include "tiger/error.hpp"
#include "tiger/random.hpp"
#include "tiger/short_term.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace tiger;

namespace {

// q = (x, 1 - x) with kl((0.5, 0.5), q) = k.
std::vector<double> at_divergence(double k) {
    const double x = (1.0 - std::sqrt(1.0 - std::exp(-2.0 * k))) / 2.0;
    return {x, 1.0 - x};
}

TemporalGraph build(std::size_t n, const std::vector<Edge>& edges) {
    TemporalGraph g(Tensor(n, 1, 0.0));
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), 0);
    g.apply_delta({all, edges});
    return g;
}

LatentMatrix latent_of(const std::vector<std::vector<double>>& rows) {
    Tensor t(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) t(r, c) = rows[r][c];
    return LatentMatrix::from_probabilities(t);
}

}  // namespace

TEST_SUITE("short-term") {

TEST_CASE("kl worked examples") {
    const std::vector<double> half{0.5, 0.5};
    CHECK(kl(half, half) == 0.0);
    CHECK(std::abs(kl(std::vector<double>{1.0, 0.0}, half) - std::log(2.0)) < 1e-6);
    CHECK(kl(half, std::vector<double>{0.9, 0.1}) ==
          doctest::Approx(0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1)).epsilon(1e-12));
    CHECK(kl(half, std::vector<double>{0.9, 0.1}) == doctest::Approx(0.5108).epsilon(1e-4));
    CHECK_THROWS_AS(kl(half, std::vector<double>{0.2, 0.3, 0.5}), ShapeError);
}

TEST_CASE("property: kl is non-negative on 1000 random smoothed pairs") {
    Rng rng(31);
    std::uniform_int_distribution<std::size_t> classes(2, 8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t c = classes(rng);
        std::vector<double> p(c);
        std::vector<double> q(c);
        for (std::size_t i = 0; i < c; ++i) {
            // Some exact zeros to exercise the floor.
            p[i] = u(rng) < 0.2 ? 0.0 : u(rng);
            q[i] = u(rng) < 0.2 ? 0.0 : u(rng);
        }
        p[0] += 1e-3;
        q[c - 1] += 1e-3;
        CHECK(kl(p, q) >= 0.0);
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("latent rows are smoothed distributions") {
    const LatentMatrix l = LatentMatrix::from_probabilities(Tensor::from_rows({{1.0, 0.0, 0.0}, {2.0, 1.0, 1.0}}));
    for (NodeId v = 0; v < 2; ++v) {
        double s = 0.0;
        for (double x : l.row(v)) {
            CHECK(x >= 1e-12 * 0.999);
            s += x;
        }
        CHECK(std::abs(s - 1.0) < 1e-9);
    }
    CHECK(l.row(1)[0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(l.row(5), LookupError);
    const LatentMatrix fl = LatentMatrix::from_logits(Tensor::from_rows({{0.0, std::log(3.0)}}));
    CHECK(fl.row(0)[1] == doctest::Approx(0.75));
}

TEST_CASE("consistency worked examples") {
    const std::vector<double> half{0.5, 0.5};
    SUBCASE("hand Z-score: K_i = {0.1, 0.3}, kl(l_i, l_j) = 0.4, Z_j = 0") {
        // i = 0, neighbours 1, 2 and candidate 3; node 3 has no other neighbour.
        const TemporalGraph g = build(4, {{0, 1}, {0, 2}, {0, 3}});
        const LatentMatrix l = latent_of({half, at_divergence(0.1), at_divergence(0.3), at_divergence(0.4)});
        const Consistency c = consistency_detail({0, 3}, l, g);
        CHECK(std::abs(c.z_i - 2.0) < 1e-9);
        CHECK(c.z_j == 0.0);
        CHECK(std::abs(c.score + 1.0) < 1e-9);
    }
    SUBCASE("identical distributions everywhere give a perfectly consistent edge") {
        const TemporalGraph g = build(5, {{0, 1}, {0, 2}, {0, 3}, {3, 4}, {1, 3}});
        const LatentMatrix l = latent_of({half, half, half, half, half});
        CHECK(consistency_score({0, 3}, l, g) == 0.0);
    }
    SUBCASE("equal neighbour divergences make sigma zero and Z zero") {
        const TemporalGraph g = build(4, {{0, 1}, {0, 2}, {0, 3}});
        const LatentMatrix l = latent_of({half, at_divergence(0.2), at_divergence(0.2), at_divergence(0.9)});
        const Consistency c = consistency_detail({0, 3}, l, g);
        CHECK(c.z_i == 0.0);
        CHECK(c.score == 0.0);
    }
    SUBCASE("batch scoring equals single calls") {
        const TemporalGraph g = build(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
        const LatentMatrix l = latent_of({half, at_divergence(0.1), at_divergence(0.3), at_divergence(0.4)});
        const std::vector<Edge> edges{{0, 3}, {0, 1}, {1, 2}};
        const auto batch = score_short_batch(edges, l, g);
        for (std::size_t k = 0; k < edges.size(); ++k) CHECK(batch[k] == consistency_score(edges[k], l, g));
    }
    SUBCASE("unknown endpoints are lookup errors") {
        TemporalGraph g(Tensor(5, 1));
        g.apply_delta({{0, 1}, {{0, 1}}});
        const LatentMatrix l = latent_of({half, half, half, half, half});
        CHECK_THROWS_AS(consistency_score({0, 4}, l, g), LookupError);
    }
}

TEST_CASE("oracle equivalence on 100 random graphs, including degenerate sigma") {
    Rng rng(32);
    std::size_t degenerate = 0;
    std::size_t compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + trial % 28;
        const auto edges = oracle::random_edges(n, 0.1 + 0.4 * (trial % 5) / 4.0, rng);
        if (edges.empty()) continue;
        const std::size_t classes = 2 + trial % 4;
        // Every other graph draws from a pool of three rows so divergences tie.
        std::vector<std::vector<double>> pool;
        for (int k = 0; k < 3; ++k) pool.push_back(oracle::random_distribution(classes, rng));
        std::vector<std::vector<double>> rows;
        for (std::size_t v = 0; v < n; ++v)
            rows.push_back(trial % 2 ? pool[rng() % 3] : oracle::random_distribution(classes, rng));
        const LatentMatrix l = latent_of(rows);
        std::vector<std::vector<double>> smoothed;
        for (std::size_t v = 0; v < n; ++v) smoothed.emplace_back(l.row(static_cast<NodeId>(v)).begin(), l.row(static_cast<NodeId>(v)).end());
        const TemporalGraph g = build(n, edges);
        const auto sets = oracle::adjacency_sets(edges);
        for (bool exclude : {true, false}) {
            ShortTermConfig cfg;
            cfg.exclude_partner = exclude;
            for (const Edge& e : edges) {
                const double want = oracle::consistency(sets, smoothed, e.u, e.v, exclude);
                const Consistency got = consistency_detail(e, l, g, cfg);
                CHECK(std::abs(got.score - want) < 1e-9);
                CHECK(got.score <= 0.0);
                CHECK(consistency_score({e.v, e.u}, l, g, cfg) == got.score);
                degenerate += (got.z_i == 0.0) + (got.z_j == 0.0);
                ++compared;
            }
        }
    }
    CHECK(compared > 1000);
    CHECK(degenerate > 100);
}

}  // TEST_SUITE
