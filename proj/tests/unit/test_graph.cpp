#include "doctest.h"

#include "oracles.hpp"

#include "tiger/error.hpp"
#include "tiger/graph_io.hpp"
#include "tiger/temporal_graph.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace tiger;

namespace {

TemporalGraph blank(std::size_t n, std::size_t dim = 2) { return TemporalGraph(Tensor(n, dim, 1.0)); }

std::string error_of(const std::string& text) {
    std::istringstream in(text);
    try {
        parse_edge_stream(in, "s.tsv");
    } catch (const IngestionError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("temporal-graph") {

TEST_CASE("apply_delta grows nodes and edges and records the delta") {
    TemporalGraph g = blank(5);
    g.apply_delta({{0, 1, 2}, {{0, 1}, {2, 1}}});
    CHECK(g.current_step() == 1);
    CHECK(g.present_nodes() == std::vector<NodeId>{0, 1, 2});
    CHECK(g.edge_count(View::purified) == 2);
    CHECK(g.has_edge({1, 2}, View::purified));
    CHECK(g.neighbors(1, View::purified) == std::vector<NodeId>{0, 2});
    CHECK(g.appeared_at(2) == 1);
    g.apply_delta({{3}, {{3, 0}}});
    CHECK(g.delta_edges(2) == std::vector<Edge>{{0, 3}});
    CHECK(g.edge_step({3, 0}) == 2);
    CHECK(g.nodes_per_step() == std::vector<std::size_t>{3, 4});
}

TEST_CASE("apply_delta rejects malformed deltas without partial effects") {
    TemporalGraph g = blank(4);
    g.apply_delta({{0, 1}, {{0, 1}}});
    CHECK_THROWS_AS(g.apply_delta({{9}, {}}), IngestionError);
    CHECK_THROWS_AS(g.apply_delta({{1}, {}}), IngestionError);
    CHECK_THROWS_AS(g.apply_delta({{}, {{0, 0}}}), IngestionError);
    CHECK_THROWS_AS(g.apply_delta({{}, {{0, 3}}}), IngestionError);
    CHECK_THROWS_AS(g.apply_delta({{}, {{1, 0}}}), IngestionError);
    CHECK_THROWS_AS(g.apply_delta({{2}, {{0, 2}, {2, 0}}}), IngestionError);
    CHECK(g.current_step() == 1);
    CHECK(g.edge_count(View::unpurified) == 1);
    CHECK_THROWS_AS(g.neighbors(3, View::purified), LookupError);
}

TEST_CASE("removal keeps the raw accumulation but drops edges from the purified view") {
    TemporalGraph g = blank(4);
    g.apply_delta({{0, 1, 2, 3}, {{0, 1}, {1, 2}, {2, 3}}});
    g.remove_edges(std::vector<Edge>{{2, 1}});
    CHECK(g.is_removed({1, 2}));
    CHECK_FALSE(g.has_edge({1, 2}, View::purified));
    CHECK(g.has_edge({1, 2}, View::unpurified));
    CHECK(g.edge_count(View::purified) == 2);
    CHECK(g.edge_count(View::unpurified) == 3);
    CHECK(g.degree(1, View::purified) == 1);
    CHECK_THROWS_AS(g.remove_edges(std::vector<Edge>{{1, 2}}), ContractError);
    CHECK_THROWS_AS(g.remove_edges(std::vector<Edge>{{0, 3}}), ContractError);
    // A removed edge cannot come back later.
    CHECK_THROWS_AS(g.apply_delta({{}, {{1, 2}}}), IngestionError);
}

TEST_CASE("worked examples: empty delta, path growth, re-insertion, isolated node") {
    TemporalGraph g = blank(4);
    g.apply_delta({{0, 1}, {{0, 1}}});
    g.apply_delta({});
    CHECK(g.current_step() == 2);
    CHECK(g.edge_count(View::unpurified) == 1);
    g.apply_delta({{2, 3}, {{1, 2}}});
    CHECK(g.neighbors(1, View::purified) == std::vector<NodeId>{0, 2});
    CHECK(g.neighbors(3, View::purified).empty());
    CHECK_THROWS_AS(g.apply_delta({{}, {{0, 1}}}), IngestionError);
    CHECK_THROWS_AS(g.remove_edges(std::vector<Edge>{{0, 2}}), ContractError);
}

TEST_CASE("normalised adjacency worked examples") {
    TemporalGraph single = blank(1);
    single.apply_delta({{0}, {}});
    CHECK(single.normalized_adjacency(View::purified).self_weight[0] == 1.0);

    TemporalGraph pair = blank(2);
    pair.apply_delta({{0, 1}, {{0, 1}}});
    const auto ab = pair.normalized_adjacency(View::purified);
    CHECK(ab.self_weight[0] == doctest::Approx(0.5));
    CHECK(ab.self_weight[1] == doctest::Approx(0.5));
    CHECK(ab.weights[0] == doctest::Approx(0.5));

    TemporalGraph star = blank(4);
    star.apply_delta({{0, 1, 2, 3}, {{0, 1}, {0, 2}, {0, 3}}});
    CHECK(star.normalized_adjacency(View::purified).self_weight[0] == doctest::Approx(0.25));
}

TEST_CASE("normalised adjacency matches the dense D^-1/2 (A + I) D^-1/2 oracle") {
    std::mt19937_64 rng(3);
    const auto edges = oracle::random_edges(12, 0.3, rng);
    TemporalGraph g = blank(12);
    std::vector<NodeId> all(12);
    for (NodeId v = 0; v < 12; ++v) all[v] = v;
    g.apply_delta({all, edges});
    const NormalizedAdjacency adj = g.normalized_adjacency(View::purified);
    Tensor dense(12, 12);
    for (std::size_t i = 0; i < 12; ++i) {
        dense(i, i) = adj.self_weight[i];
        for (std::size_t k = adj.offsets[i]; k < adj.offsets[i + 1]; ++k) dense(i, adj.neighbors[k]) = adj.weights[k];
    }
    const auto sets = oracle::adjacency_sets(edges);
    for (NodeId i = 0; i < 12; ++i) {
        for (NodeId j = 0; j < 12; ++j) {
            const double di = static_cast<double>(oracle::neighbours(sets, i).size()) + 1.0;
            const double dj = static_cast<double>(oracle::neighbours(sets, j).size()) + 1.0;
            const bool linked = i == j || oracle::neighbours(sets, i).count(j);
            const double expected = linked ? 1.0 / std::sqrt(di * dj) : 0.0;
            CHECK(dense(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("property: accumulation is monotone and purified = unpurified - removed") {
    std::mt19937_64 rng(17);
    std::size_t cases = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 25;
        TemporalGraph g = blank(n);
        std::set<std::uint64_t> seen;
        std::vector<bool> present(n, false);
        std::size_t removed_total = 0;
        std::size_t prev_nodes = 0;
        std::size_t prev_edges = 0;
        for (int step = 0; step < 6; ++step) {
            Delta d;
            std::uniform_int_distribution<NodeId> pick(0, n - 1);
            for (int k = 0; k < 15; ++k) {
                NodeId a = pick(rng);
                NodeId b = pick(rng);
                if (a == b) continue;
                const Edge e = Edge::canonical(a, b);
                if (!seen.insert(e.key()).second) continue;
                d.new_edges.push_back(e);
                for (NodeId v : {a, b})
                    if (!present[v]) {
                        present[v] = true;
                        d.new_nodes.push_back(v);
                    }
            }
            g.apply_delta(d);
            std::vector<Edge> drop;
            for (const Edge& e : d.new_edges)
                if (std::bernoulli_distribution(0.3)(rng)) drop.push_back(e);
            g.remove_edges(drop);
            removed_total += drop.size();
            CHECK(g.present_nodes().size() >= prev_nodes);
            CHECK(g.edge_count(View::unpurified) >= prev_edges);
            CHECK(g.edge_count(View::purified) == g.edge_count(View::unpurified) - removed_total);
            CHECK(g.removed_count() == removed_total);
            prev_nodes = g.present_nodes().size();
            prev_edges = g.edge_count(View::unpurified);
            ++cases;
        }
    }
    CHECK(cases == 240);
}

}  // TEST_SUITE

TEST_SUITE("graph-io") {

TEST_CASE("edge streams parse into contiguous steps and reject bad lines with their line number") {
    std::istringstream ok("# comment\n1\t0\t1\n1\t2\t1\n\n2\t0\t2\n");
    const EdgeStream s = parse_edge_stream(ok, "ok.tsv");
    REQUIRE(s.num_steps() == 2);
    CHECK(s.steps[0] == std::vector<Edge>{{0, 1}, {1, 2}});
    CHECK(s.total_edges() == 3);
    CHECK(s.node_bound() == 3);

    CHECK(error_of("1\t0\t1\n3\t1\t2\n").find("s.tsv:2") != std::string::npos);
    CHECK(error_of("1\t0\t1\n2\t0\t2\n1\t1\t2\n").find("s.tsv:3") != std::string::npos);
    CHECK(error_of("1\t0\t0\n").find("self-loop") != std::string::npos);
    CHECK(error_of("1\t0\t1\n1\t1\t0\n").find("duplicate") != std::string::npos);
    CHECK(error_of("1\t0\tx\n").find("s.tsv:1") != std::string::npos);
    CHECK(error_of("1 0 1\n").find("s.tsv:1") != std::string::npos);
}

TEST_CASE("stream, feature and label files round-trip exactly") {
    const auto dir = std::filesystem::temp_directory_path() / "tiger_io_test";
    std::filesystem::create_directories(dir);
    EdgeStream s;
    s.steps = {{{0, 1}, {1, 2}}, {{0, 2}}};
    write_edge_stream(dir / "s.tsv", s);
    CHECK(read_edge_stream(dir / "s.tsv").steps == s.steps);

    const Tensor f = Tensor::from_rows({{0.1, -2.5}, {1e-300, 3.0}, {std::numbers::pi, 0.0}});
    write_features(dir / "f.tsv", f);
    CHECK(read_features(dir / "f.tsv") == f);

    write_labels(dir / "l.tsv", {1, -1, 0});
    CHECK(read_labels(dir / "l.tsv", 3) == std::vector<int>{1, -1, 0});
    CHECK_THROWS_AS(read_labels(dir / "l.tsv", 2), IngestionError);

    std::ofstream(dir / "bad.tsv") << "0\t1,2\n2\t1,2\n";
    CHECK_THROWS_AS(read_features(dir / "bad.tsv"), IngestionError);
    std::ofstream(dir / "ragged.tsv") << "0\t1,2\n1\t1\n";
    CHECK_THROWS_AS(read_features(dir / "ragged.tsv"), IngestionError);
    CHECK_THROWS_AS(read_edge_stream(dir / "missing.tsv"), IngestionError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("nodes join the delta of the step carrying their first edge") {
    EdgeStream s;
    s.steps = {{{0, 1}}, {{1, 2}, {3, 0}}, {}};
    const auto deltas = to_deltas(s);
    REQUIRE(deltas.size() == 3);
    CHECK(deltas[0].new_nodes == std::vector<NodeId>{0, 1});
    CHECK(deltas[1].new_nodes == std::vector<NodeId>{2, 3});
    CHECK(deltas[2].new_nodes.empty());
}

}  // TEST_SUITE
