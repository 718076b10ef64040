#pragma once

// Time-evolving undirected simple graph.
//
// Nodes and edges only accumulate: once inserted they are present at every
// later step. Purification never deletes an edge; it tombstones it, so two
// views exist:
//
//   View::unpurified  every edge ever inserted (the raw accumulation)
//   View::purified    unpurified minus tombstoned edges
//
// Within a step, before any removal, the purified view is exactly the
// previous purified graph merged with the new delta, which is the graph the
// purifier scores.

#include "tiger/tensor.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace tiger {

using NodeId = std::uint32_t;

/// Undirected edge in canonical (min, max) order.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    static Edge canonical(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }
    std::uint64_t key() const { return (static_cast<std::uint64_t>(u) << 32) | v; }

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class View { unpurified, purified };

struct Delta {
    std::vector<NodeId> new_nodes;
    std::vector<Edge> new_edges;
};

/// Symmetric GCN normalisation over a view: A_hat = D^-1/2 (A + I) D^-1/2
/// stored row-wise (CSR) with the virtual self-loop kept separately.
struct NormalizedAdjacency {
    std::vector<double> self_weight;
    std::vector<std::size_t> offsets;  // size n + 1
    std::vector<NodeId> neighbors;
    std::vector<double> weights;

    std::size_t size() const { return self_weight.size(); }
};

class TemporalGraph {
public:
    /// `features` holds one row per node id the graph may ever contain.
    /// `labels` is either empty or has one entry per row (-1 = unlabeled).
    explicit TemporalGraph(Tensor features, std::vector<int> labels = {});

    std::size_t capacity() const noexcept { return features_.rows(); }
    std::size_t current_step() const noexcept { return step_; }
    const Tensor& features() const noexcept { return features_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    bool has_labels() const noexcept { return !labels_.empty(); }

    /// Merges a delta and advances the step counter.
    void apply_delta(const Delta& delta);

    bool contains_node(NodeId v) const noexcept;
    /// Step at which v appeared; 0 if not present yet.
    std::size_t appeared_at(NodeId v) const noexcept;
    /// Present nodes in ascending order.
    const std::vector<NodeId>& present_nodes() const noexcept { return present_; }
    /// Number of present nodes after each applied step (index 0 = step 1).
    const std::vector<std::size_t>& nodes_per_step() const noexcept { return nodes_per_step_; }

    /// Ascending neighbor list; throws LookupError for unknown nodes.
    std::vector<NodeId> neighbors(NodeId v, View view) const;
    /// Same as neighbors() without the copy or the presence check.
    std::span<const NodeId> neighbor_span(NodeId v, View view) const;
    std::size_t degree(NodeId v, View view) const;

    bool has_edge(Edge e, View view) const;
    bool is_removed(Edge e) const;
    std::size_t edge_count(View view) const;
    std::vector<Edge> edges(View view) const;
    /// Step at which e was inserted; 0 if never.
    std::size_t edge_step(Edge e) const;
    /// ΔE^(t) in canonical sorted order.
    const std::vector<Edge>& delta_edges(std::size_t step) const;
    const std::vector<NodeId>& delta_nodes(std::size_t step) const;

    /// Tombstones edges. Each must be present and not already removed.
    void remove_edges(std::span<const Edge> edges);
    std::vector<Edge> removed_edges() const;
    std::size_t removed_count() const noexcept { return removed_count_; }

    NormalizedAdjacency normalized_adjacency(View view) const;

private:
    struct EdgeState {
        std::size_t step = 0;
        bool removed = false;
    };

    void require_node(NodeId v, const char* what) const;

    Tensor features_;
    std::vector<int> labels_;
    std::size_t step_ = 0;
    std::vector<std::size_t> appeared_;
    std::vector<NodeId> present_;
    std::vector<std::size_t> nodes_per_step_;
    std::vector<std::vector<NodeId>> adj_all_;
    std::vector<std::vector<NodeId>> adj_pure_;
    std::unordered_map<std::uint64_t, EdgeState> edge_state_;
    std::vector<std::vector<Edge>> delta_edges_;
    std::vector<std::vector<NodeId>> delta_nodes_;
    std::size_t removed_count_ = 0;
};

}  // namespace tiger
