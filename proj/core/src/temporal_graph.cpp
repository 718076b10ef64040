#include "tiger/temporal_graph.hpp"

#include "tiger/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace tiger {

namespace {

const char* kModule = "temporal-graph";

std::string edge_string(Edge e) {
    return "(" + std::to_string(e.u) + ", " + std::to_string(e.v) + ")";
}

void insert_sorted(std::vector<NodeId>& list, NodeId v) {
    list.insert(std::lower_bound(list.begin(), list.end(), v), v);
}

void erase_sorted(std::vector<NodeId>& list, NodeId v) {
    auto it = std::lower_bound(list.begin(), list.end(), v);
    if (it != list.end() && *it == v) list.erase(it);
}

}  // namespace

TemporalGraph::TemporalGraph(Tensor features, std::vector<int> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
    if (!labels_.empty() && labels_.size() != features_.rows()) {
        throw ShapeError(kModule, "label count " + std::to_string(labels_.size()) +
                                      " does not match feature rows " +
                                      std::to_string(features_.rows()));
    }
    appeared_.assign(features_.rows(), 0);
    adj_all_.resize(features_.rows());
    adj_pure_.resize(features_.rows());
}

void TemporalGraph::apply_delta(const Delta& delta) {
    const std::size_t next = step_ + 1;
    std::unordered_set<NodeId> incoming;
    for (NodeId v : delta.new_nodes) {
        if (v >= capacity()) {
            throw IngestionError(kModule, "step " + std::to_string(next) + ": node " +
                                              std::to_string(v) + " has no feature row");
        }
        if (appeared_[v] != 0 || !incoming.insert(v).second) {
            throw IngestionError(kModule, "step " + std::to_string(next) + ": node " +
                                              std::to_string(v) + " already exists");
        }
    }
    std::unordered_set<std::uint64_t> batch;
    for (const Edge& raw : delta.new_edges) {
        const Edge e = Edge::canonical(raw.u, raw.v);
        if (e.u == e.v) {
            throw IngestionError(kModule, "step " + std::to_string(next) + ": self-loop on node " +
                                              std::to_string(e.u));
        }
        for (NodeId end : {e.u, e.v}) {
            const bool known = end < capacity() && (appeared_[end] != 0 || incoming.count(end));
            if (!known) {
                throw IngestionError(kModule, "step " + std::to_string(next) + ": edge " +
                                                  edge_string(e) + " has dangling endpoint " +
                                                  std::to_string(end));
            }
        }
        if (edge_state_.count(e.key()) || !batch.insert(e.key()).second) {
            throw IngestionError(kModule, "step " + std::to_string(next) + ": duplicate edge " +
                                              edge_string(e));
        }
    }

    step_ = next;
    std::vector<NodeId> nodes(delta.new_nodes);
    std::sort(nodes.begin(), nodes.end());
    for (NodeId v : nodes) {
        appeared_[v] = step_;
        insert_sorted(present_, v);
    }
    std::vector<Edge> edges;
    edges.reserve(delta.new_edges.size());
    for (const Edge& raw : delta.new_edges) edges.push_back(Edge::canonical(raw.u, raw.v));
    std::sort(edges.begin(), edges.end());
    for (const Edge& e : edges) {
        edge_state_.emplace(e.key(), EdgeState{step_, false});
        insert_sorted(adj_all_[e.u], e.v);
        insert_sorted(adj_all_[e.v], e.u);
        insert_sorted(adj_pure_[e.u], e.v);
        insert_sorted(adj_pure_[e.v], e.u);
    }
    delta_edges_.push_back(std::move(edges));
    delta_nodes_.push_back(std::move(nodes));
    nodes_per_step_.push_back(present_.size());
}

bool TemporalGraph::contains_node(NodeId v) const noexcept {
    return v < capacity() && appeared_[v] != 0;
}

std::size_t TemporalGraph::appeared_at(NodeId v) const noexcept {
    return v < capacity() ? appeared_[v] : 0;
}

void TemporalGraph::require_node(NodeId v, const char* what) const {
    if (!contains_node(v)) {
        throw LookupError(kModule, std::string(what) + ": unknown node " + std::to_string(v));
    }
}

std::vector<NodeId> TemporalGraph::neighbors(NodeId v, View view) const {
    require_node(v, "neighbors");
    auto span = neighbor_span(v, view);
    return {span.begin(), span.end()};
}

std::span<const NodeId> TemporalGraph::neighbor_span(NodeId v, View view) const {
    return view == View::purified ? adj_pure_[v] : adj_all_[v];
}

std::size_t TemporalGraph::degree(NodeId v, View view) const {
    require_node(v, "degree");
    return neighbor_span(v, view).size();
}

bool TemporalGraph::has_edge(Edge e, View view) const {
    e = Edge::canonical(e.u, e.v);
    auto it = edge_state_.find(e.key());
    if (it == edge_state_.end()) return false;
    return view == View::unpurified || !it->second.removed;
}

bool TemporalGraph::is_removed(Edge e) const {
    e = Edge::canonical(e.u, e.v);
    auto it = edge_state_.find(e.key());
    return it != edge_state_.end() && it->second.removed;
}

std::size_t TemporalGraph::edge_count(View view) const {
    return view == View::unpurified ? edge_state_.size() : edge_state_.size() - removed_count_;
}

std::vector<Edge> TemporalGraph::edges(View view) const {
    std::vector<Edge> out;
    out.reserve(edge_count(view));
    const auto& adj = view == View::purified ? adj_pure_ : adj_all_;
    for (NodeId u : present_)
        for (NodeId v : adj[u])
            if (u < v) out.push_back({u, v});
    return out;
}

std::size_t TemporalGraph::edge_step(Edge e) const {
    e = Edge::canonical(e.u, e.v);
    auto it = edge_state_.find(e.key());
    return it == edge_state_.end() ? 0 : it->second.step;
}

const std::vector<Edge>& TemporalGraph::delta_edges(std::size_t step) const {
    if (step == 0 || step > delta_edges_.size()) {
        throw LookupError(kModule, "no delta recorded for step " + std::to_string(step));
    }
    return delta_edges_[step - 1];
}

const std::vector<NodeId>& TemporalGraph::delta_nodes(std::size_t step) const {
    if (step == 0 || step > delta_nodes_.size()) {
        throw LookupError(kModule, "no delta recorded for step " + std::to_string(step));
    }
    return delta_nodes_[step - 1];
}

void TemporalGraph::remove_edges(std::span<const Edge> edges) {
    std::unordered_set<std::uint64_t> batch;
    for (Edge e : edges) {
        e = Edge::canonical(e.u, e.v);
        auto it = edge_state_.find(e.key());
        if (it == edge_state_.end()) {
            throw ContractError(kModule, "cannot remove absent edge " + edge_string(e));
        }
        if (it->second.removed || !batch.insert(e.key()).second) {
            throw ContractError(kModule, "edge " + edge_string(e) + " is already removed");
        }
    }
    for (Edge e : edges) {
        e = Edge::canonical(e.u, e.v);
        edge_state_[e.key()].removed = true;
        erase_sorted(adj_pure_[e.u], e.v);
        erase_sorted(adj_pure_[e.v], e.u);
        ++removed_count_;
    }
}

std::vector<Edge> TemporalGraph::removed_edges() const {
    std::vector<Edge> out;
    for (const auto& [key, state] : edge_state_) {
        if (state.removed) {
            out.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffULL)});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

NormalizedAdjacency TemporalGraph::normalized_adjacency(View view) const {
    const auto& adj = view == View::purified ? adj_pure_ : adj_all_;
    const std::size_t n = capacity();
    NormalizedAdjacency out;
    out.self_weight.resize(n);
    out.offsets.resize(n + 1, 0);
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(adj[i].size() + 1));
        out.self_weight[i] = inv_sqrt[i] * inv_sqrt[i];
        out.offsets[i + 1] = out.offsets[i] + adj[i].size();
    }
    out.neighbors.reserve(out.offsets[n]);
    out.weights.reserve(out.offsets[n]);
    for (std::size_t i = 0; i < n; ++i) {
        for (NodeId j : adj[i]) {
            out.neighbors.push_back(j);
            out.weights.push_back(inv_sqrt[i] * inv_sqrt[j]);
        }
    }
    return out;
}

}  // namespace tiger
