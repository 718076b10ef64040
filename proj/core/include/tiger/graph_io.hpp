#pragma once

// Text formats (UTF-8, one record per line, blank lines and '#' comments ignored):
//
//   edge stream   t <TAB> u <TAB> v        steps contiguous from 1
//   features      node_id <TAB> f1,...,fd  node ids 0..n-1, each exactly once
//   labels        node_id <TAB> class_id
//
// Malformed input raises IngestionError naming the file and line.

#include "tiger/temporal_graph.hpp"
#include "tiger/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace tiger {

/// Edges grouped by step; steps[0] holds step 1.
struct EdgeStream {
    std::vector<std::vector<Edge>> steps;

    std::size_t num_steps() const noexcept { return steps.size(); }
    std::size_t total_edges() const noexcept;
    /// Largest node id referenced plus one.
    std::size_t node_bound() const noexcept;
};

EdgeStream read_edge_stream(const std::filesystem::path& path);
EdgeStream parse_edge_stream(std::istream& in, const std::string& source = "<stream>");
void write_edge_stream(const std::filesystem::path& path, const EdgeStream& stream);

Tensor read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const Tensor& features);

/// Returns one label per node in [0, num_nodes); unlisted nodes get -1.
std::vector<int> read_labels(const std::filesystem::path& path, std::size_t num_nodes);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Converts a stream into deltas: a node joins at the step of its first edge.
std::vector<Delta> to_deltas(const EdgeStream& stream);

}  // namespace tiger
