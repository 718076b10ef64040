#pragma once

// Planted-partition dynamic graphs, cross-class noise injection with ground
// truth, and the evaluation metrics used to compare purifiers.

#include "tiger/gcn.hpp"
#include "tiger/graph_io.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tiger {

struct SyntheticSpec {
    std::vector<std::size_t> community_sizes{100, 100};
    double p_in = 0.05;
    double p_out = 0.002;
    std::size_t steps = 10;
    std::size_t feature_dim = 16;
    /// Community c has mean mean_scale * e_c, so two means sit sqrt(2) * mean_scale apart.
    double mean_scale = 1.4142135623730951;
    double feature_noise = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t num_nodes() const;
};

struct SyntheticData {
    EdgeStream stream;
    Tensor features;
    std::vector<int> labels;
};

/// Each step, every still-unlinked pair becomes an edge with probability
/// p_in (same community) or p_out (different communities).
SyntheticData generate_synthetic(const SyntheticSpec& spec);

struct NoisyBenchmark {
    EdgeStream clean;
    EdgeStream noisy;
    /// Injected edges per step (index 0 = step 1, always empty).
    std::vector<std::vector<Edge>> noise;
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

/// Adds round-half-up(ratio * |clean delta|) cross-class noise edges at every
/// step from 2 on, drawn uniformly among present, unlinked, cross-class
/// pairs that never occur in the clean stream. Throws GenerationError naming
/// the step when too few eligible pairs exist.
NoisyBenchmark inject_noise(const EdgeStream& clean, const std::vector<int>& labels, double ratio,
                            std::uint64_t seed);

/// |removed & noise| / |noise|; nullopt when the step has no injected noise.
std::optional<double> purification_accuracy(std::span<const Edge> removed, std::span<const Edge> noise);

/// Random disjoint train/val/test cover of the labelled nodes.
NodeSplit split_nodes(const std::vector<int>& labels, std::array<double, 3> ratios, std::uint64_t seed);

struct MeanStd {
    double mean = 0.0;
    double stdev = 0.0;  // sample standard deviation; 0 for fewer than two values
    std::size_t count = 0;
};

MeanStd mean_std(std::span<const double> values);

void write_noise_file(const std::filesystem::path& path, const std::vector<std::vector<Edge>>& noise);
/// Reads `t<TAB>u<TAB>v` ground truth into per-step lists of `steps` entries.
std::vector<std::vector<Edge>> read_noise_file(const std::filesystem::path& path, std::size_t steps);

struct MetricRow {
    std::string method;
    std::size_t step = 0;
    std::optional<double> purification_accuracy;
    std::optional<double> classifier_accuracy;
};

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows);

/// One line per (method, step) with mean and sample stdev across runs.
void write_aggregate_csv(const std::filesystem::path& path, std::span<const std::vector<MetricRow>> runs);

}  // namespace tiger
