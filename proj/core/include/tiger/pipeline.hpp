#pragma once

// Per-step purification loop. Each step merges the delta into the purified
// graph of the previous step, scores only the newly arrived edges, removes
// the K lowest-scoring ones, and retrains the downstream classifier whose
// class distributions feed the short-term scorer at the next step.

#include "tiger/benchmark.hpp"
#include "tiger/proximity.hpp"
#include "tiger/trainer.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tiger {

enum class Method { tiger, jaccard, adamic_adar, svd, random };

Method parse_method(std::string_view name);
std::string to_string(Method method);

struct BudgetConfig {
    double ratio = 0.3;
    std::optional<std::size_t> fixed;
    /// Use the ground-truth noise count when one is known for the step.
    bool from_truth = true;
};

struct PipelineConfig {
    Method method = Method::tiger;
    PurifierConfig purifier;
    ClassifierConfig classifier;
    BudgetConfig budget;
    SvdConfig svd;
    std::uint64_t seed = 0;
    bool train_classifier = true;
    bool record_timings = true;
    std::array<double, 3> split_ratios{0.1, 0.1, 0.8};
    /// Writes the purifier parameters after each step when non-empty.
    std::filesystem::path checkpoint_dir;
};

struct EdgeScore {
    Edge edge;
    SubScores sub;
};

struct PhaseTimings {
    double train = 0.0;
    double score = 0.0;
    double classify = 0.0;
    double total = 0.0;
};

struct StepReport {
    std::size_t step = 0;
    std::size_t delta_edges = 0;
    std::size_t budget = 0;
    std::vector<Edge> removed;
    std::vector<EdgeScore> scores;
    std::optional<double> purification_accuracy;
    std::optional<ClassifierReport> classifier;
    std::vector<EpochRecord> training;
    PhaseTimings timings;
    std::vector<std::string> warnings;
    bool initial = false;
    bool skipped = false;
};

class Pipeline {
public:
    /// `truth` optionally lists the injected noise per step for metrics and
    /// ground-truth budgets.
    Pipeline(Tensor features, std::vector<int> labels, PipelineConfig config,
             std::vector<std::vector<Edge>> truth = {});
    ~Pipeline();
    Pipeline(Pipeline&&) noexcept;
    Pipeline& operator=(Pipeline&&) noexcept;

    /// Runs one step with the configured budget policy.
    StepReport run_step(const Delta& delta);
    /// Runs one step with an explicit budget K.
    StepReport run_step(const Delta& delta, std::size_t budget);

    const TemporalGraph& graph() const;
    const NodeSplit& split() const;
    const PipelineConfig& config() const;
    /// Null for baseline methods.
    const PurifierModel* model() const;
    const EmbeddingMemory& memory() const;

private:
    struct State;
    std::unique_ptr<State> state_;
    std::size_t budget_for(std::size_t step, std::size_t delta_edges) const;
};

/// Runs every step of the stream. `on_step` (optional) sees each report as
/// soon as it is produced.
std::vector<StepReport> run_stream(const EdgeStream& stream, const Tensor& features, const std::vector<int>& labels,
                                   const PipelineConfig& config, const std::vector<std::vector<Edge>>& truth = {},
                                   const std::function<void(const StepReport&)>& on_step = {});

/// One JSON object per line.
void write_report_line(std::ostream& out, const StepReport& report, bool include_scores = true);

/// `step,delta_edges,budget,removed,purification_accuracy,clf_test_accuracy,seconds`;
/// the seconds column is 0 when timings are disabled.
void write_summary_csv(const std::filesystem::path& path, std::span<const StepReport> reports, bool timings);

/// `step<TAB>epoch<TAB>loss` per training epoch.
void write_training_log(const std::filesystem::path& path, std::span<const StepReport> reports);

/// Removed edges as `t<TAB>u<TAB>v`.
void write_removed_edges(const std::filesystem::path& path, std::span<const StepReport> reports);

}  // namespace tiger
