#include "tiger/pipeline.hpp"

#include "tiger/checkpoint.hpp"
#include "tiger/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace tiger {

namespace {

const char* kModule = "pipeline";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t class_count(const std::vector<int>& labels) {
    int top = -1;
    for (int l : labels) top = std::max(top, l);
    return static_cast<std::size_t>(top + 1);
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError(kModule, "cannot write " + path.string());
    return out;
}

std::string fixed6(std::optional<double> v) {
    if (!v) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

BaselineMethod as_baseline(Method method) {
    switch (method) {
        case Method::jaccard: return BaselineMethod::jaccard;
        case Method::adamic_adar: return BaselineMethod::adamic_adar;
        case Method::svd: return BaselineMethod::svd;
        case Method::random: return BaselineMethod::random;
        case Method::tiger: break;
    }
    throw ContractError(kModule, "tiger is not a baseline method");
}

}  // namespace

Method parse_method(std::string_view name) {
    if (name == "tiger") return Method::tiger;
    if (name == "jaccard") return Method::jaccard;
    if (name == "adamic-adar") return Method::adamic_adar;
    if (name == "svd") return Method::svd;
    if (name == "random") return Method::random;
    throw ConfigError(kModule, "unknown method '" + std::string(name) +
                                   "' (expected tiger, jaccard, adamic-adar, svd or random)");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::tiger: return "tiger";
        case Method::jaccard: return "jaccard";
        case Method::adamic_adar: return "adamic-adar";
        case Method::svd: return "svd";
        case Method::random: return "random";
    }
    return "unknown";
}

struct Pipeline::State {
    PipelineConfig config;
    TemporalGraph graph;
    std::vector<std::vector<Edge>> truth;
    NodeSplit split;
    std::size_t classes = 0;
    std::optional<PurifierModel> model;
    ad::Adam optimizer;
    EmbeddingMemory memory;
    std::optional<TrainedClassifier> classifier;

    State(Tensor features, std::vector<int> labels, PipelineConfig cfg, std::vector<std::vector<Edge>> noise)
        : config(std::move(cfg)),
          graph(std::move(features), std::move(labels)),
          truth(std::move(noise)),
          optimizer(ad::AdamConfig{config.purifier.learning_rate}),
          memory(config.purifier.memory_cap) {}

    void init_model() {
        Rng rng(derive_seed(config.seed, "model"));
        model = PurifierModel::init(graph.features().cols(), config.purifier.hidden, classes, rng);
        optimizer.reset();
    }
};

Pipeline::Pipeline(Tensor features, std::vector<int> labels, PipelineConfig config,
                   std::vector<std::vector<Edge>> truth)
    : state_(std::make_unique<State>(std::move(features), std::move(labels), std::move(config), std::move(truth))) {
    State& s = *state_;
    s.config.purifier.validate();
    if (s.config.budget.ratio < 0.0) throw ConfigError(kModule, "budget ratio must be non-negative");
    if (s.graph.has_labels()) {
        s.classes = class_count(s.graph.labels());
        s.split = split_nodes(s.graph.labels(), s.config.split_ratios, s.config.seed);
    }
    if (s.config.method == Method::tiger) s.init_model();
}

Pipeline::~Pipeline() = default;
Pipeline::Pipeline(Pipeline&&) noexcept = default;
Pipeline& Pipeline::operator=(Pipeline&&) noexcept = default;

const TemporalGraph& Pipeline::graph() const { return state_->graph; }
const NodeSplit& Pipeline::split() const { return state_->split; }
const PipelineConfig& Pipeline::config() const { return state_->config; }
const PurifierModel* Pipeline::model() const { return state_->model ? &*state_->model : nullptr; }
const EmbeddingMemory& Pipeline::memory() const { return state_->memory; }

std::size_t Pipeline::budget_for(std::size_t step, std::size_t delta_edges) const {
    const BudgetConfig& b = state_->config.budget;
    if (b.from_truth && step <= state_->truth.size()) return state_->truth[step - 1].size();
    if (b.fixed) return *b.fixed;
    return round_half_up(b.ratio * static_cast<double>(delta_edges));
}

StepReport Pipeline::run_step(const Delta& delta) {
    return run_step(delta, budget_for(state_->graph.current_step() + 1, delta.new_edges.size()));
}

StepReport Pipeline::run_step(const Delta& delta, std::size_t budget) {
    State& s = *state_;
    const PipelineConfig& cfg = s.config;
    const auto start = Clock::now();

    s.graph.apply_delta(delta);
    StepReport report;
    report.step = s.graph.current_step();
    report.initial = report.step == 1;

    std::vector<Edge> candidates;
    candidates.reserve(delta.new_edges.size());
    for (const Edge& e : delta.new_edges) candidates.push_back(Edge::canonical(e.u, e.v));
    std::sort(candidates.begin(), candidates.end());
    report.delta_edges = candidates.size();

    if (report.initial) {
        budget = 0;
    } else if (budget > candidates.size()) {
        report.warnings.push_back("budget " + std::to_string(budget) + " exceeds " +
                                  std::to_string(candidates.size()) + " candidate edges; clamped");
        budget = candidates.size();
    }
    report.budget = budget;
    report.skipped = !report.initial && candidates.empty();

    const bool tiger = cfg.method == Method::tiger;
    if (!report.skipped) {
        if (tiger) {
            std::optional<LatentMatrix> latent;
            if (cfg.purifier.use_short_term && s.classifier) {
                latent = LatentMatrix::from_probabilities(
                    class_probabilities(s.classifier->params, s.graph, View::purified));
            }
            if (!cfg.purifier.warm_start) s.init_model();

            ScoringContext ctx;
            ctx.graph = &s.graph;
            ctx.view = View::purified;
            ctx.memory = &s.memory;
            ctx.latent = latent ? &*latent : nullptr;
            ctx.short_term.exclude_partner = cfg.purifier.exclude_partner;
            ctx.use_attention = cfg.purifier.use_attention;
            ctx.ensemble.wp = cfg.purifier.wp;
            ctx.adjacency = share_adjacency(s.graph, View::purified);

            const auto train_start = Clock::now();
            Rng rng(derive_seed(cfg.seed, "trainer", report.step));
            report.training = train_step(*s.model, s.optimizer, ctx, cfg.purifier, rng).epochs;
            report.timings.train = seconds_since(train_start);

            if (!report.initial) {
                const auto score_start = Clock::now();
                const RawSubScores raw = raw_subscores(ctx, candidates);
                const ScoredBatch batch = score_pairs(*s.model, ctx, candidates, raw);
                const std::vector<SubScores> subs = unpack_subscores(batch, raw);
                std::vector<double> finals;
                finals.reserve(subs.size());
                for (std::size_t k = 0; k < subs.size(); ++k) {
                    report.scores.push_back({candidates[k], subs[k]});
                    finals.push_back(subs[k].score);
                }
                for (std::size_t idx : bottom_k(candidates, finals, budget)) report.removed.push_back(candidates[idx]);
                report.timings.score = seconds_since(score_start);
            }
        } else if (!report.initial) {
            const auto score_start = Clock::now();
            report.removed = baseline_purify(s.graph, candidates, budget, as_baseline(cfg.method), View::purified,
                                             derive_seed(cfg.seed, "random", report.step), cfg.svd);
            report.timings.score = seconds_since(score_start);
        }
    }
    std::sort(report.removed.begin(), report.removed.end());
    s.graph.remove_edges(report.removed);

    if (tiger) {
        const Tensor h = gcn_forward(s.model->encoder, s.graph, View::purified).value();
        s.memory.push(report.step, h, s.graph.present_nodes());
    }

    if (report.step <= s.truth.size()) {
        report.purification_accuracy = purification_accuracy(report.removed, s.truth[report.step - 1]);
    }

    if (cfg.train_classifier && s.graph.has_labels() && !report.skipped) {
        const auto clf_start = Clock::now();
        ClassifierConfig ccfg = cfg.classifier;
        ccfg.seed = derive_seed(cfg.seed, "classifier", report.step);
        try {
            s.classifier = train_classifier(s.graph, View::purified, s.split, ccfg);
            report.classifier = s.classifier->report;
            for (const auto& w : s.classifier->report.warnings) report.warnings.push_back(w);
        } catch (const ConfigError& e) {
            s.classifier.reset();
            report.warnings.push_back(std::string("classifier not trained: ") + e.what());
        }
        report.timings.classify = seconds_since(clf_start);
    }

    if (tiger && !cfg.checkpoint_dir.empty()) {
        std::filesystem::create_directories(cfg.checkpoint_dir);
        save_checkpoint(cfg.checkpoint_dir / ("step_" + std::to_string(report.step) + ".ckpt"),
                        s.model->snapshot());
    }
    report.timings.total = seconds_since(start);
    if (!cfg.record_timings) report.timings = {};
    return report;
}

std::vector<StepReport> run_stream(const EdgeStream& stream, const Tensor& features, const std::vector<int>& labels,
                                   const PipelineConfig& config, const std::vector<std::vector<Edge>>& truth,
                                   const std::function<void(const StepReport&)>& on_step) {
    if (stream.num_steps() == 0) throw IngestionError(kModule, "stream has no time steps");
    if (stream.node_bound() > features.rows()) {
        throw IngestionError(kModule, "stream references node " + std::to_string(stream.node_bound() - 1) +
                                          " but only " + std::to_string(features.rows()) + " feature rows exist");
    }
    Pipeline pipeline(features, labels, config, truth);
    std::vector<StepReport> reports;
    for (const Delta& delta : to_deltas(stream)) {
        reports.push_back(pipeline.run_step(delta));
        if (on_step) on_step(reports.back());
    }
    return reports;
}

void write_report_line(std::ostream& out, const StepReport& r, bool include_scores) {
    using nlohmann::json;
    json j;
    j["step"] = r.step;
    j["delta_edges"] = r.delta_edges;
    j["budget"] = r.budget;
    j["initial"] = r.initial;
    j["skipped"] = r.skipped;
    json removed = json::array();
    for (const Edge& e : r.removed) removed.push_back({e.u, e.v});
    j["removed"] = removed;
    j["purification_accuracy"] = r.purification_accuracy ? json(*r.purification_accuracy) : json(nullptr);
    if (r.classifier) {
        j["classifier"] = {{"train_accuracy", r.classifier->train_accuracy},
                           {"val_accuracy", r.classifier->val_accuracy},
                           {"test_accuracy", r.classifier->test_accuracy},
                           {"epochs", r.classifier->epochs_run},
                           {"best_epoch", r.classifier->best_epoch}};
    } else {
        j["classifier"] = nullptr;
    }
    json losses = json::array();
    for (const auto& e : r.training) losses.push_back(e.loss);
    j["training_loss"] = losses;
    j["timings"] = {{"train", r.timings.train},
                    {"score", r.timings.score},
                    {"classify", r.timings.classify},
                    {"total", r.timings.total}};
    j["warnings"] = r.warnings;
    if (include_scores) {
        json scores = json::array();
        for (const auto& es : r.scores) {
            json s = {{"u", es.edge.u},
                      {"v", es.edge.v},
                      {"score", es.sub.score},
                      {"s_long", es.sub.s_long},
                      {"s_prox", es.sub.s_prox},
                      {"s_prox_norm", es.sub.s_prox_norm},
                      {"weights", es.sub.weights}};
            if (es.sub.short_term) {
                s["s_short"] = es.sub.s_short;
                s["s_short_norm"] = es.sub.s_short_norm;
            }
            scores.push_back(std::move(s));
        }
        j["scores"] = scores;
    }
    out << j.dump() << '\n';
}

void write_summary_csv(const std::filesystem::path& path, std::span<const StepReport> reports, bool timings) {
    auto out = open_output(path);
    out << "step,delta_edges,budget,removed,purification_accuracy,clf_test_accuracy,seconds\n";
    for (const StepReport& r : reports) {
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.3f", timings ? r.timings.total : 0.0);
        const std::optional<double> clf =
            r.classifier ? std::optional<double>(r.classifier->test_accuracy) : std::nullopt;
        out << r.step << ',' << r.delta_edges << ',' << r.budget << ',' << r.removed.size() << ','
            << fixed6(r.purification_accuracy) << ',' << fixed6(clf) << ',' << secs << '\n';
    }
}

void write_training_log(const std::filesystem::path& path, std::span<const StepReport> reports) {
    auto out = open_output(path);
    for (const StepReport& r : reports) {
        for (const EpochRecord& e : r.training) {
            char loss[40];
            std::snprintf(loss, sizeof loss, "%.17g", e.loss);
            out << r.step << '\t' << e.epoch << '\t' << loss << '\n';
        }
    }
}

void write_removed_edges(const std::filesystem::path& path, std::span<const StepReport> reports) {
    auto out = open_output(path);
    for (const StepReport& r : reports)
        for (const Edge& e : r.removed) out << r.step << '\t' << e.u << '\t' << e.v << '\n';
}

}  // namespace tiger
