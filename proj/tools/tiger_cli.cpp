// tiger: generate planted-noise benchmarks, purify edge streams, and grid
// search the purifier's beta / w_p.

#include "tiger/benchmark.hpp"
#include "tiger/error.hpp"
#include "tiger/graph_io.hpp"
#include "tiger/pipeline.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flag values as typed; unset flags fall back to the --config file, then to defaults.
struct Flags {
    std::optional<std::string> stream, features, labels, truth, method, out, checkpoints;
    std::optional<double> noise_ratio, budget_ratio, beta, wp, lr;
    std::optional<std::size_t> budget, epochs, hidden, max_positives, memory_cap, svd_rank;
    std::optional<std::uint64_t> seed;
    bool no_attention = false;
    bool no_short_term = false;
    bool no_timings = false;
    bool include_partner = false;
    bool cold_start = false;
    std::string config_path;
};

struct RunConfig {
    std::string stream, features, labels, truth, out = "tiger_out", checkpoints;
    std::string method = "tiger";
    double noise_ratio = 0.0;
    double budget_ratio = 0.3;
    std::optional<std::size_t> budget;
    tiger::PipelineConfig pipeline;
};

void add_run_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--stream", f.stream, "Edge stream file: t<TAB>u<TAB>v");
    cmd.add_option("--features", f.features, "Feature file: node_id<TAB>f1,...,fd");
    cmd.add_option("--labels", f.labels, "Label file: node_id<TAB>class_id");
    cmd.add_option("--truth", f.truth, "Ground-truth noise edges: t<TAB>u<TAB>v");
    cmd.add_option("--method", f.method, "tiger | jaccard | adamic-adar | svd | random");
    cmd.add_option("--noise-ratio", f.noise_ratio, "Inject this fraction of cross-class noise per step");
    cmd.add_option("--budget-ratio", f.budget_ratio, "K = round(ratio * |delta E|) when no truth is known");
    cmd.add_option("--budget", f.budget, "Fixed K per step (overrides the ratio)");
    cmd.add_option("--seed", f.seed, "Root seed for every random choice");
    cmd.add_option("--beta", f.beta, "Fraction of positives kept for training");
    cmd.add_option("--wp", f.wp, "Ensemble logit of the proximity sub-score");
    cmd.add_option("--epochs", f.epochs, "Training epochs per step");
    cmd.add_option("--lr", f.lr, "Purifier learning rate");
    cmd.add_option("--hidden", f.hidden, "Hidden width");
    cmd.add_option("--max-positives", f.max_positives, "Subsample positives per step (0 = all)");
    cmd.add_option("--memory-cap", f.memory_cap, "Keep at most this many past embeddings per node (0 = all)");
    cmd.add_option("--svd-rank", f.svd_rank, "Rank of the svd baseline");
    cmd.add_flag("--no-attention", f.no_attention, "Disable attention over the embedding history");
    cmd.add_flag("--no-short-term", f.no_short_term, "Disable the short-term consistency scorer");
    cmd.add_flag("--include-partner", f.include_partner, "Keep the candidate partner in its own reference set");
    cmd.add_flag("--cold-start", f.cold_start, "Re-initialise the purifier at every step");
    cmd.add_flag("--no-timings", f.no_timings, "Write 0 in the seconds column for reproducible output");
    cmd.add_option("--config", f.config_path, "JSON file with defaults for any of these flags");
    cmd.add_option("--out", f.out, "Output directory");
    cmd.add_option("--checkpoints", f.checkpoints, "Directory for per-step parameter checkpoints");
}

template <typename T>
T pick(const std::optional<T>& flag, const json& file, const char* key, T fallback) {
    if (flag) return *flag;
    if (file.contains(key)) return file.at(key).get<T>();
    return fallback;
}

bool pick_flag(bool flag, const json& file, const char* key) {
    return flag || (file.contains(key) && file.at(key).get<bool>());
}

RunConfig resolve(const Flags& f) {
    json file = json::object();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw tiger::ConfigError("cli", "cannot open config file " + f.config_path);
        try {
            in >> file;
        } catch (const json::exception& e) {
            throw tiger::ConfigError("cli", f.config_path + ": " + e.what());
        }
    }
    RunConfig rc;
    try {
        rc.stream = pick<std::string>(f.stream, file, "stream", "");
        rc.features = pick<std::string>(f.features, file, "features", "");
        rc.labels = pick<std::string>(f.labels, file, "labels", "");
        rc.truth = pick<std::string>(f.truth, file, "truth", "");
        rc.out = pick<std::string>(f.out, file, "out", rc.out);
        rc.checkpoints = pick<std::string>(f.checkpoints, file, "checkpoints", "");
        rc.method = pick<std::string>(f.method, file, "method", rc.method);
        rc.noise_ratio = pick(f.noise_ratio, file, "noise-ratio", rc.noise_ratio);
        rc.budget_ratio = pick(f.budget_ratio, file, "budget-ratio", rc.budget_ratio);
        if (f.budget) rc.budget = f.budget;
        else if (file.contains("budget") && !file.at("budget").is_null()) rc.budget = file.at("budget").get<std::size_t>();

        auto& p = rc.pipeline;
        p.method = tiger::parse_method(rc.method);
        p.seed = pick<std::uint64_t>(f.seed, file, "seed", 0);
        p.purifier.beta = pick(f.beta, file, "beta", p.purifier.beta);
        p.purifier.wp = pick(f.wp, file, "wp", p.purifier.wp);
        p.purifier.epochs = pick(f.epochs, file, "epochs", p.purifier.epochs);
        p.purifier.learning_rate = pick(f.lr, file, "lr", p.purifier.learning_rate);
        p.purifier.hidden = pick(f.hidden, file, "hidden", p.purifier.hidden);
        p.purifier.max_positives = pick(f.max_positives, file, "max-positives", p.purifier.max_positives);
        p.purifier.memory_cap = pick(f.memory_cap, file, "memory-cap", p.purifier.memory_cap);
        p.purifier.use_attention = !pick_flag(f.no_attention, file, "no-attention");
        p.purifier.use_short_term = !pick_flag(f.no_short_term, file, "no-short-term");
        p.purifier.exclude_partner = !pick_flag(f.include_partner, file, "include-partner");
        p.purifier.warm_start = !pick_flag(f.cold_start, file, "cold-start");
        p.record_timings = !pick_flag(f.no_timings, file, "no-timings");
        p.svd.rank = pick(f.svd_rank, file, "svd-rank", p.svd.rank);
        p.svd.seed = tiger::derive_seed(p.seed, "svd");
        p.classifier.hidden = p.purifier.hidden;
        p.budget.ratio = rc.budget_ratio;
        p.budget.fixed = rc.budget;
        p.budget.from_truth = !rc.budget.has_value();
        if (!rc.checkpoints.empty()) p.checkpoint_dir = rc.checkpoints;
    } catch (const json::exception& e) {
        throw tiger::ConfigError("cli", std::string("bad config value: ") + e.what());
    }
    rc.pipeline.purifier.validate();
    if (rc.noise_ratio < 0.0) throw tiger::ConfigError("cli", "--noise-ratio must be non-negative");
    return rc;
}

json echo(const RunConfig& rc) {
    const auto& p = rc.pipeline;
    return {{"stream", rc.stream},
            {"features", rc.features},
            {"labels", rc.labels},
            {"truth", rc.truth},
            {"out", rc.out},
            {"checkpoints", rc.checkpoints},
            {"method", rc.method},
            {"noise-ratio", rc.noise_ratio},
            {"budget-ratio", rc.budget_ratio},
            {"budget", rc.budget ? json(*rc.budget) : json(nullptr)},
            {"seed", p.seed},
            {"beta", p.purifier.beta},
            {"wp", p.purifier.wp},
            {"epochs", p.purifier.epochs},
            {"lr", p.purifier.learning_rate},
            {"hidden", p.purifier.hidden},
            {"max-positives", p.purifier.max_positives},
            {"memory-cap", p.purifier.memory_cap},
            {"svd-rank", p.svd.rank},
            {"no-attention", !p.purifier.use_attention},
            {"no-short-term", !p.purifier.use_short_term},
            {"include-partner", !p.purifier.exclude_partner},
            {"cold-start", !p.purifier.warm_start},
            {"no-timings", !p.record_timings}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tiger::IngestionError("cli", "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw tiger::ConfigError("cli", std::string(flag) + " is required");
}

struct Inputs {
    tiger::EdgeStream stream;
    tiger::Tensor features;
    std::vector<int> labels;
    std::vector<std::vector<tiger::Edge>> truth;
};

Inputs load_inputs(const RunConfig& rc) {
    require(rc.stream, "--stream");
    require(rc.features, "--features");
    Inputs in;
    in.stream = tiger::read_edge_stream(rc.stream);
    in.features = tiger::read_features(rc.features);
    if (!rc.labels.empty()) in.labels = tiger::read_labels(rc.labels, in.features.rows());
    if (!rc.truth.empty()) in.truth = tiger::read_noise_file(rc.truth, in.stream.num_steps());
    return in;
}

// Injects noise into a clean stream when asked to and no truth file was given.
void maybe_inject(Inputs& in, const RunConfig& rc, std::uint64_t seed) {
    if (rc.noise_ratio <= 0.0 || !rc.truth.empty()) return;
    if (in.labels.empty()) throw tiger::ConfigError("cli", "--noise-ratio needs --labels");
    tiger::NoisyBenchmark noisy = tiger::inject_noise(in.stream, in.labels, rc.noise_ratio, seed);
    in.stream = std::move(noisy.noisy);
    in.truth = std::move(noisy.noise);
}

std::string cell(std::optional<double> v) {
    if (!v) return "    NA";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6.4f", *v);
    return buf;
}

int cmd_generate(const std::string& spec_path, const std::string& out_dir, std::optional<double> noise_flag,
                 std::optional<std::uint64_t> seed_flag) {
    std::ifstream in(spec_path);
    if (!in) throw tiger::ConfigError("cli", "cannot open spec file " + spec_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw tiger::ConfigError("cli", spec_path + ": " + e.what());
    }
    tiger::SyntheticSpec spec;
    double noise_ratio = 0.3;
    try {
        if (j.contains("community_sizes")) spec.community_sizes = j.at("community_sizes").get<std::vector<std::size_t>>();
        spec.p_in = j.value("p_in", spec.p_in);
        spec.p_out = j.value("p_out", spec.p_out);
        spec.steps = j.value("steps", spec.steps);
        spec.feature_dim = j.value("feature_dim", spec.feature_dim);
        spec.mean_scale = j.value("mean_scale", spec.mean_scale);
        spec.feature_noise = j.value("feature_noise", spec.feature_noise);
        spec.seed = j.value("seed", spec.seed);
        noise_ratio = j.value("noise_ratio", noise_ratio);
    } catch (const json::exception& e) {
        throw tiger::ConfigError("cli", spec_path + ": " + e.what());
    }
    if (noise_flag) noise_ratio = *noise_flag;
    if (seed_flag) spec.seed = *seed_flag;

    const tiger::SyntheticData data = tiger::generate_synthetic(spec);
    const tiger::NoisyBenchmark bench =
        tiger::inject_noise(data.stream, data.labels, noise_ratio, tiger::derive_seed(spec.seed, "noise-copy"));

    const fs::path out(out_dir);
    fs::create_directories(out);
    tiger::write_edge_stream(out / "clean_stream.tsv", bench.clean);
    tiger::write_edge_stream(out / "stream.tsv", bench.noisy);
    tiger::write_features(out / "features.tsv", data.features);
    tiger::write_labels(out / "labels.tsv", data.labels);
    tiger::write_noise_file(out / "noise.tsv", bench.noise);
    write_json(out / "config.json", {{"community_sizes", spec.community_sizes},
                                     {"p_in", spec.p_in},
                                     {"p_out", spec.p_out},
                                     {"steps", spec.steps},
                                     {"feature_dim", spec.feature_dim},
                                     {"mean_scale", spec.mean_scale},
                                     {"feature_noise", spec.feature_noise},
                                     {"seed", spec.seed},
                                     {"noise_ratio", noise_ratio}});
    std::cout << "wrote " << bench.noisy.total_edges() << " edges (" << bench.clean.total_edges() << " clean) over "
              << bench.noisy.num_steps() << " steps to " << out.string() << "\n";
    return 0;
}

int cmd_purify(const RunConfig& rc) {
    Inputs in = load_inputs(rc);
    maybe_inject(in, rc, tiger::derive_seed(rc.pipeline.seed, "noise-copy"));

    const fs::path out(rc.out);
    fs::create_directories(out);
    write_json(out / "config.json", echo(rc));
    if (rc.noise_ratio > 0.0 && rc.truth.empty()) {
        tiger::write_edge_stream(out / "noisy_stream.tsv", in.stream);
        tiger::write_noise_file(out / "noise.tsv", in.truth);
    }

    std::ofstream lines(out / "reports.jsonl", std::ios::binary);
    if (!lines) throw tiger::IngestionError("cli", "cannot write " + (out / "reports.jsonl").string());
    const auto reports = tiger::run_stream(in.stream, in.features, in.labels, rc.pipeline, in.truth,
                                           [&](const tiger::StepReport& r) {
                                               tiger::write_report_line(lines, r);
                                               for (const auto& w : r.warnings)
                                                   std::cerr << "step " << r.step << ": " << w << "\n";
                                           });
    tiger::write_summary_csv(out / "summary.csv", reports, rc.pipeline.record_timings);
    tiger::write_removed_edges(out / "removed.tsv", reports);
    if (rc.pipeline.method == tiger::Method::tiger) tiger::write_training_log(out / "training_log.tsv", reports);

    std::vector<tiger::MetricRow> rows;
    std::cout << "step  |dE|     K  purif.acc  clf.acc\n";
    for (const auto& r : reports) {
        const std::optional<double> clf =
            r.classifier ? std::optional<double>(r.classifier->test_accuracy) : std::nullopt;
        rows.push_back({rc.method, r.step, r.purification_accuracy, clf});
        char line[96];
        std::snprintf(line, sizeof line, "%4zu %5zu %5zu     ", r.step, r.delta_edges, r.budget);
        std::cout << line << cell(r.purification_accuracy) << "   " << cell(clf) << "\n";
    }
    tiger::write_metrics_csv(out / "metrics.csv", rows);
    return 0;
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw tiger::ConfigError("cli", std::string(flag) + ": '" + item + "' is not a number");
        }
    }
    if (values.empty()) throw tiger::ConfigError("cli", std::string(flag) + " must not be empty");
    return values;
}

int cmd_grid(RunConfig rc, const std::string& betas_text, const std::string& wps_text, std::size_t runs) {
    if (rc.pipeline.method != tiger::Method::tiger) throw tiger::ConfigError("cli", "grid search needs --method tiger");
    if (runs == 0) throw tiger::ConfigError("cli", "--runs must be positive");
    const auto betas = parse_list(betas_text, "--betas");
    const auto wps = parse_list(wps_text, "--wps");
    const Inputs base = load_inputs(rc);
    if (base.truth.empty() && rc.noise_ratio <= 0.0) {
        throw tiger::ConfigError("cli", "grid search needs ground truth (--truth or --noise-ratio)");
    }

    std::vector<Inputs> copies;
    for (std::size_t k = 0; k < (base.truth.empty() ? runs : 1); ++k) {
        Inputs copy = base;
        maybe_inject(copy, rc, tiger::derive_seed(rc.pipeline.seed, "noise-copy", k));
        copies.push_back(std::move(copy));
    }

    const fs::path out(rc.out);
    fs::create_directories(out);
    json cfg = echo(rc);
    cfg["betas"] = betas;
    cfg["wps"] = wps;
    cfg["runs"] = copies.size();
    write_json(out / "config.json", cfg);

    struct Cell {
        double beta, wp, mean, stdev;
    };
    std::vector<Cell> cells;
    for (double beta : betas) {
        for (double wp : wps) {
            std::vector<double> run_means;
            for (std::size_t k = 0; k < copies.size(); ++k) {
                tiger::PipelineConfig pc = rc.pipeline;
                pc.purifier.beta = beta;
                pc.purifier.wp = wp;
                pc.seed = tiger::derive_seed(rc.pipeline.seed, "grid-run", k);
                const auto reports =
                    tiger::run_stream(copies[k].stream, copies[k].features, copies[k].labels, pc, copies[k].truth);
                std::vector<double> accs;
                for (const auto& r : reports)
                    if (r.purification_accuracy) accs.push_back(*r.purification_accuracy);
                run_means.push_back(tiger::mean_std(accs).mean);
            }
            const tiger::MeanStd m = tiger::mean_std(run_means);
            cells.push_back({beta, wp, m.mean, m.stdev});
            std::fprintf(stdout, "beta=%-5g wp=%-5g mean purification accuracy %.4f +- %.4f\n", beta, wp, m.mean,
                         m.stdev);
            std::fflush(stdout);
        }
    }
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.mean != b.mean) return a.mean > b.mean;
        if (a.beta != b.beta) return a.beta < b.beta;
        return a.wp < b.wp;
    });
    std::ofstream csv(out / "grid.csv", std::ios::binary);
    csv << "rank,beta,wp,mean_purification_accuracy,std\n";
    for (std::size_t k = 0; k < cells.size(); ++k) {
        char line[128];
        std::snprintf(line, sizeof line, "%zu,%g,%g,%.6f,%.6f\n", k + 1, cells[k].beta, cells[k].wp, cells[k].mean,
                      cells[k].stdev);
        csv << line;
    }
    std::printf("best: beta=%g wp=%g (%.4f)\n", cells.front().beta, cells.front().wp, cells.front().mean);
    return 0;
}

int exit_code(const tiger::Error& e) {
    switch (e.category()) {
        case tiger::ErrorCategory::usage: return 1;
        case tiger::ErrorCategory::data: return 2;
        case tiger::ErrorCategory::numerical: return 3;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Purify time-evolving graphs by removing noisy incoming edges."};
    app.require_subcommand(1);

    std::string spec_path;
    std::string gen_out = "benchmark";
    std::optional<double> gen_noise;
    std::optional<std::uint64_t> gen_seed;
    auto* generate = app.add_subcommand("generate", "Write a synthetic planted-noise benchmark");
    generate->add_option("--spec", spec_path, "JSON benchmark spec")->required();
    generate->add_option("--out", gen_out, "Output directory");
    generate->add_option("--noise-ratio", gen_noise, "Override the spec's noise ratio");
    generate->add_option("--seed", gen_seed, "Override the spec's seed");

    Flags purify_flags;
    auto* purify = app.add_subcommand("purify", "Run a purifier over an edge stream");
    add_run_flags(*purify, purify_flags);

    Flags grid_flags;
    std::string betas = "0.1,0.2,0.3";
    std::string wps = "1,5,10,20";
    std::size_t runs = 1;
    auto* grid = app.add_subcommand("grid", "Grid search beta and w_p by mean purification accuracy");
    add_run_flags(*grid, grid_flags);
    grid->add_option("--betas", betas, "Comma-separated beta values");
    grid->add_option("--wps", wps, "Comma-separated w_p values");
    grid->add_option("--runs", runs, "Noisy copies per cell when injecting noise");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*generate) return cmd_generate(spec_path, gen_out, gen_noise, gen_seed);
        if (*purify) return cmd_purify(resolve(purify_flags));
        if (*grid) return cmd_grid(resolve(grid_flags), betas, wps, runs);
    } catch (const tiger::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
