#include "tiger/benchmark.hpp"

#include "tiger/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <unordered_set>

namespace tiger {

namespace {

const char* kModule = "benchmark";

std::string fmt(std::optional<double> v) {
    if (!v) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError(kModule, "cannot write " + path.string());
    return out;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (community_sizes.empty()) throw ConfigError(kModule, "at least one community is required");
    for (std::size_t s : community_sizes)
        if (s == 0) throw ConfigError(kModule, "community sizes must be positive");
    for (double p : {p_in, p_out})
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(kModule, "edge probabilities must lie in [0, 1]");
    if (steps == 0) throw ConfigError(kModule, "at least one step is required");
    if (feature_dim < community_sizes.size()) {
        throw ConfigError(kModule, "feature dimension must be at least the number of communities");
    }
    if (!(feature_noise >= 0.0) || !std::isfinite(mean_scale)) throw ConfigError(kModule, "invalid feature scales");
}

std::size_t SyntheticSpec::num_nodes() const {
    std::size_t n = 0;
    for (std::size_t s : community_sizes) n += s;
    return n;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t n = spec.num_nodes();
    SyntheticData data;
    data.labels.reserve(n);
    for (std::size_t c = 0; c < spec.community_sizes.size(); ++c)
        data.labels.insert(data.labels.end(), spec.community_sizes[c], static_cast<int>(c));

    Rng feature_rng(derive_seed(spec.seed, "features"));
    std::normal_distribution<double> gauss(0.0, spec.feature_noise);
    data.features = Tensor(n, spec.feature_dim);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t c = 0; c < spec.feature_dim; ++c) {
            const double mean = static_cast<std::size_t>(data.labels[v]) == c ? spec.mean_scale : 0.0;
            data.features(v, c) = mean + gauss(feature_rng);
        }
    }

    Rng edge_rng(derive_seed(spec.seed, "edges"));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<bool> linked(n * (n - 1) / 2, false);
    data.stream.steps.resize(spec.steps);
    for (std::size_t t = 0; t < spec.steps; ++t) {
        std::size_t idx = 0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b, ++idx) {
                if (linked[idx]) continue;
                const double p = data.labels[a] == data.labels[b] ? spec.p_in : spec.p_out;
                if (unit(edge_rng) < p) {
                    linked[idx] = true;
                    data.stream.steps[t].push_back({static_cast<NodeId>(a), static_cast<NodeId>(b)});
                }
            }
        }
    }
    return data;
}

NoisyBenchmark inject_noise(const EdgeStream& clean, const std::vector<int>& labels, double ratio,
                            std::uint64_t seed) {
    if (!(ratio >= 0.0) || !std::isfinite(ratio)) throw ConfigError(kModule, "noise ratio must be non-negative");
    NoisyBenchmark out;
    out.clean = clean;
    out.noisy = clean;
    out.ratio = ratio;
    out.seed = seed;
    out.noise.resize(clean.num_steps());

    const std::size_t n = std::max(clean.node_bound(), labels.size());
    if (clean.node_bound() > labels.size()) throw GenerationError(kModule, "stream references unlabelled nodes");

    std::unordered_set<std::uint64_t> forbidden;
    for (const auto& step : clean.steps)
        for (const Edge& e : step) forbidden.insert(Edge::canonical(e.u, e.v).key());

    std::vector<bool> present(n, false);
    Rng rng(derive_seed(seed, "noise"));
    for (std::size_t t = 0; t < clean.num_steps(); ++t) {
        for (const Edge& e : clean.steps[t]) present[e.u] = present[e.v] = true;
        if (t == 0) continue;
        const std::size_t count = round_half_up(ratio * static_cast<double>(clean.steps[t].size()));
        if (count == 0) continue;

        std::vector<Edge> eligible;
        for (NodeId a = 0; a < n; ++a) {
            if (!present[a] || labels[a] < 0) continue;
            for (NodeId b = a + 1; b < n; ++b) {
                if (!present[b] || labels[b] < 0 || labels[a] == labels[b]) continue;
                if (forbidden.count(Edge{a, b}.key())) continue;
                eligible.push_back({a, b});
            }
        }
        if (eligible.size() < count) {
            throw GenerationError(kModule, "step " + std::to_string(t + 1) + " needs " + std::to_string(count) +
                                               " noise edges but only " + std::to_string(eligible.size()) +
                                               " eligible cross-class pairs exist");
        }
        for (std::size_t k = 0; k < count; ++k) {
            std::uniform_int_distribution<std::size_t> pick(k, eligible.size() - 1);
            std::swap(eligible[k], eligible[pick(rng)]);
            forbidden.insert(eligible[k].key());
            out.noise[t].push_back(eligible[k]);
        }
        std::sort(out.noise[t].begin(), out.noise[t].end());
        out.noisy.steps[t].insert(out.noisy.steps[t].end(), out.noise[t].begin(), out.noise[t].end());
    }
    return out;
}

std::optional<double> purification_accuracy(std::span<const Edge> removed, std::span<const Edge> noise) {
    if (noise.empty()) return std::nullopt;
    std::unordered_set<std::uint64_t> truth;
    for (const Edge& e : noise) truth.insert(Edge::canonical(e.u, e.v).key());
    std::size_t hits = 0;
    for (const Edge& e : removed) hits += truth.count(Edge::canonical(e.u, e.v).key());
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

NodeSplit split_nodes(const std::vector<int>& labels, std::array<double, 3> ratios, std::uint64_t seed) {
    double total = 0.0;
    for (double r : ratios) {
        if (!(r >= 0.0)) throw ConfigError(kModule, "split ratios must be non-negative");
        total += r;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError(kModule, "split ratios must sum to 1");
    std::vector<NodeId> nodes;
    for (std::size_t v = 0; v < labels.size(); ++v)
        if (labels[v] >= 0) nodes.push_back(static_cast<NodeId>(v));
    std::size_t needed = 0;
    for (double r : ratios) needed += r > 0.0 ? 1 : 0;
    if (nodes.size() < needed) {
        throw ConfigError(kModule, std::to_string(nodes.size()) + " labelled nodes cannot fill " +
                                       std::to_string(needed) + " splits");
    }
    Rng rng(derive_seed(seed, "split"));
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const double n = static_cast<double>(nodes.size());
    std::size_t n_train = round_half_up(ratios[0] * n);
    std::size_t n_val = round_half_up(ratios[1] * n);
    if (ratios[0] > 0.0) n_train = std::max<std::size_t>(n_train, 1);
    if (ratios[1] > 0.0) n_val = std::max<std::size_t>(n_val, 1);
    n_val = std::min(n_val, nodes.size() - n_train);
    NodeSplit split;
    split.train.assign(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.val.assign(nodes.begin() + static_cast<std::ptrdiff_t>(n_train),
                     nodes.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    split.test.assign(nodes.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), nodes.end());
    for (auto* part : {&split.train, &split.val, &split.test}) std::sort(part->begin(), part->end());
    return split;
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    out.count = values.size();
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.stdev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

void write_noise_file(const std::filesystem::path& path, const std::vector<std::vector<Edge>>& noise) {
    auto out = open_output(path);
    for (std::size_t t = 0; t < noise.size(); ++t)
        for (const Edge& e : noise[t]) out << (t + 1) << '\t' << e.u << '\t' << e.v << '\n';
}

std::vector<std::vector<Edge>> read_noise_file(const std::filesystem::path& path, std::size_t steps) {
    std::ifstream in(path);
    if (!in) throw IngestionError(kModule, "cannot open " + path.string());
    std::vector<std::vector<Edge>> noise(steps);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::size_t t = 0;
        unsigned long u = 0;
        unsigned long v = 0;
        if (std::sscanf(line.c_str(), "%zu\t%lu\t%lu", &t, &u, &v) != 3 || t == 0) {
            throw IngestionError(kModule, path.string() + ":" + std::to_string(line_no) + ": expected 't<TAB>u<TAB>v'");
        }
        if (t > steps) {
            throw IngestionError(kModule, path.string() + ":" + std::to_string(line_no) + ": step " +
                                              std::to_string(t) + " is past the end of the stream");
        }
        noise[t - 1].push_back(Edge::canonical(static_cast<NodeId>(u), static_cast<NodeId>(v)));
    }
    return noise;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows) {
    auto out = open_output(path);
    out << "method,step,purification_accuracy,clf_test_accuracy\n";
    for (const MetricRow& r : rows)
        out << r.method << ',' << r.step << ',' << fmt(r.purification_accuracy) << ','
            << fmt(r.classifier_accuracy) << '\n';
}

void write_aggregate_csv(const std::filesystem::path& path, std::span<const std::vector<MetricRow>> runs) {
    std::map<std::pair<std::string, std::size_t>, std::pair<std::vector<double>, std::vector<double>>> cells;
    for (const auto& run : runs) {
        for (const MetricRow& r : run) {
            auto& cell = cells[{r.method, r.step}];
            if (r.purification_accuracy) cell.first.push_back(*r.purification_accuracy);
            if (r.classifier_accuracy) cell.second.push_back(*r.classifier_accuracy);
        }
    }
    auto out = open_output(path);
    out << "method,step,runs,purification_mean,purification_std,clf_mean,clf_std\n";
    for (const auto& [key, values] : cells) {
        const MeanStd p = mean_std(values.first);
        const MeanStd c = mean_std(values.second);
        auto opt = [](const MeanStd& m, double v) { return m.count ? std::optional<double>(v) : std::nullopt; };
        out << key.first << ',' << key.second << ',' << std::max(p.count, c.count) << ',' << fmt(opt(p, p.mean))
            << ',' << fmt(opt(p, p.stdev)) << ',' << fmt(opt(c, c.mean)) << ',' << fmt(opt(c, c.stdev)) << '\n';
    }
}

}  // namespace tiger
