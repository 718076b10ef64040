#include "tiger/graph_io.hpp"

#include "tiger/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>

namespace tiger {

namespace {

const char* kModule = "graph-io";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
    throw IngestionError(kModule, source + ":" + std::to_string(line) + ": " + what);
}

template <typename Int>
Int parse_int(std::string_view token, const std::string& source, std::size_t line) {
    token = trim(token);
    Int value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
        fail(source, line, "expected an integer, got '" + std::string(token) + "'");
    }
    return value;
}

double parse_double(std::string_view token, const std::string& source, std::size_t line) {
    const std::string text(trim(token));
    if (text.empty()) fail(source, line, "empty numeric field");
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) fail(source, line, "expected a decimal, got '" + text + "'");
    return value;
}

// Calls fn(line_number, fields) for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = trim(raw);
        if (text.empty() || text.front() == '#') continue;
        fn(line, split(text, '\t'));
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError(kModule, "cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError(kModule, "cannot write " + path.string());
    return out;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::size_t EdgeStream::total_edges() const noexcept {
    std::size_t n = 0;
    for (const auto& s : steps) n += s.size();
    return n;
}

std::size_t EdgeStream::node_bound() const noexcept {
    std::size_t bound = 0;
    for (const auto& s : steps)
        for (const Edge& e : s) bound = std::max<std::size_t>(bound, std::max(e.u, e.v) + 1);
    return bound;
}

EdgeStream parse_edge_stream(std::istream& in, const std::string& source) {
    EdgeStream stream;
    std::unordered_set<std::uint64_t> seen;
    for_each_record(in, [&](std::size_t line, const std::vector<std::string_view>& f) {
        if (f.size() != 3) fail(source, line, "expected 't<TAB>u<TAB>v'");
        const auto t = parse_int<std::size_t>(f[0], source, line);
        const auto u = parse_int<NodeId>(f[1], source, line);
        const auto v = parse_int<NodeId>(f[2], source, line);
        if (t == 0) fail(source, line, "time steps start at 1");
        if (t < stream.steps.size()) fail(source, line, "time steps must be non-decreasing");
        if (t > stream.steps.size() + 1) {
            fail(source, line, "time step " + std::to_string(t) + " skips step " +
                                   std::to_string(stream.steps.size() + 1));
        }
        if (u == v) fail(source, line, "self-loop on node " + std::to_string(u));
        const Edge e = Edge::canonical(u, v);
        if (!seen.insert(e.key()).second) {
            fail(source, line, "duplicate edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ")");
        }
        if (t == stream.steps.size() + 1) stream.steps.emplace_back();
        stream.steps.back().push_back(e);
    });
    return stream;
}

EdgeStream read_edge_stream(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_edge_stream(in, path.string());
}

void write_edge_stream(const std::filesystem::path& path, const EdgeStream& stream) {
    auto out = open_output(path);
    for (std::size_t t = 0; t < stream.steps.size(); ++t)
        for (const Edge& e : stream.steps[t]) out << (t + 1) << '\t' << e.u << '\t' << e.v << '\n';
}

Tensor read_features(const std::filesystem::path& path) {
    auto in = open_input(path);
    const std::string source = path.string();
    std::vector<std::vector<double>> rows;
    std::vector<bool> filled;
    std::size_t dim = 0;
    for_each_record(in, [&](std::size_t line, const std::vector<std::string_view>& f) {
        if (f.size() != 2) fail(source, line, "expected 'node_id<TAB>f1,...,fd'");
        const auto id = parse_int<std::size_t>(f[0], source, line);
        std::vector<double> values;
        for (auto tok : split(f[1], ',')) values.push_back(parse_double(tok, source, line));
        if (dim == 0) dim = values.size();
        if (values.size() != dim) {
            fail(source, line, "feature dimension " + std::to_string(values.size()) +
                                   " differs from " + std::to_string(dim));
        }
        if (id >= rows.size()) {
            rows.resize(id + 1);
            filled.resize(id + 1, false);
        }
        if (filled[id]) fail(source, line, "node " + std::to_string(id) + " listed twice");
        rows[id] = std::move(values);
        filled[id] = true;
    });
    for (std::size_t i = 0; i < filled.size(); ++i) {
        if (!filled[i]) throw IngestionError(kModule, source + ": node " + std::to_string(i) + " has no features");
    }
    Tensor out(rows.size(), dim);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(rows[i].begin(), rows[i].end(), out.row_span(i).begin());
    return out;
}

void write_features(const std::filesystem::path& path, const Tensor& features) {
    auto out = open_output(path);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        out << i << '\t';
        for (std::size_t c = 0; c < features.cols(); ++c) {
            if (c) out << ',';
            out << format_double(features(i, c));
        }
        out << '\n';
    }
}

std::vector<int> read_labels(const std::filesystem::path& path, std::size_t num_nodes) {
    auto in = open_input(path);
    const std::string source = path.string();
    std::vector<int> labels(num_nodes, -1);
    for_each_record(in, [&](std::size_t line, const std::vector<std::string_view>& f) {
        if (f.size() != 2) fail(source, line, "expected 'node_id<TAB>class_id'");
        const auto id = parse_int<std::size_t>(f[0], source, line);
        const int cls = parse_int<int>(f[1], source, line);
        if (id >= num_nodes) fail(source, line, "node " + std::to_string(id) + " has no feature row");
        if (cls < 0) fail(source, line, "class ids must be non-negative");
        if (labels[id] != -1) fail(source, line, "node " + std::to_string(id) + " labeled twice");
        labels[id] = cls;
    });
    return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
    auto out = open_output(path);
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0) out << i << '\t' << labels[i] << '\n';
}

std::vector<Delta> to_deltas(const EdgeStream& stream) {
    std::vector<Delta> deltas(stream.steps.size());
    std::unordered_set<NodeId> seen;
    for (std::size_t t = 0; t < stream.steps.size(); ++t) {
        for (const Edge& e : stream.steps[t]) {
            for (NodeId v : {e.u, e.v})
                if (seen.insert(v).second) deltas[t].new_nodes.push_back(v);
        }
        std::sort(deltas[t].new_nodes.begin(), deltas[t].new_nodes.end());
        deltas[t].new_edges = stream.steps[t];
    }
    return deltas;
}

}  // namespace tiger
