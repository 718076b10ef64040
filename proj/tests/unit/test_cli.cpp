#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "tiger_unit_cli";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Result {
    int code = -1;
    std::string err;
    std::string out;
};

// Runs the command-line tool with stdout and stderr captured to files.
Result run(const std::string& args) {
    fs::create_directories(kRoot);
    const fs::path out = kRoot / "stdout.txt";
    const fs::path err = kRoot / "stderr.txt";
    const std::string cmd = std::string("\"") + TIGER_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path fresh(const std::string& name) {
    const fs::path dir = kRoot / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path small_spec() {
    const fs::path p = kRoot / "spec.json";
    fs::create_directories(kRoot);
    std::ofstream(p) << R"({"community_sizes": [15, 15], "p_in": 0.15, "p_out": 0.01, "steps": 4,
                           "feature_dim": 4, "seed": 3, "noise_ratio": 0.3})";
    return p;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string purify_args(const fs::path& data, const fs::path& out, const std::string& extra) {
    return "purify --stream " + quoted(data / "stream.tsv") + " --features " + quoted(data / "features.tsv") +
           " --labels " + quoted(data / "labels.tsv") + " --truth " + quoted(data / "noise.tsv") + " --out " +
           quoted(out) + " --hidden 8 --epochs 3 --no-timings " + extra;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate: missing spec file fails and names the path") {
    const Result r = run("generate --spec " + quoted(kRoot / "no_such_spec.json") + " --out " + quoted(kRoot / "x"));
    CHECK(r.code == 1);
    CHECK(r.err.find("no_such_spec.json") != std::string::npos);
}

TEST_CASE("generate: documented files, byte-identical on repeat") {
    const fs::path spec = small_spec();
    const fs::path a = fresh("gen_a");
    const fs::path b = fresh("gen_b");
    REQUIRE(run("generate --spec " + quoted(spec) + " --out " + quoted(a)).code == 0);
    REQUIRE(run("generate --spec " + quoted(spec) + " --out " + quoted(b)).code == 0);
    for (const char* f : {"stream.tsv", "clean_stream.tsv", "features.tsv", "labels.tsv", "noise.tsv", "config.json"}) {
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(lines(slurp(a / "labels.tsv")) == 30);
    CHECK(lines(slurp(a / "stream.tsv")) == lines(slurp(a / "clean_stream.tsv")) + lines(slurp(a / "noise.tsv")));
}

TEST_CASE("purify: outputs, determinism and ablations") {
    const fs::path data = fresh("data");
    REQUIRE(run("generate --spec " + quoted(small_spec()) + " --out " + quoted(data)).code == 0);

    const fs::path a = fresh("purify_a");
    const fs::path b = fresh("purify_b");
    const Result ra = run(purify_args(data, a, "--seed 5"));
    REQUIRE(ra.code == 0);
    REQUIRE(run(purify_args(data, b, "--seed 5")).code == 0);
    // config.json echoes the differing output directory, so it is only checked for presence.
    CHECK(fs::exists(a / "config.json"));
    for (const char* f : {"summary.csv", "removed.tsv", "reports.jsonl", "metrics.csv", "training_log.tsv"}) {
        CHECK(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(lines(slurp(a / "summary.csv")) == 5);
    CHECK(ra.out.find("purif.acc") != std::string::npos);
    CHECK(slurp(a / "config.json").find("\"seed\": 5") != std::string::npos);

    for (const char* extra : {"--no-short-term", "--no-attention", "--no-attention --no-short-term"}) {
        const fs::path dir = fresh("ablation");
        CHECK(run(purify_args(data, dir, extra)).code == 0);
        CHECK(lines(slurp(dir / "summary.csv")) == 5);
    }
    for (const char* method : {"random", "jaccard", "adamic-adar", "svd"}) {
        const fs::path dir = fresh(std::string("baseline_") + method);
        CHECK(run(purify_args(data, dir, std::string("--method ") + method)).code == 0);
        CHECK(lines(slurp(dir / "removed.tsv")) == lines(slurp(data / "noise.tsv")));
    }
}

TEST_CASE("purify: config file values are overridden by flags") {
    const fs::path data = fresh("data_cfg");
    REQUIRE(run("generate --spec " + quoted(small_spec()) + " --out " + quoted(data)).code == 0);
    const fs::path cfg = kRoot / "run.json";
    std::ofstream(cfg) << R"({"method": "jaccard", "beta": 0.3, "wp": 5})";
    const fs::path out = fresh("cfg_out");
    REQUIRE(run(purify_args(data, out, "--config " + quoted(cfg) + " --wp 20")).code == 0);
    const std::string echo = slurp(out / "config.json");
    CHECK(echo.find("\"method\": \"jaccard\"") != std::string::npos);
    CHECK(echo.find("\"beta\": 0.3") != std::string::npos);
    CHECK(echo.find("\"wp\": 20.0") != std::string::npos);
}

TEST_CASE("exit codes") {
    const fs::path data = fresh("data_codes");
    REQUIRE(run("generate --spec " + quoted(small_spec()) + " --out " + quoted(data)).code == 0);
    CHECK(run("").code == 1);
    CHECK(run("purify --bogus-flag").code == 1);
    const Result bad_method = run(purify_args(data, fresh("codes"), "--method tiara"));
    CHECK(bad_method.code == 1);
    CHECK(bad_method.err.find("tiara") != std::string::npos);
    CHECK(run(purify_args(data, fresh("codes"), "--beta 0")).code == 1);

    std::ofstream(kRoot / "broken.tsv") << "1\t0\t1\nnot an edge\n";
    const Result broken = run("purify --stream " + quoted(kRoot / "broken.tsv") + " --features " +
                              quoted(data / "features.tsv") + " --out " + quoted(fresh("codes")));
    CHECK(broken.code == 2);
    CHECK(broken.err.find("broken.tsv:2") != std::string::npos);
    CHECK(run("purify --stream " + quoted(kRoot / "absent.tsv") + " --features " + quoted(data / "features.tsv")).code ==
          2);
}

TEST_CASE("grid: 3 x 4 cells logged and ranked, single cell selected") {
    const fs::path data = fresh("data_grid");
    REQUIRE(run("generate --spec " + quoted(small_spec()) + " --out " + quoted(data)).code == 0);
    const std::string base = "grid --stream " + quoted(data / "stream.tsv") + " --features " +
                             quoted(data / "features.tsv") + " --labels " + quoted(data / "labels.tsv") +
                             " --truth " + quoted(data / "noise.tsv") + " --hidden 8 --epochs 2 --seed 1 ";
    const fs::path full = fresh("grid_full");
    const Result r = run(base + "--out " + quoted(full));
    REQUIRE(r.code == 0);
    std::size_t logged = 0;
    for (std::size_t at = r.out.find("beta="); at != std::string::npos; at = r.out.find("\nbeta=", at + 1)) ++logged;
    CHECK(logged == 12);
    CHECK(lines(slurp(full / "grid.csv")) == 13);
    CHECK(r.out.find("best: ") != std::string::npos);

    const fs::path again = fresh("grid_again");
    REQUIRE(run(base + "--out " + quoted(again)).code == 0);
    CHECK(slurp(full / "grid.csv") == slurp(again / "grid.csv"));

    const fs::path one = fresh("grid_one");
    const Result single = run(base + "--betas 0.3 --wps 5 --out " + quoted(one));
    REQUIRE(single.code == 0);
    CHECK(single.out.find("best: beta=0.3 wp=5 ") != std::string::npos);
}

}  // TEST_SUITE
