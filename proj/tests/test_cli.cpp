#include <doctest.h>

#include <sstream>

#include "cli.hpp"
#include "cyclevc/end_to_end.hpp"
#include "cyclevc/error.hpp"
#include "cyclevc/feature_file.hpp"
#include "cyclevc/run_config.hpp"
#include "support.hpp"

using namespace cyclevc;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "cyclevc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

bool has(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

// Small, fast settings shared by the CLI flows below.
const std::vector<std::string> kFast = {"--set", "in_channels=4",        "--set", "gru_hidden=4",
                                        "--set", "out_channels=4",       "--set", "fixture_count=5",
                                        "--set", "fixture_min_seconds=0.3", "--set", "fixture_max_seconds=0.4"};

std::vector<std::string> with_fast(std::vector<std::string> args) {
    args.insert(args.end(), kFast.begin(), kFast.end());
    return args;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("run config defaults, overrides and echo") {
    RunConfig c;
    CHECK(c.get_int("epochs") == 15);
    CHECK(c.get_double("rho") == 1e-8);
    CHECK(c.get_int("fs") == 24000);
    CHECK(c.get_double("train_fraction") == 0.8);
    CHECK(c.get_int("smooth_window") == 9);
    CHECK(c.train_config().arch == Architecture{});
    CHECK(c.train_config().adam_eps == TrainConfig{}.adam_eps);
    CHECK(c.degrade_config().variance_scale == DegradeConfig{}.variance_scale);
    CHECK(c.analysis_config().alpha == AnalysisConfig{}.alpha);
    CHECK(c.analysis_config().noise_seed == AnalysisConfig{}.noise_seed);
    CHECK(c.fixture_config().count == FixtureConfig{}.count);

    c.load_text("# comment\nepochs = 3  # trailing\n\nrho=0.5\n");
    CHECK(c.get_int("epochs") == 3);
    CHECK(c.get("rho") == "0.5");
    c.assign("teacher_forcing=yes");
    CHECK(c.get_bool("teacher_forcing"));

    RunConfig d;
    d.load_text(c.echo());
    CHECK(d.echo() == c.echo());

    CHECK_THROWS_AS(c.set("bogus", "1"), ConfigError);
    CHECK_THROWS_AS(c.set("epochs", "three"), ConfigError);
    CHECK_THROWS_AS(c.set("rho", "nan"), ConfigError);
    CHECK_THROWS_AS(c.assign("epochs"), ConfigError);
    try {
        c.load_text("epochs=2\nunknown_key=4\n", "cfg");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(has(e.what(), "unknown_key"));
        CHECK(has(e.what(), "cfg:2"));
    }
    c.set("smooth_window", "4");
    CHECK_THROWS_AS(c.degrade_config(), ConfigError);
}

TEST_CASE("exit codes and usage errors") {
    const auto dir = test::scratch_dir("cli_codes");
    auto r = cli_run({"extract", "--fs", "16000", "--out", (dir / "x").string()});
    CHECK(r.code == 1);
    CHECK(has(r.err, "unsupported fs"));

    r = cli_run({"extract", "--bogus-flag", "--out", (dir / "x").string()});
    CHECK(r.code == 1);
    CHECK(has(r.err, "--bogus-flag"));

    r = cli_run({"train", "--manifest", "m.tsv", "--set", "not_a_key=1", "--out", (dir / "y").string()});
    CHECK(r.code == 1);
    CHECK(has(r.err, "not_a_key"));

    r = cli_run({"frobnicate"});
    CHECK(r.code == 1);
    CHECK(has(r.err, "frobnicate"));

    r = cli_run({"train", "--manifest", (dir / "missing.tsv").string(), "--out", (dir / "z").string()});
    CHECK(r.code == 1);
    CHECK(fs::exists(dir / "z" / "run.log"));

    r = cli_run({"--help"});
    CHECK(r.code == 0);
}

TEST_CASE("run --dry-run prints the plan and touches nothing") {
    const auto dir = test::scratch_dir("cli_dry");
    const auto r = cli_run({"run", "--dry-run", "--out", (dir / "out").string()});
    CHECK(r.code == 0);
    CHECK(has(r.out, "plan fixture"));
    CHECK(has(r.out, "plan train"));
    CHECK(has(r.out, "plan report"));
    CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("subcommands chain through the whole pipeline") {
    const auto dir = test::scratch_dir("cli_chain");
    auto path = [&](const char* p) { return (dir / p).string(); };
    auto ok = [](const CliResult& r) {
        INFO(r.err);
        CHECK(r.code == 0);
    };
    ok(cli_run(with_fast({"fixture", "--out", path("corpus")})));
    ok(cli_run(with_fast({"extract", "--wav", path("corpus"), "--out", path("nat")})));
    CHECK(read_feature_dir(dir / "nat").size() == 5);
    ok(cli_run(with_fast({"simulate", "--natural", path("nat"), "--out", path("sim")})));
    CHECK(read_manifest(dir / "sim" / "manifest.tsv").size() == 5);
    ok(cli_run(with_fast({"train", "--manifest", path("sim/manifest.tsv"), "--epochs", "2", "--rho", "1e-8",
                          "--seed", "7", "--out", path("run")})));
    CHECK(fs::exists(dir / "run" / "model.ckpt"));
    CHECK(read_file_bytes(dir / "run" / "loss.tsv").size() > 0);
    const auto log = read_file_bytes(dir / "run" / "run.log");
    const std::string log_text(log.begin(), log.end());
    CHECK(has(log_text, "epochs = 2"));
    CHECK(has(log_text, "seed = 7"));
    CHECK(has(log_text, "gru_hidden = 4"));

    ok(cli_run({"pseudo", "--model", path("run/model.ckpt"), "--features", path("nat"), "--out", path("pseudo")}));
    ok(cli_run({"enhance", "--model", path("run/model.ckpt"), "--features", path("sim/synthetic"), "--out",
                path("enh")}));
    ok(cli_run({"plane", "--n", path("nat"), "--s", path("sim/synthetic"), "--p", path("pseudo"), "--e",
                path("enh"), "--out", path("fig")}));
    CHECK(fs::exists(dir / "fig" / "plane.tsv"));
    CHECK(fs::exists(dir / "fig" / "plane.svg"));
    ok(cli_run({"mcd", "--a", path("nat"), "--b", path("pseudo"), "--out", path("mcd")}));
    CHECK(fs::exists(dir / "mcd" / "mcd.txt"));
    ok(cli_run({"synth", "--features", path("enh"), "--out", path("wav")}));
    CHECK(fs::exists(dir / "wav" / "utt001.wav"));
    ok(cli_run({"scenario", "--scenario", "all", "--natural", path("nat"), "--synthetic", path("sim/synthetic"),
                "--pseudo", path("pseudo"), "--enhanced", path("enh"), "--out", path("scen")}));
    CHECK(fs::exists(dir / "scen" / "NPF" / "manifest.tsv"));

    // inputs are never modified
    const auto before = read_file_bytes(dir / "nat" / "utt001.cvf");
    ok(cli_run({"mcd", "--a", path("nat"), "--b", path("nat"), "--out", path("mcd2")}));
    CHECK(read_file_bytes(dir / "nat" / "utt001.cvf") == before);

    auto r = cli_run({"scenario", "--scenario", "NPF", "--natural", path("nat"), "--out", path("scen2")});
    CHECK(r.code == 1);
    CHECK(has(r.err, "NPF"));
}

TEST_CASE("end-to-end run names the failing stage") {
    const auto dir = test::scratch_dir("e2e_stage");
    EndToEndOptions opts;
    opts.corpus = dir / "no_such_corpus";
    opts.out = dir / "out";
    try {
        run_end_to_end(opts);
        FAIL("expected a stage error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "extract");
        CHECK(has(e.what(), "extract"));
    }
}

TEST_CASE("small end-to-end run is reproducible") {
    const auto dir = test::scratch_dir("e2e_small");
    auto run_once = [&](const char* name) {
        return cli_run(with_fast({"run", "--set", "epochs=2", "--out", (dir / name).string()}));
    };
    const auto a = run_once("a"), b = run_once("b");
    INFO(a.err);
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    for (const char* f : {"report.txt", "model/model.ckpt", "model/loss.tsv", "plane/plane.tsv", "plane/plane.svg",
                          "pseudo/utt001.cvf", "scenarios/NPF/manifest.tsv"})
        CHECK(read_file_bytes(dir / "a" / f) == read_file_bytes(dir / "b" / f));
    const auto report = read_file_bytes(dir / "a" / "report.txt");
    const std::string text(report.begin(), report.end());
    CHECK(has(text, "dist(S,N)"));
    CHECK(has(text, "dist(E,P)"));
    CHECK(has(text, "result "));
    CHECK(fs::exists(dir / "a" / "run.log"));
}

}
