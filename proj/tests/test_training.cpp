#include <doctest.h>

#include "cyclevc/checkpoint.hpp"
#include "cyclevc/error.hpp"
#include "cyclevc/feature_file.hpp"
#include "cyclevc/training.hpp"
#include "cyclevc/ttsim.hpp"
#include "support.hpp"

using namespace cyclevc;

namespace {

std::vector<PairedUtterance> simulated_pairs(int count, Index frames, std::uint64_t seed) {
    Random rng(seed);
    std::vector<PairedUtterance> pairs;
    DegradeConfig dc;
    for (int i = 0; i < count; ++i) {
        const std::string id = "p" + std::to_string(100 + i);
        auto y = test::random_features(id, frames, rng);
        // temporally smooth targets, so the degradation is learnable
        y.mcep = moving_average(y.mcep.cast<double>(), 5).cast<float>();
        pairs.push_back({id, degrade(y, dc), y});
    }
    return pairs;
}

TrainConfig small_config() {
    TrainConfig c;
    c.arch.in_channels = 8;
    c.arch.gru_hidden = 8;
    c.arch.out_channels = 8;
    c.learning_rate = 1e-3;
    return c;
}

} // namespace

TEST_SUITE("training") {

TEST_CASE("pairing trims small length differences and rejects large ones") {
    Random rng(1);
    const auto a = test::random_features("x", 801, rng);
    const auto b = test::random_features("x", 800, rng);
    PairingReport report;
    const auto same = make_pair("same", b, b, &report);
    CHECK(report.trims.empty());
    CHECK(same.src.n_frames() == 800);

    const auto p = make_pair("u1", a, b, &report);
    CHECK(p.src.n_frames() == 800);
    CHECK(p.tgt.n_frames() == 800);
    CHECK(p.src.mcep == a.mcep.topRows(800));
    REQUIRE(report.trims.size() == 1);
    CHECK(report.trims[0].utt_id == "u1");
    CHECK(report.trims[0].src_frames == 801);
    CHECK(report.trims[0].kept == 800);
    CHECK(report.to_string().find("u1") != std::string::npos);

    const auto short_one = test::random_features("x", 700, rng);
    try {
        make_pair("u2", a, short_one);
        FAIL("expected a pairing error");
    } catch (const PairingError& e) {
        CHECK(std::string(e.what()).find("temporal mismatch") != std::string::npos);
        CHECK(std::string(e.what()).find("u2") != std::string::npos);
    }
}

TEST_CASE("pair_dataset reads a manifest") {
    Random rng(2);
    const auto dir = test::scratch_dir("pairing");
    write_features(test::random_features("a", 20, rng), dir / "nat_a.cvf");
    write_features(test::random_features("a", 21, rng), dir / "syn_a.cvf");
    write_features(test::random_features("b", 10, rng), dir / "nat_b.cvf");
    write_features(test::random_features("b", 10, rng), dir / "syn_b.cvf");
    write_manifest({{"a", "nat_a.cvf", "syn_a.cvf"}, {"b", "nat_b.cvf", "syn_b.cvf"}}, dir / "m.tsv");
    const auto ds = pair_dataset(dir / "m.tsv");
    REQUIRE(ds.pairs.size() == 2);
    CHECK(ds.pairs[0].utt_id == "a");
    CHECK(ds.pairs[0].src.n_frames() == 20);
    CHECK(ds.report.trims.size() == 1);

    write_features(test::random_features("c", 30, rng), dir / "syn_c.cvf");
    write_manifest({{"c", "nat_b.cvf", "syn_c.cvf"}}, dir / "bad.tsv");
    CHECK_THROWS_AS(pair_dataset(dir / "bad.tsv"), PairingError);
}

TEST_CASE("config validation") {
    TrainConfig c;
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.rho = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(train({}, TrainConfig{}), InputError);
}

TEST_CASE("single-pair overfit drives stot_l1 below 10 percent") {
    Random rng(3);
    const auto y = test::random_features("one", 20, rng);
    // unrelated source, so the target has to be memorized
    const auto x = test::random_features("one", 20, rng);
    const std::vector<PairedUtterance> pairs = {{"one", x, y}};
    TrainConfig c = small_config();
    c.arch.in_channels = c.arch.gru_hidden = c.arch.out_channels = 32;
    c.epochs = 200;
    c.learning_rate = 1e-2;
    const auto r = train(pairs, c);
    REQUIRE(r.curve.size() == 200);
    CHECK(r.curve.back().stot_l1 < 0.1f * r.curve.front().stot_l1);
}

TEST_CASE("training improves, uses training stats only, and is deterministic") {
    const auto pairs = simulated_pairs(10, 40, 4);
    TrainConfig c = small_config();
    c.seed = 7;
    const auto a = train(pairs, c);
    const auto b = train(pairs, c);
    REQUIRE(a.curve.size() == 15);
    for (const auto& e : a.curve) CHECK(std::isfinite(e.total));
    CHECK(a.curve.back().stot_l1 < a.curve.front().stot_l1);
    CHECK(encode_model(a.model) == encode_model(b.model));
    CHECK(loss_curve_tsv(a.curve) == loss_curve_tsv(b.curve));

    std::vector<UtteranceFeatures> src, tgt;
    for (const auto& p : pairs) {
        src.push_back(p.src);
        tgt.push_back(p.tgt);
    }
    CHECK(a.model.norm_src.mean == compute_norm_stats(src, Domain::source).mean);
    CHECK(a.model.norm_tgt.std == compute_norm_stats(tgt, Domain::target).std);

    // input order does not matter, the seed does
    auto reversed = pairs;
    std::reverse(reversed.begin(), reversed.end());
    CHECK(encode_model(train(reversed, c).model) == encode_model(a.model));
    c.seed = 8;
    CHECK(encode_model(train(pairs, c).model) != encode_model(a.model));
}

TEST_CASE("loss curve TSV") {
    std::vector<LossBreakdown<float>> curve(2);
    curve[0] = {1.5f, 0.25f, 1.5f, 1e-8f};
    curve[1] = {1.0f, 0.5f, 1.0f, 1e-8f};
    const std::string tsv = loss_curve_tsv(curve);
    CHECK(tsv.rfind("1\t1.5\t0.25\t1.5\n", 0) == 0);
    CHECK(tsv.find("\n2\t1\t0.5\t1\n") != std::string::npos);
}

TEST_CASE("divergence aborts with the epoch and utterance") {
    const auto pairs = simulated_pairs(2, 10, 5);
    TrainConfig c = small_config();
    c.optimizer = OptimizerKind::sgd;
    c.learning_rate = 1e38;
    try {
        train(pairs, c);
        FAIL("expected a training error");
    } catch (const TrainingError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("epoch") != std::string::npos);
        CHECK(msg.find("'p10") != std::string::npos);
    }
}

TEST_CASE("checkpoint round trip is bit-exact") {
    Random rng(6);
    const auto m = CycleVCModel<float>::initialized(small_config().arch, test::random_stats(Domain::source, rng),
                                                    test::random_stats(Domain::target, rng), 9);
    const auto dir = test::scratch_dir("checkpoint");
    save_model(m, dir / "m.ckpt");
    const auto back = load_model(dir / "m.ckpt");
    CHECK(back.arch == m.arch);
    const auto ta = m.theta.tensors(), tb = back.theta.tensors();
    for (std::size_t k = 0; k < ta.size(); ++k) CHECK(*ta[k] == *tb[k]);
    const auto pa = m.phi.tensors(), pb = back.phi.tensors();
    for (std::size_t k = 0; k < pa.size(); ++k) CHECK(*pa[k] == *pb[k]);
    CHECK(back.norm_src.mean == m.norm_src.mean);
    CHECK(back.norm_tgt.std == m.norm_tgt.std);
    CHECK(back.norm_tgt.domain == Domain::target);
    CHECK(encode_model(back) == read_file_bytes(dir / "m.ckpt"));
    const Eigen::MatrixXf probe = test::random_sequence(5, rng).cast<float>();
    CHECK(stot_forward(back, probe) == stot_forward(m, probe));
    CHECK(cycle_path(back, probe) == cycle_path(m, probe));
}

TEST_CASE("checkpoint errors") {
    Random rng(7);
    const auto m = CycleVCModel<float>::initialized(small_config().arch, NormStats::identity(Domain::source),
                                                    NormStats::identity(Domain::target), 1);
    const auto bytes = encode_model(m);
    const std::size_t expected = static_cast<std::size_t>(2 * m.theta.parameter_count()) * 4;

    auto truncated = bytes;
    truncated.resize(truncated.size() - 8);
    try {
        decode_model(truncated);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(std::to_string(expected - 8) + " bytes") != std::string::npos);
        CHECK(msg.find("expected " + std::to_string(expected)) != std::string::npos);
    }

    std::string text(bytes.begin(), bytes.end());
    auto replaced = text;
    replaced.replace(replaced.find("gru_hidden=8"), 12, "gru_hidden=9");
    CHECK_THROWS_AS(decode_model({replaced.begin(), replaced.end()}), FormatError);

    auto magic = text;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_model({magic.begin(), magic.end()}), FormatError);

    auto missing = text;
    missing.erase(missing.find("norm_src_mean="), 1);
    CHECK_THROWS_AS(decode_model({missing.begin(), missing.end()}), FormatError);
}

}
