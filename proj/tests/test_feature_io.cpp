#include <doctest.h>

#include <cstring>

#include "cyclevc/error.hpp"
#include "cyclevc/feature_file.hpp"
#include "cyclevc/features.hpp"
#include "cyclevc/wav.hpp"
#include "support.hpp"

using namespace cyclevc;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

template <typename E, typename Fn>
std::string error_text(Fn&& fn) {
    try {
        fn();
    } catch (const E& e) {
        return e.what();
    }
    return "<no error>";
}

} // namespace

TEST_SUITE("feature-io") {

TEST_CASE("full frame layout keeps mcep first and prosody after it") {
    Random rng(3);
    const auto f = test::random_features("u", 4, rng);
    const Eigen::MatrixXf full = f.full();
    CHECK(full.cols() == kFullDim);
    CHECK(full.leftCols(kMcepDim) == f.mcep);
    CHECK(full.col(kLf0Index) == f.lf0);
    CHECK(full.col(kUvIndex) == f.uv);
    CHECK(full.middleCols(kCapOffset, kCapDim) == f.cap);
    const auto back = UtteranceFeatures::from_full("u", full);
    CHECK(back.full() == full);
}

TEST_CASE("construction rejects invariant violations") {
    Random rng(4);
    auto f = test::random_features("u", 3, rng);
    auto bad_uv = f.uv;
    bad_uv(1) = 0.5f;
    CHECK_THROWS_AS(UtteranceFeatures("u", f.mcep, f.lf0, bad_uv, f.cap), InputError);
    auto bad_mcep = f.mcep;
    bad_mcep(0, 3) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(UtteranceFeatures("u", bad_mcep, f.lf0, f.uv, f.cap), InputError);
    CHECK_THROWS_AS(UtteranceFeatures("u", f.mcep, f.lf0.head(2), f.uv, f.cap), ShapeError);
    CHECK_THROWS_AS(UtteranceFeatures("u", f.mcep.leftCols(44), f.lf0, f.uv, f.cap), ShapeError);
}

TEST_CASE("feature file round trip is bit-exact") {
    Random rng(5);
    const auto dir = test::scratch_dir("fio_roundtrip");
    for (Index n : {1, 2, 17, 801}) {
        auto f = test::random_features("utt" + std::to_string(n), n, rng);
        f.mcep(0, 0) = -0.0f;
        f.mcep(0, 1) = std::numeric_limits<float>::denorm_min();
        f.mcep(0, 2) = std::numeric_limits<float>::max();
        const auto path = dir / (f.utt_id + ".cvf");
        write_features(f, path);
        const auto g = read_features(path);
        CHECK(g.utt_id == f.utt_id);
        const Eigen::MatrixXf a = f.full(), b = g.full();
        REQUIRE(a.rows() == b.rows());
        CHECK(std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0);
        CHECK(encode_features(g) == read_file_bytes(path));
    }
}

TEST_CASE("feature file header layout") {
    Random rng(6);
    const auto bytes = encode_features(test::random_features("u", 3, rng));
    REQUIRE(bytes.size() == 24 + 3 * 50 * 4);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "CVF1");
    auto u32 = [&](std::size_t off) {
        return bytes[off] | (bytes[off + 1] << 8) | (bytes[off + 2] << 16) | (bytes[off + 3] << 24);
    };
    CHECK(u32(4) == 1);
    CHECK(u32(8) == 3);
    CHECK(u32(12) == 50);
    CHECK(u32(16) == 5000);
    CHECK(u32(20) == 0);
}

TEST_CASE("feature file errors are distinct and name the problem") {
    Random rng(7);
    const auto good = encode_features(test::random_features("u", 100, rng));

    auto magic = good;
    std::memcpy(magic.data(), "XXXX", 4);
    CHECK(contains(error_text<FormatError>([&] { decode_features(magic, "u"); }), "bad magic"));

    auto truncated = good;
    truncated.resize(truncated.size() - 50 * 4);
    const auto msg = error_text<FormatError>([&] { decode_features(truncated, "u"); });
    CHECK(contains(msg, "truncated body"));
    CHECK(contains(msg, "100 frames"));

    auto dims = good;
    dims[12] = 49;
    CHECK(contains(error_text<FormatError>([&] { decode_features(dims, "u"); }), "n_dims"));

    auto version = good;
    version[4] = 2;
    CHECK(contains(error_text<FormatError>([&] { decode_features(version, "u"); }), "version"));

    auto shift = good;
    shift[16] = 0;
    CHECK(contains(error_text<FormatError>([&] { decode_features(shift, "u"); }), "frame_shift_us"));

    auto header = std::vector<unsigned char>(good.begin(), good.begin() + 10);
    CHECK(contains(error_text<FormatError>([&] { decode_features(header, "u"); }), "truncated header"));

    auto trailing = good;
    trailing.push_back(0);
    CHECK(contains(error_text<FormatError>([&] { decode_features(trailing, "u"); }), "trailing"));

    auto nonbinary_uv = good;
    const float half = 0.5f;
    std::memcpy(nonbinary_uv.data() + 24 + kUvIndex * 4, &half, 4);
    CHECK(contains(error_text<FormatError>([&] { decode_features(nonbinary_uv, "u"); }), "uv"));
}

TEST_CASE("manifest paths resolve against the manifest directory") {
    const auto dir = test::scratch_dir("fio_manifest");
    write_manifest({{"a", "nat/a.cvf", "syn/a.cvf"}, {"b", "/abs/b.cvf", "syn/b.cvf"}}, dir / "m.tsv");
    const auto m = read_manifest(dir / "m.tsv");
    REQUIRE(m.size() == 2);
    CHECK(m[0].natural_path == dir / "nat/a.cvf");
    CHECK(m[0].synthetic_path == dir / "syn/a.cvf");
    CHECK(m[1].natural_path == std::filesystem::path("/abs/b.cvf"));
    write_text_file(dir / "bad.tsv", "a\tonly-two\n");
    CHECK_THROWS_AS(read_manifest(dir / "bad.tsv"), FormatError);
}

TEST_CASE("norm stats match a hand computation") {
    // Two utterances, three frames in total. Dim 0 takes values 1, 2, 6:
    // mean 3, population variance (4 + 1 + 9) / 3.
    Eigen::MatrixXf a = Eigen::MatrixXf::Constant(2, kFullDim, 5.0f);
    Eigen::MatrixXf b = Eigen::MatrixXf::Constant(1, kFullDim, 5.0f);
    a(0, 0) = 1.0f;
    a(1, 0) = 2.0f;
    b(0, 0) = 6.0f;
    a.col(kUvIndex).setOnes();
    b.col(kUvIndex).setZero();
    a(0, kLf0Index) = 4.0f;
    a(1, kLf0Index) = 5.0f;
    b(0, kLf0Index) = 6.0f;
    const std::vector<UtteranceFeatures> set = {UtteranceFeatures::from_full("a", a),
                                                UtteranceFeatures::from_full("b", b)};
    const NormStats s = compute_norm_stats(set, Domain::target);
    CHECK(s.domain == Domain::target);
    CHECK(s.mean(0) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(s.std(0) == doctest::Approx(std::sqrt(14.0 / 3.0)).epsilon(1e-6));
    CHECK(s.mean(kLf0Index) == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(s.std(kLf0Index) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-6));
    CHECK(s.mean(kUvIndex) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(s.std(kUvIndex) == doctest::Approx(std::sqrt(2.0 / 9.0)).epsilon(1e-6));
    // constant dimension: floored std, normalized value exactly 0
    CHECK(s.mean(7) == 5.0f);
    CHECK(s.std(7) == kStdFloor);
    CHECK(normalize(set[0], s).col(7).isZero(0.0));
}

TEST_CASE("normalization is invertible and standardizes each dimension") {
    Random rng(8);
    std::vector<UtteranceFeatures> set;
    for (int i = 0; i < 4; ++i) set.push_back(test::random_features("u" + std::to_string(i), 30 + i, rng));
    const NormStats s = compute_norm_stats(set, Domain::source);
    Eigen::MatrixXd all(0, kFullDim);
    for (const auto& u : set) {
        const Eigen::MatrixXf z = normalize(u, s);
        const Eigen::MatrixXf back = denormalize(z.leftCols(kMcepDim), s);
        const float scale = u.mcep.cwiseAbs().maxCoeff();
        CHECK((back - u.mcep).cwiseAbs().maxCoeff() <= 1e-6f * scale * 4);
        CHECK(normalize_mcep(u, s) == z.leftCols(kMcepDim));
        Eigen::MatrixXd grown(all.rows() + z.rows(), kFullDim);
        grown << all, z.cast<double>();
        all = grown;
    }
    for (int d = 0; d < kFullDim; ++d) {
        const double mean = all.col(d).mean();
        const double sd = std::sqrt((all.col(d).array() - mean).square().mean());
        CHECK(std::abs(mean) < 1e-5);
        CHECK(std::abs(sd - 1.0) < 1e-4);
    }
    CHECK_THROWS_AS(compute_norm_stats(std::span<const UtteranceFeatures>{}, Domain::source), InputError);
}

TEST_CASE("wav round trip at 16 bits") {
    Waveform w{{0.0, 0.5, -0.5, 0.999, -1.0}, kSampleRate};
    const Waveform back = decode_wav(encode_wav(w));
    CHECK(back.sample_rate == kSampleRate);
    REQUIRE(back.samples.size() == w.samples.size());
    for (std::size_t i = 0; i < w.samples.size(); ++i) CHECK(std::abs(back.samples[i] - w.samples[i]) <= 0.5 / 32767 + 1e-12);
    CHECK(encode_wav(back) == encode_wav(w));
    CHECK_THROWS_AS(decode_wav({'R', 'I', 'F', 'F'}), FormatError);
}

}
