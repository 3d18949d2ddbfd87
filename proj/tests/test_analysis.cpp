#include <doctest.h>

#include <numbers>

#include "cyclevc/analysis.hpp"
#include "cyclevc/error.hpp"
#include "cyclevc/fixture.hpp"
#include "support.hpp"

using namespace cyclevc;

namespace {

std::vector<double> sawtooth(double seconds, double hz, double amp = 0.4) {
    const auto n = static_cast<std::size_t>(seconds * kSampleRate);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double phase = std::fmod(hz * static_cast<double>(i) / kSampleRate, 1.0);
        x[i] = amp * (2.0 * phase - 1.0);
    }
    return x;
}

double max_normalized_autocorrelation(const std::vector<double>& x, int min_lag, int max_lag) {
    double r0 = 0.0;
    for (double v : x) r0 += v * v;
    double best = 0.0;
    for (int lag = min_lag; lag <= max_lag; ++lag) {
        double r = 0.0;
        for (std::size_t i = static_cast<std::size_t>(lag); i < x.size(); ++i) r += x[i] * x[i - lag];
        best = std::max(best, r / r0);
    }
    return best;
}

} // namespace

TEST_SUITE("analysis") {

TEST_CASE("frame count is floor(duration / 5 ms) + 1") {
    CHECK(frame_count(1) == 1);
    CHECK(frame_count(119) == 1);
    CHECK(frame_count(120) == 2);
    CHECK(frame_count(24000) == 201);
    CHECK(frame_count(4 * 24000) == 801);
    for (Index n : {1, 2, 7, 801}) {
        const auto len = synthesis_length(n);
        CHECK(std::abs(static_cast<long>(len) - static_cast<long>(n * kFrameShiftSamples)) <= kFrameShiftSamples);
    }
}

TEST_CASE("one second of digital silence") {
    const std::vector<double> silence(kSampleRate, 0.0);
    const auto f = analyze(silence, kSampleRate, "sil");
    CHECK(f.n_frames() == 201);
    CHECK(f.uv.isZero(0.0));
    CHECK(f.mcep.rightCols(kMcepDim - 1).cwiseAbs().maxCoeff() < 1e-6f);
    // all unvoiced: lf0 is the constant log(120)
    CHECK((f.lf0.array() == static_cast<float>(std::log(120.0))).all());
    CHECK(f.cap.isZero(0.0));
}

TEST_CASE("sawtooth at 100 Hz is voiced with F0 within 3 Hz") {
    const auto x = sawtooth(0.5, 100.0);
    const auto f = analyze(x, kSampleRate, "saw");
    CHECK(f.n_frames() == 101);
    int checked = 0;
    // interior frames, clear of the analysis window at both edges
    for (Index t = 10; t < f.n_frames() - 10; ++t) {
        CHECK(f.uv(t) == 1.0f);
        CHECK(std::abs(std::exp(static_cast<double>(f.lf0(t))) - 100.0) <= 3.0);
        ++checked;
    }
    CHECK(checked > 70);
}

TEST_CASE("four second utterance yields 801 frames") {
    const auto w = synthesize_formant_utterance(4.0, 11);
    CHECK(w.samples.size() == 4u * kSampleRate);
    const auto f = analyze(w.samples, kSampleRate, "four");
    CHECK(f.n_frames() == 801);
    f.validate();
}

TEST_CASE("lf0 interpolation rule") {
    const auto lf0 = interpolate_lf0({0.0, 100.0, 0.0, 0.0, 200.0, 0.0});
    const double a = std::log(100.0), b = std::log(200.0);
    CHECK(lf0(0) == doctest::Approx(a));
    CHECK(lf0(1) == doctest::Approx(a));
    CHECK(lf0(2) == doctest::Approx(a + (b - a) / 3).epsilon(1e-6));
    CHECK(lf0(3) == doctest::Approx(a + 2 * (b - a) / 3).epsilon(1e-6));
    CHECK(lf0(5) == doctest::Approx(b));
    const auto none = interpolate_lf0({0.0, 0.0});
    CHECK(none(0) == doctest::Approx(std::log(120.0)));
}

TEST_CASE("precondition errors") {
    const std::vector<double> x(1000, 0.1);
    CHECK_THROWS_AS(analyze(x, 16000), ConfigError);
    try {
        analyze(x, 16000);
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("unsupported fs") != std::string::npos);
    }
    CHECK_THROWS_AS(analyze(std::vector<double>{}, kSampleRate), InputError);
    const auto one = analyze(std::vector<double>{0.2}, kSampleRate);
    CHECK(one.n_frames() == 1);
}

TEST_CASE("synthesis of a single frame") {
    Random rng(2);
    const auto f = test::random_features("one", 1, rng);
    const auto y = synthesize(f, kSampleRate);
    CHECK(y.size() <= 2u * kFrameShiftSamples);
    for (double v : y) CHECK(std::isfinite(v));
}

TEST_CASE("all-unvoiced features give noise-only excitation") {
    const Index n = 200;
    Eigen::MatrixXf mcep = Eigen::MatrixXf::Zero(n, kMcepDim);
    mcep.col(0).setConstant(-3.0f);
    UtteranceFeatures f("noise", mcep, Eigen::VectorXf::Constant(n, std::log(150.0f)), Eigen::VectorXf::Zero(n),
                        Eigen::MatrixXf::Zero(n, kCapDim));
    const auto y = synthesize(f, kSampleRate);
    CHECK(y.size() == synthesis_length(n));
    // no periodicity anywhere in the 60-400 Hz range
    CHECK(max_normalized_autocorrelation(y, kSampleRate / 400, kSampleRate / 60) < 0.1);
    const auto again = analyze(y, kSampleRate);
    CHECK(again.uv.sum() < 0.05f * static_cast<float>(again.n_frames()));
}

TEST_CASE("synthesis is deterministic and the round trip stays close") {
    const auto w = synthesize_formant_utterance(1.6, 5);
    const auto f = analyze(w.samples, kSampleRate, "rt");
    CHECK(synthesize(f, kSampleRate) == synthesize(f, kSampleRate));
    const auto rt = test::resynthesis_round_trip(w.samples);
    CHECK(rt.voiced_frames > 100);
    CHECK(rt.voiced_mcd < 1.5);
}

TEST_CASE("mcep conversion inverts on smooth envelopes") {
    SourceFilterAnalyzer a;
    const int bins = a.config().fft_size / 2 + 1;
    Eigen::VectorXd power(bins);
    for (int k = 0; k < bins; ++k) {
        const double w = std::numbers::pi * k / (bins - 1);
        power(k) = std::exp(1.0 + 0.8 * std::cos(w) - 0.3 * std::cos(3 * w));
    }
    const Eigen::VectorXd back = a.mcep_to_sp(a.sp_to_mcep(power));
    CHECK(((back.array().log() - power.array().log()).abs().maxCoeff()) < 1e-3);
}

}
