#include "cyclevc/fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "cyclevc/features.hpp"
#include "cyclevc/random.hpp"

namespace cyclevc {
namespace {

constexpr double kPi = std::numbers::pi;

struct Vowel {
    std::array<double, 4> formant;
    std::array<double, 4> bandwidth;
};

// Rough adult formant targets (Hz).
constexpr std::array<Vowel, 6> kVowels = {{
    {{730, 1090, 2440, 3400}, {90, 110, 170, 250}},  // a
    {{270, 2290, 3010, 3700}, {60, 100, 150, 250}},  // i
    {{300, 870, 2240, 3400}, {60, 90, 150, 250}},    // u
    {{530, 1840, 2480, 3500}, {70, 100, 160, 250}},  // e
    {{570, 840, 2410, 3400}, {80, 90, 160, 250}},    // o
    {{640, 1190, 2390, 3450}, {80, 100, 160, 250}},  // schwa-ish
}};

enum class PhoneKind { vowel, fricative, pause };

struct Phone {
    PhoneKind kind;
    int vowel;
    double seconds;
    double fric_center;
};

// Two-pole digital resonator with per-sample coefficients.
class Resonator {
public:
    double step(double x, double freq, double bw, double fs) {
        const double c = -std::exp(-2.0 * kPi * bw / fs);
        const double b = 2.0 * std::exp(-kPi * bw / fs) * std::cos(2.0 * kPi * freq / fs);
        const double a = 1.0 - b - c;
        const double y = a * x + b * y1_ + c * y2_;
        y2_ = y1_;
        y1_ = y;
        return y;
    }

private:
    double y1_ = 0.0, y2_ = 0.0;
};

} // namespace

Waveform synthesize_formant_utterance(double seconds, std::uint64_t seed) {
    const double fs = kSampleRate;
    Random rng(seed);
    const auto length = static_cast<std::size_t>(seconds * fs);

    std::vector<Phone> phones;
    phones.push_back({PhoneKind::pause, 0, rng.uniform(0.08, 0.15), 0});
    double total = phones.back().seconds;
    while (total < seconds - 0.1) {
        const double r = rng.uniform();
        Phone p{PhoneKind::vowel, static_cast<int>(rng.index(kVowels.size())), rng.uniform(0.09, 0.22), 0};
        if (r < 0.18) p = {PhoneKind::fricative, 0, rng.uniform(0.06, 0.13), rng.uniform(3800, 6500)};
        else if (r < 0.25) p = {PhoneKind::pause, 0, rng.uniform(0.05, 0.12), 0};
        phones.push_back(p);
        total += p.seconds;
    }

    // per-sample targets
    std::vector<std::array<double, 4>> formant(length), bandwidth(length);
    std::vector<double> voice_gain(length), fric_gain(length), fric_center(length);
    {
        std::size_t i = 0;
        for (const auto& p : phones) {
            const auto end = std::min(length, i + static_cast<std::size_t>(p.seconds * fs));
            const Vowel& v = kVowels[static_cast<std::size_t>(p.vowel)];
            for (; i < end; ++i) {
                formant[i] = v.formant;
                bandwidth[i] = v.bandwidth;
                voice_gain[i] = p.kind == PhoneKind::vowel ? 1.0 : 0.0;
                fric_gain[i] = p.kind == PhoneKind::fricative ? 0.5 : 0.0;
                fric_center[i] = p.kind == PhoneKind::fricative ? p.fric_center : 5000.0;
            }
            if (end == length) break;
        }
        for (; i < length; ++i) {
            formant[i] = kVowels[5].formant;
            bandwidth[i] = kVowels[5].bandwidth;
            voice_gain[i] = fric_gain[i] = 0.0;
            fric_center[i] = 5000.0;
        }
    }
    // smooth trajectories (coarticulation) with one-pole filters, forward
    // and backward for zero lag
    auto smooth = [&](auto& track, double tau_s) {
        const double a = std::exp(-1.0 / (tau_s * fs));
        for (int pass = 0; pass < 2; ++pass) {
            auto prev = pass == 0 ? track.front() : track.back();
            for (std::size_t k = 0; k < length; ++k) {
                const std::size_t i = pass == 0 ? k : length - 1 - k;
                if constexpr (std::is_same_v<std::decay_t<decltype(prev)>, double>) {
                    prev = a * prev + (1.0 - a) * track[i];
                } else {
                    for (std::size_t j = 0; j < prev.size(); ++j) prev[j] = a * prev[j] + (1.0 - a) * track[i][j];
                }
                track[i] = prev;
            }
        }
    };
    smooth(formant, 0.020);
    smooth(bandwidth, 0.020);
    smooth(voice_gain, 0.008);
    smooth(fric_gain, 0.006);
    smooth(fric_center, 0.010);

    const double base_f0 = rng.uniform(95.0, 210.0);
    const double accent_rate = rng.uniform(1.2, 3.0);
    const double accent_phase = rng.uniform(0.0, 2.0 * kPi);
    const double accent_depth = rng.uniform(0.06, 0.16);

    std::array<Resonator, 4> tract;
    Resonator frication, frication2;
    double phase = 1.0;
    double glottal1 = 0.0, glottal2 = 0.0, prev_glottal = 0.0;
    std::vector<double> out(length);
    for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double f0 = base_f0 * (1.0 - 0.12 * t / seconds) *
                          (1.0 + accent_depth * std::sin(2.0 * kPi * accent_rate * t + accent_phase));
        phase += f0 / fs;
        double pulse = 0.0;
        if (phase >= 1.0) {
            phase -= 1.0;
            pulse = std::sqrt(fs / f0);
        }
        // glottal shaping (two leaky integrators) and lip radiation
        glottal1 = 0.97 * glottal1 + pulse;
        glottal2 = 0.97 * glottal2 + glottal1;
        const double radiated = glottal2 - prev_glottal;
        prev_glottal = glottal2;
        double voiced = voice_gain[i] * (0.03 * radiated + 0.002 * rng.normal());
        for (std::size_t j = 0; j < tract.size(); ++j)
            voiced = tract[j].step(voiced, formant[i][j], bandwidth[i][j], fs);

        double fric = fric_gain[i] * rng.normal();
        fric = frication.step(fric, fric_center[i], 1200.0, fs);
        fric = frication2.step(fric, fric_center[i] * 1.3, 1800.0, fs);
        out[i] = voiced + 0.3 * fric + 1e-5 * rng.normal();
    }

    const double peak = std::max(1e-9, std::abs(*std::max_element(out.begin(), out.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    })));
    for (double& s : out) s *= 0.5 / peak;
    return {std::move(out), kSampleRate};
}

std::vector<FixtureUtterance> make_fixture(const FixtureConfig& cfg) {
    Random rng(cfg.seed);
    std::vector<FixtureUtterance> out;
    for (int i = 0; i < cfg.count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "utt%03d", i + 1);
        const double seconds = rng.uniform(cfg.min_seconds, cfg.max_seconds);
        const std::uint64_t seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(i);
        out.push_back({id, synthesize_formant_utterance(seconds, seed)});
    }
    return out;
}

std::vector<std::filesystem::path> write_fixture(const FixtureConfig& cfg,
                                                 const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    for (const auto& u : make_fixture(cfg)) {
        paths.push_back(dir / (u.utt_id + ".wav"));
        write_wav(u.wav, paths.back());
    }
    return paths;
}

} // namespace cyclevc
