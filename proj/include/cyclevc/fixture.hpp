#ifndef CYCLEVC_FIXTURE_HPP
#define CYCLEVC_FIXTURE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cyclevc/wav.hpp"

namespace cyclevc {

// Formant-synthesized speech-like utterances (voiced vowels with moving
// formants and F0 contours, fricative noise, pauses) used as the bundled
// "natural" corpus.
struct FixtureConfig {
    int count = 20;
    double min_seconds = 1.6;
    double max_seconds = 2.4;
    std::uint64_t seed = 2020;
};

struct FixtureUtterance {
    std::string utt_id;
    Waveform wav;
};

Waveform synthesize_formant_utterance(double seconds, std::uint64_t seed);

std::vector<FixtureUtterance> make_fixture(const FixtureConfig& cfg);

// Writes <utt_id>.wav files into dir and returns their paths.
std::vector<std::filesystem::path> write_fixture(const FixtureConfig& cfg,
                                                 const std::filesystem::path& dir);

} // namespace cyclevc

#endif
