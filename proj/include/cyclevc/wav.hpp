#ifndef CYCLEVC_WAV_HPP
#define CYCLEVC_WAV_HPP

#include <filesystem>
#include <vector>

namespace cyclevc {

struct Waveform {
    std::vector<double> samples;  // [-1, 1]
    int sample_rate = 0;
};

// 16-bit PCM mono RIFF/WAVE only.
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const Waveform& wav, const std::filesystem::path& path);

std::vector<unsigned char> encode_wav(const Waveform& wav);
Waveform decode_wav(const std::vector<unsigned char>& bytes);

} // namespace cyclevc

#endif
