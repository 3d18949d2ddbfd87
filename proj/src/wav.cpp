#include "cyclevc/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "cyclevc/error.hpp"
#include "cyclevc/feature_file.hpp"

namespace cyclevc {
namespace {

void put(std::vector<unsigned char>& out, std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get(const unsigned char* p, int bytes) {
    std::uint32_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

} // namespace

std::vector<unsigned char> encode_wav(const Waveform& wav) {
    const auto n = static_cast<std::uint32_t>(wav.samples.size());
    std::vector<unsigned char> out;
    out.reserve(44 + 2 * n);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put(out, 36 + 2 * n, 4);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put(out, 16, 4);
    put(out, 1, 2);  // PCM
    put(out, 1, 2);  // mono
    put(out, static_cast<std::uint32_t>(wav.sample_rate), 4);
    put(out, static_cast<std::uint32_t>(wav.sample_rate) * 2, 4);
    put(out, 2, 2);
    put(out, 16, 2);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put(out, 2 * n, 4);
    for (double s : wav.samples) {
        const double clipped = std::clamp(s, -1.0, 1.0);
        const auto q = static_cast<std::int16_t>(std::lround(clipped * 32767.0));
        put(out, static_cast<std::uint16_t>(q), 2);
    }
    return out;
}

Waveform decode_wav(const std::vector<unsigned char>& b) {
    if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
        throw FormatError("not a RIFF/WAVE file");
    std::size_t pos = 12;
    int channels = 0, bits = 0, rate = 0, format = 0;
    bool have_fmt = false;
    while (pos + 8 <= b.size()) {
        const std::uint32_t size = get(&b[pos + 4], 4);
        const std::size_t body = pos + 8;
        if (body + size > b.size()) throw FormatError("wav: truncated chunk");
        if (std::memcmp(&b[pos], "fmt ", 4) == 0) {
            if (size < 16) throw FormatError("wav: short fmt chunk");
            format = static_cast<int>(get(&b[body], 2));
            channels = static_cast<int>(get(&b[body + 2], 2));
            rate = static_cast<int>(get(&b[body + 4], 4));
            bits = static_cast<int>(get(&b[body + 14], 2));
            have_fmt = true;
        } else if (std::memcmp(&b[pos], "data", 4) == 0) {
            if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
            if (format != 1 || bits != 16 || channels != 1)
                throw FormatError("wav: only 16-bit PCM mono is supported");
            Waveform w;
            w.sample_rate = rate;
            w.samples.resize(size / 2);
            for (std::size_t i = 0; i < w.samples.size(); ++i) {
                const auto v = static_cast<std::int16_t>(get(&b[body + 2 * i], 2));
                w.samples[i] = v / 32767.0;
            }
            return w;
        }
        pos = body + size + (size & 1u);
    }
    throw FormatError("wav: no data chunk");
}

Waveform read_wav(const std::filesystem::path& path) {
    try {
        return decode_wav(read_file_bytes(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_wav(const Waveform& wav, const std::filesystem::path& path) {
    write_file_bytes(path, encode_wav(wav));
}

} // namespace cyclevc
