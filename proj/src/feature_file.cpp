#include "cyclevc/feature_file.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cyclevc/error.hpp"

namespace cyclevc {
namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void expect_field(const char* field, std::uint32_t got, std::uint32_t want) {
    if (got != want)
        throw FormatError(std::string("feature file field '") + field + "' is " +
                          std::to_string(got) + ", expected " + std::to_string(want));
}

} // namespace

std::vector<unsigned char> encode_features(const UtteranceFeatures& feat) {
    feat.validate();
    const Eigen::MatrixXf full = feat.full();
    std::vector<unsigned char> out;
    out.reserve(kFeatureHeaderBytes + static_cast<std::size_t>(full.size()) * 4);
    out.insert(out.end(), kFeatureMagic, kFeatureMagic + 4);
    put_u32(out, kFeatureVersion);
    put_u32(out, static_cast<std::uint32_t>(full.rows()));
    put_u32(out, kFullDim);
    put_u32(out, kFrameShiftUs);
    put_u32(out, 0);
    for (Index t = 0; t < full.rows(); ++t)
        for (Index d = 0; d < kFullDim; ++d) put_u32(out, std::bit_cast<std::uint32_t>(full(t, d)));
    return out;
}

UtteranceFeatures decode_features(const std::vector<unsigned char>& bytes, std::string utt_id) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kFeatureMagic, 4) != 0)
        throw FormatError("feature file: bad magic");
    if (bytes.size() < kFeatureHeaderBytes) throw FormatError("feature file: truncated header");
    const unsigned char* p = bytes.data();
    expect_field("version", get_u32(p + 4), kFeatureVersion);
    const std::uint32_t n_frames = get_u32(p + 8);
    expect_field("n_dims", get_u32(p + 12), kFullDim);
    expect_field("frame_shift_us", get_u32(p + 16), kFrameShiftUs);
    expect_field("reserved", get_u32(p + 20), 0);

    const std::size_t body = static_cast<std::size_t>(n_frames) * kFullDim * 4;
    const std::size_t have = bytes.size() - kFeatureHeaderBytes;
    if (have < body)
        throw FormatError("feature file: truncated body, header declares " +
                          std::to_string(n_frames) + " frames (" + std::to_string(body) +
                          " bytes) but body has " + std::to_string(have) + " bytes");
    if (have > body)
        throw FormatError("feature file: " + std::to_string(have - body) +
                          " trailing bytes after n_frames body");

    Eigen::MatrixXf full(n_frames, kFullDim);
    const unsigned char* q = p + kFeatureHeaderBytes;
    for (Index t = 0; t < full.rows(); ++t)
        for (Index d = 0; d < kFullDim; ++d, q += 4) full(t, d) = std::bit_cast<float>(get_u32(q));
    try {
        return UtteranceFeatures::from_full(std::move(utt_id), full);
    } catch (const Error& e) {
        throw FormatError(std::string("feature file: ") + e.what());
    }
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("write failed for '" + path.string() + "'");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    write_file_bytes(path, std::vector<unsigned char>(text.begin(), text.end()));
}

void write_features(const UtteranceFeatures& feat, const std::filesystem::path& path) {
    write_file_bytes(path, encode_features(feat));
}

UtteranceFeatures read_features(const std::filesystem::path& path) {
    try {
        return decode_features(read_file_bytes(path), path.stem().string());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::vector<UtteranceFeatures> read_feature_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw InputError("'" + dir.string() + "' is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".cvf")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<UtteranceFeatures> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(read_features(f));
    return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest '" + path.string() + "'");
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    std::vector<ManifestEntry> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, '\t')) fields.push_back(field);
        if (fields.size() != 3)
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 3 tab-separated fields");
        out.push_back({fields[0], resolve(fields[1]), resolve(fields[2])});
    }
    return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
    std::string text;
    for (const auto& e : entries)
        text += e.utt_id + "\t" + e.natural_path.string() + "\t" + e.synthetic_path.string() + "\n";
    write_text_file(path, text);
}

} // namespace cyclevc
