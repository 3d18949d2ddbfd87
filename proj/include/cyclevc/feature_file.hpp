#ifndef CYCLEVC_FEATURE_FILE_HPP
#define CYCLEVC_FEATURE_FILE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cyclevc/features.hpp"

namespace cyclevc {

// Binary feature file, little-endian:
//
//   "CVF1"  u32 version=1  u32 n_frames  u32 n_dims=50  u32 frame_shift_us=5000
//   u32 reserved=0  then n_frames x 50 float32, row-major, full-frame order.
inline constexpr char kFeatureMagic[4] = {'C', 'V', 'F', '1'};
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 24;

std::vector<unsigned char> encode_features(const UtteranceFeatures& feat);
UtteranceFeatures decode_features(const std::vector<unsigned char>& bytes, std::string utt_id);

void write_features(const UtteranceFeatures& feat, const std::filesystem::path& path);

// utt_id is taken from the file stem.
UtteranceFeatures read_features(const std::filesystem::path& path);

// Reads every *.cvf file in dir, sorted by utt_id.
std::vector<UtteranceFeatures> read_feature_dir(const std::filesystem::path& dir);

struct ManifestEntry {
    std::string utt_id;
    std::filesystem::path natural_path;
    std::filesystem::path synthetic_path;
};

// "utt_id<TAB>natural_path<TAB>synthetic_path" per line. Relative paths are
// resolved against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace cyclevc

#endif
