#ifndef CYCLEVC_FEATURES_HPP
#define CYCLEVC_FEATURES_HPP

#include <span>
#include <string>

#include <Eigen/Dense>

namespace cyclevc {

inline constexpr int kSampleRate = 24000;
inline constexpr int kFrameShiftUs = 5000;
inline constexpr int kFrameShiftSamples = kSampleRate / 1000 * kFrameShiftUs / 1000;

// Full frame layout: [mcep(45) | lf0 | uv | cap(3)].
inline constexpr int kMcepDim = 45;
inline constexpr int kCapDim = 3;
inline constexpr int kFullDim = 50;
inline constexpr int kLf0Index = 45;
inline constexpr int kUvIndex = 46;
inline constexpr int kCapOffset = 47;
inline constexpr int kProsodyDim = kFullDim - kMcepDim;

using Index = Eigen::Index;

// Acoustic features of one utterance. Rows are frames at a 5 ms shift.
//
// mcep  n x 45 mel-cepstrum, column 0 is the energy term
// lf0   natural-log F0, interpolated through unvoiced frames
// uv    1 for voiced frames, 0 otherwise
// cap   n x 3 coded band aperiodicity (dB)
struct UtteranceFeatures {
    std::string utt_id;
    Eigen::MatrixXf mcep;
    Eigen::VectorXf lf0;
    Eigen::VectorXf uv;
    Eigen::MatrixXf cap;

    UtteranceFeatures() = default;
    UtteranceFeatures(std::string id, Eigen::MatrixXf mcep, Eigen::VectorXf lf0,
                      Eigen::VectorXf uv, Eigen::MatrixXf cap);

    // Builds from an n x 50 matrix in full-frame order.
    static UtteranceFeatures from_full(std::string id, const Eigen::MatrixXf& full);

    Index n_frames() const { return mcep.rows(); }

    // n x 50 in full-frame order.
    Eigen::MatrixXf full() const;

    // Copy with a replaced mcep block; prosodic dims are kept verbatim.
    UtteranceFeatures with_mcep(const Eigen::MatrixXf& new_mcep) const;

    // First n frames.
    UtteranceFeatures head(Index n) const;

    // Throws InputError on shape mismatch, non-binary uv or non-finite values.
    void validate() const;
};

enum class Domain { source, target };

const char* to_string(Domain d);
Domain domain_from_string(const std::string& s);

inline constexpr float kStdFloor = 1e-6f;

// Per-dimension statistics over the 50 full-frame dims.
struct NormStats {
    Eigen::VectorXf mean;
    Eigen::VectorXf std;
    Domain domain = Domain::source;

    // mean 0, std 1
    static NormStats identity(Domain d);
};

NormStats compute_norm_stats(std::span<const UtteranceFeatures> set, Domain domain);

// n x 50, (x - mean) / std per dimension.
Eigen::MatrixXf normalize(const UtteranceFeatures& feat, const NormStats& stats);

// Inverse of normalize restricted to the mcep block (n x 45 in, n x 45 out).
Eigen::MatrixXf denormalize(const Eigen::MatrixXf& mcep_norm, const NormStats& stats);

// Normalized mcep of feat (n x 45).
Eigen::MatrixXf normalize_mcep(const UtteranceFeatures& feat, const NormStats& stats);

} // namespace cyclevc

#endif
