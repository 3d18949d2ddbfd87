#ifndef CYCLEVC_EVAL_HPP
#define CYCLEVC_EVAL_HPP

#include <cmath>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cyclevc/error.hpp"
#include "cyclevc/features.hpp"

namespace cyclevc {

// 10 * sqrt(2) / ln(10)
inline const double kMcdScale = 10.0 * std::numbers::sqrt2 / std::numbers::ln10;

// Mel-cepstral distortion (dB) between two 45-dim frames over dims 1-44.
template <typename DerivedA, typename DerivedB>
double mcd_frame(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != kMcepDim || b.size() != kMcepDim)
        throw ShapeError("mcd_frame expects 45-dim frames, got " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
    double sum = 0.0;
    for (Index d = 1; d < kMcepDim; ++d) {
        const double diff = static_cast<double>(a(d)) - static_cast<double>(b(d));
        sum += diff * diff;
    }
    return kMcdScale * std::sqrt(sum);
}

// Frame-mean MCD between two n x 45 mcep matrices of equal length.
double mcd_utterance(const Eigen::MatrixXf& a, const Eigen::MatrixXf& b);

// Frame mean per utterance, then mean over utterances. Utterances are
// matched by utt_id; lengths may differ by at most 2 frames (trimmed).
double mcd_set(std::span<const UtteranceFeatures> a, std::span<const UtteranceFeatures> b);

struct MCDPlaneResult {
    std::vector<std::string> labels;
    Eigen::MatrixXd dist;    // mean MCD (dB), symmetric, zero diagonal
    Eigen::MatrixXd coords;  // labels x 2, centered
    double stress = 0.0;

    double distance(const std::string& a, const std::string& b) const;
};

// Embeds a labeled distance matrix in the plane.
MCDPlaneResult plane_from_distances(std::vector<std::string> labels, const Eigen::MatrixXd& dist);

// Natural, synthetic, pseudo-converted and enhanced feature sets.
MCDPlaneResult mcd_plane(std::span<const UtteranceFeatures> natural,
                         std::span<const UtteranceFeatures> synthetic,
                         std::span<const UtteranceFeatures> pseudo,
                         std::span<const UtteranceFeatures> enhanced);

std::string plane_tsv(const MCDPlaneResult& result);
std::string plane_svg(const MCDPlaneResult& result);
void emit_plane(const MCDPlaneResult& result, const std::filesystem::path& svg_path,
                const std::filesystem::path& tsv_path);

} // namespace cyclevc

#endif
