#ifndef CYCLEVC_TTSIM_HPP
#define CYCLEVC_TTSIM_HPP

#include <cstdint>

#include "cyclevc/features.hpp"

namespace cyclevc {

// Knobs of the low-cost TTS stand-in. Identity settings: window 1,
// variance_scale 1, lf0 window 1, noise 0.
struct DegradeConfig {
    int smooth_window = 9;         // odd, frames
    double variance_scale = 0.6;   // gamma in [0, 1]
    int lf0_smooth_window = 5;     // odd, frames
    double noise_std = 0.05;
    std::uint64_t seed = 7;

    void validate() const;
};

// Turns natural features into synthetic-like ones: temporal smoothing of
// all mcep dims, shrinkage of dims 1-44 toward their utterance mean, seeded
// Gaussian noise on dims 1-44, lf0 smoothing. uv, cap and length are kept.
// The noise stream depends on seed and utt_id.
UtteranceFeatures degrade(const UtteranceFeatures& y, const DegradeConfig& cfg);

// Centered moving average with edge replication (n x d, over rows).
Eigen::MatrixXd moving_average(const Eigen::MatrixXd& x, int window);

} // namespace cyclevc

#endif
