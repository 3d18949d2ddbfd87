#include "cyclevc/ttsim.hpp"

#include <algorithm>

#include "cyclevc/error.hpp"
#include "cyclevc/random.hpp"

namespace cyclevc {
namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

void DegradeConfig::validate() const {
    if (smooth_window < 1 || smooth_window % 2 == 0)
        throw ConfigError("smooth_window must be an odd count >= 1");
    if (lf0_smooth_window < 1 || lf0_smooth_window % 2 == 0)
        throw ConfigError("lf0_smooth_window must be an odd count >= 1");
    if (!(variance_scale >= 0.0 && variance_scale <= 1.0))
        throw ConfigError("variance_scale must lie in [0, 1]");
    if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
}

Eigen::MatrixXd moving_average(const Eigen::MatrixXd& x, int window) {
    if (window == 1) return x;
    const Index n = x.rows();
    const Index half = window / 2;
    Eigen::MatrixXd out(n, x.cols());
    for (Index t = 0; t < n; ++t) {
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(x.cols());
        for (Index k = t - half; k <= t + half; ++k) acc += x.row(std::clamp<Index>(k, 0, n - 1));
        out.row(t) = acc / static_cast<double>(window);
    }
    return out;
}

UtteranceFeatures degrade(const UtteranceFeatures& y, const DegradeConfig& cfg) {
    cfg.validate();
    y.validate();
    UtteranceFeatures out = y;
    const Index n = y.n_frames();
    if (n == 0) return out;

    Eigen::MatrixXd mcep = moving_average(y.mcep.cast<double>(), cfg.smooth_window);
    if (cfg.variance_scale != 1.0) {
        auto body = mcep.rightCols(kMcepDim - 1);
        const Eigen::RowVectorXd mean = body.colwise().mean();
        if (cfg.variance_scale == 0.0)
            body.rowwise() = mean;
        else
            body = (cfg.variance_scale * (body.rowwise() - mean)).rowwise() + mean;
    }
    if (cfg.noise_std > 0.0) {
        Random rng(cfg.seed ^ fnv1a(y.utt_id));
        for (Index t = 0; t < n; ++t)
            for (Index d = 1; d < kMcepDim; ++d) mcep(t, d) += cfg.noise_std * rng.normal();
    }
    if (cfg.smooth_window != 1 || cfg.variance_scale != 1.0 || cfg.noise_std > 0.0)
        out.mcep = mcep.cast<float>();
    if (cfg.lf0_smooth_window != 1)
        out.lf0 = moving_average(y.lf0.cast<double>(), cfg.lf0_smooth_window).cast<float>();
    out.validate();
    return out;
}

} // namespace cyclevc
