#ifndef CYCLEVC_ANALYSIS_HPP
#define CYCLEVC_ANALYSIS_HPP

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cyclevc/features.hpp"

namespace cyclevc {

struct AnalysisConfig {
    double f0_floor = 60.0;
    double f0_ceil = 400.0;
    double alpha = 0.466;             // all-pass warping for 24 kHz
    int fft_size = 2048;
    double voicing_threshold = 0.2;   // cumulative-mean-normalized difference
    double silence_db = -45.0;        // frame rms relative to loudest frame
    double unvoiced_f0 = 500.0;       // envelope analysis rate for unvoiced frames
    std::uint64_t noise_seed = 0x5eedULL;
};

// Frames produced for a waveform of n_samples at 24 kHz: floor(duration_ms / 5) + 1.
Index frame_count(std::size_t n_samples);

// Waveform length produced by synthesis for n_frames.
std::size_t synthesis_length(Index n_frames);

// Interface for a spectral-envelope / F0 / aperiodicity analyzer and the
// matching synthesizer.
class Analyzer {
public:
    virtual ~Analyzer() = default;
    virtual std::string name() const = 0;
    virtual UtteranceFeatures analyze(std::span<const double> waveform, int fs,
                                      std::string utt_id = {}) const = 0;
    virtual std::vector<double> synthesize(const UtteranceFeatures& feat, int fs) const = 0;
};

// Pitch-adaptive source-filter analyzer: YIN-style F0, pitch-synchronous
// smoothed envelope converted to a 45-dim mel-cepstrum, band periodicity
// from lag-T0 autocorrelation. Synthesis is pulse + noise excitation through
// minimum-phase responses of the envelope.
class SourceFilterAnalyzer final : public Analyzer {
public:
    explicit SourceFilterAnalyzer(AnalysisConfig cfg = {});

    std::string name() const override { return "source-filter"; }
    UtteranceFeatures analyze(std::span<const double> waveform, int fs,
                              std::string utt_id = {}) const override;
    std::vector<double> synthesize(const UtteranceFeatures& feat, int fs) const override;

    const AnalysisConfig& config() const { return cfg_; }

    // Raw F0 track (0 for unvoiced frames).
    std::vector<double> estimate_f0(std::span<const double> x) const;

    // Power spectral envelope (fft_size/2 + 1 bins) at sample position center.
    Eigen::VectorXd envelope(std::span<const double> x, long center, double f0) const;

    // Mel-cepstrum <-> power spectrum on the analyzer's FFT grid.
    Eigen::VectorXd sp_to_mcep(const Eigen::VectorXd& power) const;
    Eigen::VectorXd mcep_to_sp(const Eigen::VectorXd& mcep) const;

    // Band codes (dB of aperiodic power fraction) for a voiced frame.
    Eigen::Vector3d band_aperiodicity(std::span<const double> x, long center, double f0) const;

    // Aperiodic power fraction per FFT bin decoded from band codes.
    Eigen::VectorXd decode_aperiodicity(const Eigen::Vector3d& codes) const;

private:
    AnalysisConfig cfg_;
    Eigen::MatrixXd to_mcep_;   // 45 x (fft/2+1)
    Eigen::MatrixXd from_mcep_; // (fft/2+1) x 45
};

const Analyzer& default_analyzer();

// Convenience wrappers over the default backend. fs must be 24000.
UtteranceFeatures analyze(std::span<const double> waveform, int fs, std::string utt_id = {});
std::vector<double> synthesize(const UtteranceFeatures& feat, int fs);

// Fills unvoiced lf0 entries by linear interpolation between voiced
// neighbours; edges take the nearest voiced value, all-unvoiced gives log(120).
Eigen::VectorXf interpolate_lf0(const std::vector<double>& f0);

// All-pass frequency warping of a normalized angular frequency in [0, pi].
double warp_frequency(double omega, double alpha);

} // namespace cyclevc

#endif
