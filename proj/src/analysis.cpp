#include "cyclevc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "cyclevc/error.hpp"
#include "cyclevc/random.hpp"

namespace cyclevc {
namespace {

using cvec = std::vector<std::complex<double>>;
constexpr double kPi = std::numbers::pi;
constexpr double kPowerFloor = 1e-12;

// CheapTrick-style lifter constants.
constexpr double kLifterQ0 = 1.18;
constexpr double kLifterQ1 = -0.09;

double sample_at(std::span<const double> x, long i) {
    return (i < 0 || i >= static_cast<long>(x.size())) ? 0.0 : x[static_cast<std::size_t>(i)];
}

Eigen::VectorXd power_spectrum(Eigen::FFT<double>& fft, const std::vector<double>& frame) {
    cvec spec;
    fft.fwd(spec, frame);
    const std::size_t half = frame.size() / 2;
    Eigen::VectorXd p(static_cast<Index>(half + 1));
    for (std::size_t k = 0; k <= half; ++k) p(static_cast<Index>(k)) = std::norm(spec[k]);
    return p;
}

// Real cepstrum (length n) of a symmetric log spectrum given on n/2+1 bins.
std::vector<double> cepstrum_of(Eigen::FFT<double>& fft, const Eigen::VectorXd& log_half, int n) {
    cvec full(static_cast<std::size_t>(n));
    for (int k = 0; k <= n / 2; ++k) full[static_cast<std::size_t>(k)] = log_half(k);
    for (int k = n / 2 + 1; k < n; ++k) full[static_cast<std::size_t>(k)] = log_half(n - k);
    std::vector<double> cep;
    fft.inv(cep, full);
    return cep;
}

// Minimum-phase spectrum whose power is `power` (n/2+1 bins).
cvec minimum_phase(Eigen::FFT<double>& fft, const Eigen::VectorXd& power, int n) {
    const Eigen::VectorXd log_amp = 0.5 * power.cwiseMax(kPowerFloor).array().log().matrix();
    std::vector<double> cep = cepstrum_of(fft, log_amp, n);
    std::vector<double> folded(static_cast<std::size_t>(n), 0.0);
    folded[0] = cep[0];
    for (int q = 1; q < n / 2; ++q) folded[static_cast<std::size_t>(q)] = 2.0 * cep[static_cast<std::size_t>(q)];
    folded[static_cast<std::size_t>(n / 2)] = cep[static_cast<std::size_t>(n / 2)];
    cvec spec;
    fft.fwd(spec, folded);
    for (auto& s : spec) s = std::exp(s);
    return spec;
}


void require_rate(int fs) {
    if (fs != kSampleRate)
        throw ConfigError("unsupported fs " + std::to_string(fs) + " (only " +
                          std::to_string(kSampleRate) + " Hz is supported)");
}

} // namespace

Index frame_count(std::size_t n_samples) {
    return static_cast<Index>(n_samples / kFrameShiftSamples) + 1;
}

std::size_t synthesis_length(Index n_frames) {
    return n_frames <= 0 ? 0 : static_cast<std::size_t>(n_frames - 1) * kFrameShiftSamples + 1;
}

double warp_frequency(double omega, double alpha) {
    return omega + 2.0 * std::atan(alpha * std::sin(omega) / (1.0 - alpha * std::cos(omega)));
}

Eigen::VectorXf interpolate_lf0(const std::vector<double>& f0) {
    const auto n = static_cast<Index>(f0.size());
    Eigen::VectorXf lf0(n);
    std::vector<Index> voiced;
    for (Index t = 0; t < n; ++t)
        if (f0[static_cast<std::size_t>(t)] > 0) voiced.push_back(t);
    if (voiced.empty()) {
        lf0.setConstant(static_cast<float>(std::log(120.0)));
        return lf0;
    }
    auto lv = [&](Index t) { return std::log(f0[static_cast<std::size_t>(t)]); };
    for (Index t = 0; t < voiced.front(); ++t) lf0(t) = static_cast<float>(lv(voiced.front()));
    for (Index t = voiced.back(); t < n; ++t) lf0(t) = static_cast<float>(lv(voiced.back()));
    for (std::size_t i = 0; i + 1 < voiced.size(); ++i) {
        const Index a = voiced[i], b = voiced[i + 1];
        const double la = lv(a), lb = lv(b);
        for (Index t = a; t < b; ++t) {
            const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
            lf0(t) = static_cast<float>((1.0 - w) * la + w * lb);
        }
    }
    return lf0;
}

SourceFilterAnalyzer::SourceFilterAnalyzer(AnalysisConfig cfg) : cfg_(cfg) {
    const int half = cfg_.fft_size / 2;
    const int grid = half;  // warped-axis resolution
    Eigen::MatrixXd interp = Eigen::MatrixXd::Zero(grid + 1, half + 1);
    for (int j = 0; j <= grid; ++j) {
        const double big_omega = kPi * j / grid;
        const double omega = std::clamp(warp_frequency(big_omega, -cfg_.alpha), 0.0, kPi);
        const double pos = omega / kPi * half;
        const int lo = std::min(static_cast<int>(std::floor(pos)), half - 1);
        const double frac = pos - lo;
        interp(j, lo) += 1.0 - frac;
        interp(j, lo + 1) += frac;
    }
    Eigen::MatrixXd cosines(kMcepDim, grid + 1);
    for (int m = 0; m < kMcepDim; ++m)
        for (int j = 0; j <= grid; ++j) {
            const double w = (j == 0 || j == grid) ? 0.5 : 1.0;
            cosines(m, j) = w * std::cos(m * kPi * j / grid) / grid;
        }
    to_mcep_ = cosines * interp;

    from_mcep_.resize(half + 1, kMcepDim);
    for (int k = 0; k <= half; ++k) {
        const double big_omega = warp_frequency(kPi * k / half, cfg_.alpha);
        from_mcep_(k, 0) = 1.0;
        for (int m = 1; m < kMcepDim; ++m) from_mcep_(k, m) = 2.0 * std::cos(m * big_omega);
    }
}

Eigen::VectorXd SourceFilterAnalyzer::sp_to_mcep(const Eigen::VectorXd& power) const {
    return to_mcep_ * (0.5 * power.cwiseMax(kPowerFloor).array().log().matrix());
}

Eigen::VectorXd SourceFilterAnalyzer::mcep_to_sp(const Eigen::VectorXd& mcep) const {
    return (2.0 * (from_mcep_ * mcep).array()).exp().matrix();
}

std::vector<double> SourceFilterAnalyzer::estimate_f0(std::span<const double> x) const {
    const int fs = kSampleRate;
    const Index n_frames = frame_count(x.size());
    const int tau_min = static_cast<int>(std::floor(fs / cfg_.f0_ceil));
    const int tau_max = static_cast<int>(std::ceil(fs / cfg_.f0_floor));
    const int width = 600;  // 25 ms integration window
    std::vector<double> f0(static_cast<std::size_t>(n_frames), 0.0);
    std::vector<double> rms(static_cast<std::size_t>(n_frames), 0.0);
    std::vector<double> score(static_cast<std::size_t>(n_frames), 1.0);

    Eigen::VectorXd seg(width + tau_max + 1);
    Eigen::VectorXd diff(tau_max + 2);
    for (Index t = 0; t < n_frames; ++t) {
        const long start = static_cast<long>(t) * kFrameShiftSamples - (width + tau_max) / 2;
        for (Index i = 0; i < seg.size(); ++i) seg(i) = sample_at(x, start + static_cast<long>(i));
        const auto base = seg.head(width);
        const double energy = base.squaredNorm();
        rms[static_cast<std::size_t>(t)] = std::sqrt(energy / width);
        if (energy <= 0.0) continue;

        diff(0) = 0.0;
        for (int tau = 1; tau <= tau_max + 1 && tau + width <= seg.size(); ++tau)
            diff(tau) = (base - seg.segment(tau, width)).squaredNorm();
        // cumulative-mean-normalized difference
        Eigen::VectorXd cmnd(tau_max + 2);
        cmnd(0) = 1.0;
        double running = 0.0;
        for (int tau = 1; tau <= tau_max + 1; ++tau) {
            running += diff(tau);
            cmnd(tau) = running > 0.0 ? diff(tau) * tau / running : 1.0;
        }
        int best = -1;
        for (int tau = tau_min; tau <= tau_max; ++tau) {
            if (cmnd(tau) < cfg_.voicing_threshold) {
                while (tau + 1 <= tau_max && cmnd(tau + 1) < cmnd(tau)) ++tau;
                best = tau;
                break;
            }
        }
        if (best < 0) {
            Index arg = 0;
            cmnd.segment(tau_min, tau_max - tau_min + 1).minCoeff(&arg);
            best = tau_min + static_cast<int>(arg);
        }
        score[static_cast<std::size_t>(t)] = cmnd(best);
        double period = best;
        if (best > 1 && best <= tau_max) {
            const double a = diff(best - 1), b = diff(best), c = diff(best + 1);
            const double denom = a - 2.0 * b + c;
            if (denom > 0.0) period += 0.5 * (a - c) / denom;
        }
        f0[static_cast<std::size_t>(t)] = fs / period;
    }

    const double loudest = *std::max_element(rms.begin(), rms.end());
    const double gate = std::max(1e-5, loudest * std::pow(10.0, cfg_.silence_db / 20.0));
    for (std::size_t t = 0; t < f0.size(); ++t) {
        const bool voiced = score[t] < cfg_.voicing_threshold && rms[t] > gate &&
                            f0[t] >= cfg_.f0_floor && f0[t] <= cfg_.f0_ceil;
        if (!voiced) f0[t] = 0.0;
    }
    return f0;
}

Eigen::VectorXd SourceFilterAnalyzer::envelope(std::span<const double> x, long center, double f0) const {
    const int n = cfg_.fft_size;
    const int half = n / 2;
    const double fs = kSampleRate;
    const long half_len = std::lround(1.5 * fs / f0);

    std::vector<double> frame(static_cast<std::size_t>(n), 0.0);
    std::vector<double> win(static_cast<std::size_t>(2 * half_len + 1));
    double wsum = 0.0, wsq = 0.0, xsum = 0.0;
    for (long i = -half_len; i <= half_len; ++i) {
        const double w = 0.5 * std::cos(kPi * i * f0 / (1.5 * fs)) + 0.5;
        win[static_cast<std::size_t>(i + half_len)] = w;
        wsum += w;
        wsq += w * w;
        xsum += w * sample_at(x, center + i);
    }
    const double dc = xsum / wsum;
    const double scale = 1.0 / std::sqrt(wsq);
    for (long i = -half_len; i <= half_len; ++i) {
        const double w = win[static_cast<std::size_t>(i + half_len)];
        frame[static_cast<std::size_t>(i + half_len)] = scale * w * (sample_at(x, center + i) - dc);
    }
    Eigen::FFT<double> fft;
    Eigen::VectorXd p = power_spectrum(fft, frame);

    const double bin_hz = fs / n;
    // fold the region below f0 back onto itself
    {
        const Eigen::VectorXd raw = p;
        for (int k = 0; k <= half && k * bin_hz < f0; ++k) {
            const double pos = (f0 - k * bin_hz) / bin_hz;
            const int lo = static_cast<int>(std::floor(pos));
            const double frac = pos - lo;
            p(k) += (1.0 - frac) * raw(std::min(lo, half)) + frac * raw(std::min(lo + 1, half));
        }
    }

    // rectangular smoothing of width 2 f0 / 3 via the cumulative integral of
    // a mirror-extended spectrum
    const double width_bins = 2.0 * f0 / 3.0 / bin_hz;
    const int pad = static_cast<int>(std::ceil(width_bins)) + 2;
    const int ext = half + 1 + 2 * pad;
    Eigen::VectorXd cum(ext + 1);
    cum(0) = 0.0;
    for (int e = 0; e < ext; ++e) {
        int k = e - pad;
        if (k < 0) k = -k;
        if (k > half) k = 2 * half - k;
        cum(e + 1) = cum(e) + p(k);
    }
    // cum(e) integrates bins [-pad, e - pad) treating bin k as [k - 1/2, k + 1/2)
    auto integral_to = [&](double f) {
        const double pos = f + pad + 0.5;
        const int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, ext - 1);
        const double frac = pos - lo;
        return cum(lo) + frac * (cum(lo + 1) - cum(lo));
    };
    Eigen::VectorXd smooth(half + 1);
    for (int k = 0; k <= half; ++k)
        smooth(k) = (integral_to(k + width_bins / 2) - integral_to(k - width_bins / 2)) / width_bins;
    smooth = smooth.cwiseMax(kPowerFloor);

    // cepstral smoothing with spectral recovery
    std::vector<double> cep = cepstrum_of(fft, smooth.array().log().matrix(), n);
    for (int q = 0; q < n; ++q) {
        const int quef = q <= half ? q : n - q;
        const double xq = f0 * quef / fs;
        const double sinc = quef == 0 ? 1.0 : std::sin(kPi * xq) / (kPi * xq);
        const double recovery = kLifterQ0 + 2.0 * kLifterQ1 * std::cos(2.0 * kPi * xq);
        cep[static_cast<std::size_t>(q)] *= sinc * recovery;
    }
    cvec spec;
    fft.fwd(spec, cep);
    Eigen::VectorXd env(half + 1);
    for (int k = 0; k <= half; ++k) env(k) = std::exp(spec[static_cast<std::size_t>(k)].real());
    return env;
}

Eigen::Vector3d SourceFilterAnalyzer::band_aperiodicity(std::span<const double> x, long center,
                                                        double f0) const {
    const double fs = kSampleRate;
    const double period = fs / f0;
    const long half_len = std::lround(3.0 * period);
    const int n = 4096;

    std::vector<double> frame(static_cast<std::size_t>(n), 0.0);
    std::vector<double> win(static_cast<std::size_t>(2 * half_len + 1));
    for (long i = -half_len; i <= half_len; ++i) {
        const double w = 0.5 + 0.5 * std::cos(kPi * i / (half_len + 1));
        win[static_cast<std::size_t>(i + half_len)] = w;
        frame[static_cast<std::size_t>(i + half_len)] = w * sample_at(x, center + i);
    }
    // window self-similarity at the pitch lag
    auto window_corr = [&](long lag) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < win.size(); ++i) {
            den += win[i] * win[i];
            if (i + static_cast<std::size_t>(lag) < win.size()) num += win[i] * win[i + static_cast<std::size_t>(lag)];
        }
        return num / den;
    };
    const long lag_lo = static_cast<long>(std::floor(period));
    const double lag_frac = period - lag_lo;
    const double wcorr = (1.0 - lag_frac) * window_corr(lag_lo) + lag_frac * window_corr(lag_lo + 1);

    Eigen::FFT<double> fft;
    const Eigen::VectorXd p = power_spectrum(fft, frame);
    Eigen::Vector3d codes;
    for (int b = 0; b < 3; ++b) {
        const double lo_hz = 1500.0 + 3000.0 * b, hi_hz = lo_hz + 3000.0;
        double num = 0.0, den = 0.0;
        for (int k = static_cast<int>(std::ceil(lo_hz * n / fs)); k * fs / n < hi_hz; ++k) {
            num += p(k) * std::cos(2.0 * kPi * k * period / n);
            den += p(k);
        }
        double periodicity = den > 0.0 ? num / den / wcorr : 0.0;
        periodicity = std::clamp(periodicity, 0.0, 1.0);
        codes(b) = std::clamp(10.0 * std::log10(std::max(1.0 - periodicity, 1e-6)), -60.0, 0.0);
    }
    return codes;
}

Eigen::VectorXd SourceFilterAnalyzer::decode_aperiodicity(const Eigen::Vector3d& codes) const {
    const int half = cfg_.fft_size / 2;
    const double nyquist = kSampleRate / 2.0;
    const double axis[5] = {0.0, 3000.0, 6000.0, 9000.0, nyquist};
    const double value[5] = {-60.0, codes(0), codes(1), codes(2), 0.0};
    Eigen::VectorXd ap(half + 1);
    for (int k = 0; k <= half; ++k) {
        const double f = nyquist * k / half;
        int seg = 0;
        while (seg < 3 && f > axis[seg + 1]) ++seg;
        const double w = (f - axis[seg]) / (axis[seg + 1] - axis[seg]);
        ap(k) = std::pow(10.0, ((1.0 - w) * value[seg] + w * value[seg + 1]) / 10.0);
    }
    return ap;
}

UtteranceFeatures SourceFilterAnalyzer::analyze(std::span<const double> x, int fs,
                                                std::string utt_id) const {
    require_rate(fs);
    if (x.empty()) throw InputError("cannot analyze an empty waveform");
    const Index n = frame_count(x.size());
    const std::vector<double> f0 = estimate_f0(x);

    Eigen::MatrixXf mcep(n, kMcepDim);
    Eigen::VectorXf uv(n);
    Eigen::MatrixXf cap(n, kCapDim);
    for (Index t = 0; t < n; ++t) {
        const double f = f0[static_cast<std::size_t>(t)];
        const bool voiced = f > 0.0;
        const long center = static_cast<long>(t) * kFrameShiftSamples;
        const Eigen::VectorXd env = envelope(x, center, voiced ? f : cfg_.unvoiced_f0);
        mcep.row(t) = sp_to_mcep(env).cast<float>().transpose();
        uv(t) = voiced ? 1.0f : 0.0f;
        if (voiced)
            cap.row(t) = band_aperiodicity(x, center, f).cast<float>().transpose();
        else
            cap.row(t).setZero();
    }
    Eigen::VectorXf lf0 = interpolate_lf0(f0);
    // voiced frames carry the raw estimate
    for (Index t = 0; t < n; ++t)
        if (uv(t) == 1.0f) lf0(t) = static_cast<float>(std::log(f0[static_cast<std::size_t>(t)]));
    return UtteranceFeatures(std::move(utt_id), std::move(mcep), std::move(lf0), std::move(uv),
                             std::move(cap));
}

std::vector<double> SourceFilterAnalyzer::synthesize(const UtteranceFeatures& feat, int fs) const {
    require_rate(fs);
    feat.validate();
    const Index n_frames = feat.n_frames();
    const std::size_t length = synthesis_length(n_frames);
    std::vector<double> out(length, 0.0);
    if (length == 0) return out;

    const int n = cfg_.fft_size;
    const int half = n / 2;
    Eigen::FFT<double> fft;

    // per-frame responses
    std::vector<std::vector<double>> periodic(static_cast<std::size_t>(n_frames));
    std::vector<cvec> noise_filter(static_cast<std::size_t>(n_frames));
    for (Index t = 0; t < n_frames; ++t) {
        const Eigen::VectorXd sp = mcep_to_sp(feat.mcep.row(t).transpose().cast<double>());
        const bool voiced = feat.uv(t) == 1.0f;
        const Eigen::VectorXd ap =
            voiced ? decode_aperiodicity(feat.cap.row(t).transpose().cast<double>())
                   : Eigen::VectorXd::Ones(half + 1);
        noise_filter[static_cast<std::size_t>(t)] =
            minimum_phase(fft, sp.cwiseProduct(ap), n);
        if (voiced) {
            const cvec h = minimum_phase(fft, sp.cwiseProduct((1.0 - ap.array()).matrix()), n);
            fft.inv(periodic[static_cast<std::size_t>(t)], h);
        }
    }

    auto frame_of = [&](double pos) {
        return std::clamp<Index>(static_cast<Index>(std::lround(pos / kFrameShiftSamples)), 0,
                                 n_frames - 1);
    };
    auto f0_at = [&](double pos) {
        const double fpos = pos / kFrameShiftSamples;
        const Index lo = std::clamp<Index>(static_cast<Index>(std::floor(fpos)), 0, n_frames - 1);
        const Index hi = std::min<Index>(lo + 1, n_frames - 1);
        const double w = std::clamp(fpos - static_cast<double>(lo), 0.0, 1.0);
        return std::exp((1.0 - w) * feat.lf0(lo) + w * feat.lf0(hi));
    };

    Random noise(cfg_.noise_seed);
    std::vector<double> excitation(static_cast<std::size_t>(n));
    cvec spec;
    std::vector<double> response;
    double pos = 0.0;
    while (pos < static_cast<double>(length)) {
        const Index t = frame_of(pos);
        const bool voiced = feat.uv(t) == 1.0f;
        const double period = kSampleRate / (voiced ? f0_at(pos) : cfg_.unvoiced_f0);
        const auto start = static_cast<std::size_t>(std::lround(pos));
        const auto seg = static_cast<std::size_t>(std::max(1L, std::lround(period)));

        std::fill(excitation.begin(), excitation.end(), 0.0);
        for (std::size_t i = 0; i < seg && i < excitation.size(); ++i) excitation[i] = noise.normal();
        fft.fwd(spec, excitation);
        const cvec& h = noise_filter[static_cast<std::size_t>(t)];
        for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= h[k];
        fft.inv(response, spec);
        for (std::size_t i = 0; i < response.size() && start + i < length; ++i) out[start + i] += response[i];

        if (voiced) {
            const auto& p = periodic[static_cast<std::size_t>(t)];
            const double gain = std::sqrt(period);
            for (std::size_t i = 0; i < p.size() && start + i < length; ++i) out[start + i] += gain * p[i];
        }
        pos += period;
    }
    return out;
}

const Analyzer& default_analyzer() {
    static const SourceFilterAnalyzer analyzer;
    return analyzer;
}

UtteranceFeatures analyze(std::span<const double> waveform, int fs, std::string utt_id) {
    return default_analyzer().analyze(waveform, fs, std::move(utt_id));
}

std::vector<double> synthesize(const UtteranceFeatures& feat, int fs) {
    return default_analyzer().synthesize(feat, fs);
}

} // namespace cyclevc
