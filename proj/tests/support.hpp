#ifndef CYCLEVC_TESTS_SUPPORT_HPP
#define CYCLEVC_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "cyclevc/analysis.hpp"
#include "cyclevc/eval.hpp"
#include "cyclevc/features.hpp"
#include "cyclevc/loss.hpp"
#include "cyclevc/network.hpp"
#include "cyclevc/random.hpp"

namespace cyclevc::test {

// Scratch directory under the build tree, emptied on construction.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("cyclevc_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline UtteranceFeatures random_features(const std::string& id, Index n, Random& rng) {
    Eigen::MatrixXf mcep(n, kMcepDim), cap(n, kCapDim);
    Eigen::VectorXf lf0(n), uv(n);
    for (Index t = 0; t < n; ++t) {
        for (int d = 0; d < kMcepDim; ++d) mcep(t, d) = static_cast<float>(rng.normal() * (d == 0 ? 2.0 : 0.3));
        lf0(t) = static_cast<float>(std::log(120.0) + 0.2 * rng.normal());
        uv(t) = rng.uniform() < 0.7 ? 1.0f : 0.0f;
        for (int d = 0; d < kCapDim; ++d) cap(t, d) = static_cast<float>(-20.0 * rng.uniform());
    }
    return {id, mcep, lf0, uv, cap};
}

inline Architecture tiny_arch() {
    Architecture a;
    a.in_channels = 3;
    a.gru_hidden = 4;
    a.out_channels = 3;
    return a;
}

inline NormStats random_stats(Domain d, Random& rng) {
    NormStats s = NormStats::identity(d);
    for (int i = 0; i < kFullDim; ++i) {
        s.mean(i) = static_cast<float>(0.3 * rng.normal());
        s.std(i) = static_cast<float>(0.5 + rng.uniform());
    }
    return s;
}

inline Eigen::MatrixXd random_sequence(Index n, Random& rng) {
    Eigen::MatrixXd m(n, kFullDim);
    for (Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
    return m;
}

// Tiny double-precision model with weights scaled up so the tanh and GRU
// nonlinearities are well away from their linear regime.
inline CycleVCModel<double> random_tiny_model(std::uint64_t seed, Random& rng) {
    auto m = CycleVCModel<double>::initialized(tiny_arch(), random_stats(Domain::source, rng),
                                               random_stats(Domain::target, rng), seed);
    for (auto* p : m.theta.tensors()) *p *= 3.0;
    for (auto* p : m.phi.tensors()) *p *= 3.0;
    return m;
}

struct GradCheck {
    long checked = 0;
    long failed = 0;
    long refined = 0;  // entries whose stencil straddled an L1 kink
    double worst_abs = 0.0;
};

// Signs of both L1 residuals (StoT and cycle) at the current parameters.
inline std::vector<signed char> residual_signs(const CycleVCModel<double>& m, const Eigen::MatrixXd& x,
                                               const Eigen::MatrixXd& y, bool teacher_forcing) {
    const Eigen::MatrixXd target = y.leftCols(kMcepDim).transpose();
    const Eigen::MatrixXd xt = x.transpose();
    const Eigen::MatrixXd f = network_forward(m.theta, m.arch, m.stot_skip(), xt,
                                              teacher_forcing ? &target : nullptr);
    const Eigen::MatrixXd c = cycle_path(m, y).transpose();
    std::vector<signed char> s;
    for (const Eigen::MatrixXd* r : {&f, &c})
        for (Index i = 0; i < r->size(); ++i) {
            const double v = (*r)(i) - target(i);
            s.push_back(static_cast<signed char>((v > 0) - (v < 0)));
        }
    return s;
}

// Central differences of cycle_loss(...).total against loss_gradients for
// every parameter of theta and phi. The L1 terms are not differentiable
// where a residual is zero; when a residual changes sign across the stencil
// the difference is retaken with successively smaller steps.
inline GradCheck finite_difference_check(CycleVCModel<double> m, const Eigen::MatrixXd& x,
                                         const Eigen::MatrixXd& y, double rho, bool teacher_forcing = false,
                                         double eps = 1e-4, double rel_tol = 1e-3, double abs_tol = 1e-6) {
    const auto g = loss_gradients(m, x, y, rho, teacher_forcing);
    GradCheck r;
    for (int which = 0; which < 2; ++which) {
        auto params = which ? m.phi.tensors() : m.theta.tensors();
        const auto grads = which ? g.phi.tensors() : g.theta.tensors();
        for (std::size_t k = 0; k < params.size(); ++k) {
            for (Index i = 0; i < params[k]->size(); ++i) {
                double& p = (*params[k])(i);
                const double old = p;
                double fd = 0.0;
                for (double h = eps; h >= eps * 1e-3; h /= 10) {
                    p = old + h;
                    const double lp = cycle_loss(m, x, y, rho, teacher_forcing).total;
                    const auto sp = residual_signs(m, x, y, teacher_forcing);
                    p = old - h;
                    const double lm = cycle_loss(m, x, y, rho, teacher_forcing).total;
                    const auto sm = residual_signs(m, x, y, teacher_forcing);
                    p = old;
                    fd = (lp - lm) / (2 * h);
                    if (sp == sm) break;
                    if (h == eps) ++r.refined;
                }
                const double err = std::abs(fd - (*grads[k])(i));
                ++r.checked;
                r.worst_abs = std::max(r.worst_abs, err);
                if (err > abs_tol && err > rel_tol * std::abs(fd)) ++r.failed;
            }
        }
    }
    return r;
}

struct RoundTrip {
    double voiced_mcd = 0.0;  // dB, mean over frames voiced in both analyses
    Index voiced_frames = 0;
};

// analyze -> synthesize -> analyze, compared on frames voiced in both passes.
inline RoundTrip resynthesis_round_trip(std::span<const double> wav) {
    const auto first = analyze(wav, kSampleRate, "a");
    const auto audio = synthesize(first, kSampleRate);
    const auto second = analyze(audio, kSampleRate, "b");
    RoundTrip r;
    const Index n = std::min(first.n_frames(), second.n_frames());
    double sum = 0.0;
    for (Index t = 0; t < n; ++t) {
        if (first.uv(t) != 1.0f || second.uv(t) != 1.0f) continue;
        sum += mcd_frame(first.mcep.row(t), second.mcep.row(t));
        ++r.voiced_frames;
    }
    r.voiced_mcd = r.voiced_frames ? sum / static_cast<double>(r.voiced_frames) : 0.0;
    return r;
}

} // namespace cyclevc::test

#endif
