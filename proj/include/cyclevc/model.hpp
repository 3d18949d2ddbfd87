#ifndef CYCLEVC_MODEL_HPP
#define CYCLEVC_MODEL_HPP

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "cyclevc/features.hpp"
#include "cyclevc/network.hpp"

namespace cyclevc {

// Cycle conversion model: f (source -> target, "StoT", parameters theta)
// and g (target -> source, "TtoS", parameters phi), together with the
// normalization statistics of both domains.
//
// Sequences handed to the free functions below are n x 50 matrices (frames
// as rows) already normalized with the matching domain statistics. Outputs
// are n x 45 normalized mcep in the output domain.
template <typename Scalar>
struct CycleVCModel {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Architecture arch;
    Network<Scalar> theta;
    Network<Scalar> phi;
    NormStats norm_src = NormStats::identity(Domain::source);
    NormStats norm_tgt = NormStats::identity(Domain::target);

    static CycleVCModel initialized(const Architecture& arch, NormStats src, NormStats tgt,
                                    std::uint64_t seed) {
        Random rng(seed);
        CycleVCModel m{arch, Network<Scalar>::initialized(arch, rng),
                       Network<Scalar>::initialized(arch, rng), std::move(src), std::move(tgt)};
        return m;
    }

    static CycleVCModel zeros(const Architecture& arch, NormStats src, NormStats tgt) {
        return {arch, Network<Scalar>::zeros(arch), Network<Scalar>::zeros(arch), std::move(src),
                std::move(tgt)};
    }

    // Skip map taking x normalized with `from` to the same raw mcep
    // normalized with `to`.
    static SkipMap<Scalar> skip_between(const NormStats& from, const NormStats& to) {
        SkipMap<Scalar> s;
        s.scale.resize(kMcepDim);
        s.shift.resize(kMcepDim);
        for (int d = 0; d < kMcepDim; ++d) {
            if (from.mean(d) == to.mean(d) && from.std(d) == to.std(d)) {
                s.scale(d) = Scalar(1);
                s.shift(d) = Scalar(0);
            } else {
                s.scale(d) = static_cast<Scalar>(from.std(d)) / static_cast<Scalar>(to.std(d));
                s.shift(d) = (static_cast<Scalar>(from.mean(d)) - static_cast<Scalar>(to.mean(d))) /
                             static_cast<Scalar>(to.std(d));
            }
        }
        return s;
    }

    SkipMap<Scalar> stot_skip() const { return skip_between(norm_src, norm_tgt); }
    SkipMap<Scalar> ttos_skip() const { return skip_between(norm_tgt, norm_src); }

    // Freezes f and g to the identity map on raw mcep (residual models only).
    void make_identity() {
        theta.zero_output_layer();
        phi.zero_output_layer();
    }

    bool all_finite() const { return theta.all_finite() && phi.all_finite(); }

    template <typename Other>
    CycleVCModel<Other> cast() const {
        return {arch, theta.template cast<Other>(), phi.template cast<Other>(), norm_src, norm_tgt};
    }
};

namespace detail {

template <typename Scalar>
void check_sequence(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& seq,
                    const Architecture& arch, const char* what) {
    if (seq.cols() != arch.in_dim)
        throw ShapeError(std::string(what) + " has " + std::to_string(seq.cols()) +
                         " dims per frame, expected " + std::to_string(arch.in_dim));
    if (seq.rows() < 1) throw ShapeError(std::string(what) + " has no frames");
}

} // namespace detail

// f(X): source-normalized full frames -> target-normalized mcep.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> stot_forward(
    const CycleVCModel<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x) {
    detail::check_sequence(x, model.arch, "stot input");
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Matrix xt = x.transpose();
    return network_forward(model.theta, model.arch, model.stot_skip(), xt).transpose();
}

// g(Y): target-normalized full frames -> source-normalized mcep.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ttos_forward(
    const CycleVCModel<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y) {
    detail::check_sequence(y, model.arch, "ttos input");
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Matrix yt = y.transpose();
    return network_forward(model.phi, model.arch, model.ttos_skip(), yt).transpose();
}

// Input of f on the cycle path: g's mcep (source-normalized) followed by
// y's own lf0 / uv / cap re-normalized into the source domain.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> splice_prosody(
    const CycleVCModel<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& g_mcep,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Index od = model.arch.out_dim;
    const Index pd = model.arch.in_dim - od;
    if (g_mcep.rows() != y.rows() || g_mcep.cols() != od) throw ShapeError("splice: shape mismatch");
    Matrix z(y.rows(), model.arch.in_dim);
    z.leftCols(od) = g_mcep;
    for (Index d = od; d < od + pd; ++d) {
        const auto& s = model.norm_src;
        const auto& t = model.norm_tgt;
        if (s.mean(d) == t.mean(d) && s.std(d) == t.std(d)) {
            z.col(d) = y.col(d);
        } else {
            const Scalar scale = static_cast<Scalar>(t.std(d)) / static_cast<Scalar>(s.std(d));
            const Scalar shift = (static_cast<Scalar>(t.mean(d)) - static_cast<Scalar>(s.mean(d))) /
                                 static_cast<Scalar>(s.std(d));
            z.col(d) = (y.col(d).array() * scale + shift).matrix();
        }
    }
    return z;
}

// f(g(Y)), the self-conversion path.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cycle_path(
    const CycleVCModel<Scalar>& model, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y) {
    return stot_forward(model, splice_prosody(model, ttos_forward(model, y), y));
}

} // namespace cyclevc

#endif
