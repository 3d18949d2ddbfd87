#ifndef CYCLEVC_LOSS_HPP
#define CYCLEVC_LOSS_HPP

#include <Eigen/Dense>

#include "cyclevc/model.hpp"

namespace cyclevc {

inline constexpr double kDefaultRho = 1e-8;

template <typename Scalar>
struct LossBreakdown {
    Scalar stot_l1 = 0;   // mean |f(X) - Y|
    Scalar cycle_l1 = 0;  // mean |f(g(Y)) - Y|
    Scalar total = 0;     // stot_l1 + rho * cycle_l1
    Scalar rho = 0;
};

template <typename Scalar>
struct LossGradients {
    Network<Scalar> theta;
    Network<Scalar> phi;
    LossBreakdown<Scalar> loss;
};

namespace detail {

template <typename Scalar>
void check_pair(const CycleVCModel<Scalar>& model,
                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y) {
    check_sequence(x, model.arch, "source sequence");
    check_sequence(y, model.arch, "target sequence");
    if (x.rows() != y.rows())
        throw PairingError("source has " + std::to_string(x.rows()) + " frames but target has " +
                           std::to_string(y.rows()));
}

template <typename Scalar>
Scalar mean_abs(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& d) {
    return d.cwiseAbs().sum() / static_cast<Scalar>(d.size());
}

// d mean|d| / d d, with the subgradient at 0 taken as 0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> mean_abs_grad(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& d, Scalar weight) {
    const Scalar k = weight / static_cast<Scalar>(d.size());
    return d.unaryExpr([k](Scalar v) { return v > 0 ? k : (v < 0 ? -k : Scalar(0)); });
}

} // namespace detail

// Cycle objective on one normalized pair: x (source, n x 50) and y (target,
// n x 50). Both L1 terms are means over frames x 45 mcep dims, measured
// against y's mcep block. With teacher_forcing the StoT term feeds f the
// previous target frame instead of its own previous output.
template <typename Scalar>
LossBreakdown<Scalar> cycle_loss(const CycleVCModel<Scalar>& model,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y,
                                 Scalar rho = static_cast<Scalar>(kDefaultRho),
                                 bool teacher_forcing = false) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    detail::check_pair(model, x, y);
    const Index od = model.arch.out_dim;
    const Matrix target = y.leftCols(od).transpose();
    const Matrix xt = x.transpose();
    const Matrix f_out = network_forward(model.theta, model.arch, model.stot_skip(), xt,
                                         teacher_forcing ? &target : nullptr);
    const Matrix cyc = cycle_path(model, y).transpose();
    LossBreakdown<Scalar> l;
    l.rho = rho;
    l.stot_l1 = detail::mean_abs<Scalar>(f_out - target);
    l.cycle_l1 = detail::mean_abs<Scalar>(cyc - target);
    l.total = l.stot_l1 + rho * l.cycle_l1;
    return l;
}

// Gradients of cycle_loss(...).total with respect to theta and phi.
template <typename Scalar>
LossGradients<Scalar> loss_gradients(const CycleVCModel<Scalar>& model,
                                     const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
                                     const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y,
                                     Scalar rho = static_cast<Scalar>(kDefaultRho),
                                     bool teacher_forcing = false) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    detail::check_pair(model, x, y);
    const Architecture& arch = model.arch;
    const Index od = arch.out_dim;
    const SkipMap<Scalar> f_skip = model.stot_skip();
    const SkipMap<Scalar> g_skip = model.ttos_skip();
    const Matrix target = y.leftCols(od).transpose();

    LossGradients<Scalar> out{Network<Scalar>::zeros(arch), Network<Scalar>::zeros(arch), {}};
    out.loss.rho = rho;

    // StoT term
    const Matrix xt = x.transpose();
    Trace<Scalar> f_trace;
    const Matrix f_out = network_forward(model.theta, arch, f_skip, xt,
                                         teacher_forcing ? &target : nullptr, &f_trace);
    const Matrix f_res = f_out - target;
    out.loss.stot_l1 = detail::mean_abs<Scalar>(f_res);
    network_backward(model.theta, arch, f_skip, f_trace, detail::mean_abs_grad<Scalar>(f_res, Scalar(1)),
                     teacher_forcing, out.theta);

    // cycle term, f(g(Y))
    const Matrix yt = y.transpose();
    Trace<Scalar> g_trace;
    const Matrix g_out = network_forward(model.phi, arch, g_skip, yt, nullptr, &g_trace);
    const Matrix spliced = splice_prosody<Scalar>(model, g_out.transpose(), y).transpose();
    Trace<Scalar> c_trace;
    const Matrix c_out = network_forward(model.theta, arch, f_skip, spliced, nullptr, &c_trace);
    const Matrix c_res = c_out - target;
    out.loss.cycle_l1 = detail::mean_abs<Scalar>(c_res);
    out.loss.total = out.loss.stot_l1 + rho * out.loss.cycle_l1;

    if (rho != Scalar(0)) {
        const Matrix g_spliced = network_backward(model.theta, arch, f_skip, c_trace,
                                                  detail::mean_abs_grad<Scalar>(c_res, rho), false,
                                                  out.theta);
        // only the mcep rows of the spliced input depend on g
        network_backward(model.phi, arch, g_skip, g_trace, Matrix(g_spliced.topRows(od)), false,
                         out.phi);
    }
    return out;
}

} // namespace cyclevc

#endif
