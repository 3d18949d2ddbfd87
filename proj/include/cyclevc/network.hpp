#ifndef CYCLEVC_NETWORK_HPP
#define CYCLEVC_NETWORK_HPP

#include <cstdint>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "cyclevc/error.hpp"
#include "cyclevc/random.hpp"

namespace cyclevc {

// Shape of one conversion network. Both directions of the cycle model use
// the same shape.
struct Architecture {
    int in_dim = 50;
    int out_dim = 45;
    int in_conv_layers = 2;
    int in_channels = 128;
    int kernel = 3;          // causal
    int gru_hidden = 256;
    int out_conv_layers = 2; // kernel 1, last layer linear
    int out_channels = 128;
    bool residual = true;

    void validate() const {
        if (in_dim <= out_dim || out_dim <= 0) throw ConfigError("architecture: need in_dim > out_dim > 0");
        if (in_conv_layers < 1 || out_conv_layers < 1)
            throw ConfigError("architecture: need at least one input and one output layer");
        if (in_channels < 1 || kernel < 1 || gru_hidden < 1 || out_channels < 1)
            throw ConfigError("architecture: sizes must be positive");
    }

    bool operator==(const Architecture&) const = default;
};

// Per-dimension affine map added to the network output when the
// architecture is residual: out = net(x) + scale * x[0:out_dim] + shift.
template <typename Scalar>
struct SkipMap {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scale;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> shift;
};

// Parameters of one conversion network: causal conv input stack, a GRU that
// also receives the previous output frame, and a framewise output stack.
// Every tensor is a matrix; biases are single-column matrices.
template <typename Scalar>
struct Network {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    std::vector<Matrix> in_w, in_b;   // in_w[l]: channels x (in * kernel)
    Matrix gru_w, gru_u, gru_bw, gru_bu;  // 3H x (C + out_dim), 3H x H, gates ordered r, z, n
    std::vector<Matrix> out_w, out_b;

    static Network zeros(const Architecture& a) {
        a.validate();
        Network n;
        int in = a.in_dim;
        for (int l = 0; l < a.in_conv_layers; ++l) {
            n.in_w.push_back(Matrix::Zero(a.in_channels, in * a.kernel));
            n.in_b.push_back(Matrix::Zero(a.in_channels, 1));
            in = a.in_channels;
        }
        const int h3 = 3 * a.gru_hidden;
        n.gru_w = Matrix::Zero(h3, a.in_channels + a.out_dim);
        n.gru_u = Matrix::Zero(h3, a.gru_hidden);
        n.gru_bw = Matrix::Zero(h3, 1);
        n.gru_bu = Matrix::Zero(h3, 1);
        in = a.gru_hidden;
        for (int l = 0; l < a.out_conv_layers; ++l) {
            const int out = l + 1 == a.out_conv_layers ? a.out_dim : a.out_channels;
            n.out_w.push_back(Matrix::Zero(out, in));
            n.out_b.push_back(Matrix::Zero(out, 1));
            in = out;
        }
        return n;
    }

    // Uniform in +-sqrt(1 / fan_in) per tensor, fan_in being the width of
    // the weight the tensor belongs to.
    static Network initialized(const Architecture& a, Random& rng) {
        Network n = zeros(a);
        auto fill = [&rng](Matrix& m, Eigen::Index fan_in) {
            const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                for (Eigen::Index i = 0; i < m.rows(); ++i)
                    m(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
        };
        for (std::size_t l = 0; l < n.in_w.size(); ++l) {
            fill(n.in_w[l], n.in_w[l].cols());
            fill(n.in_b[l], n.in_w[l].cols());
        }
        fill(n.gru_w, n.gru_w.cols());
        fill(n.gru_u, n.gru_u.cols());
        fill(n.gru_bw, n.gru_w.cols());
        fill(n.gru_bu, n.gru_u.cols());
        for (std::size_t l = 0; l < n.out_w.size(); ++l) {
            fill(n.out_w[l], n.out_w[l].cols());
            fill(n.out_b[l], n.out_w[l].cols());
        }
        return n;
    }

    // Declaration order, which is also the checkpoint order.
    std::vector<Matrix*> tensors() {
        std::vector<Matrix*> t;
        for (std::size_t l = 0; l < in_w.size(); ++l) {
            t.push_back(&in_w[l]);
            t.push_back(&in_b[l]);
        }
        t.insert(t.end(), {&gru_w, &gru_u, &gru_bw, &gru_bu});
        for (std::size_t l = 0; l < out_w.size(); ++l) {
            t.push_back(&out_w[l]);
            t.push_back(&out_b[l]);
        }
        return t;
    }

    std::vector<const Matrix*> tensors() const {
        auto t = const_cast<Network*>(this)->tensors();
        return {t.begin(), t.end()};
    }

    Eigen::Index parameter_count() const {
        Eigen::Index c = 0;
        for (const Matrix* m : tensors()) c += m->size();
        return c;
    }

    bool all_finite() const {
        for (const Matrix* m : tensors())
            if (!m->allFinite()) return false;
        return true;
    }

    template <typename Other>
    Network<Other> cast() const {
        Network<Other> o;
        for (const auto& m : in_w) o.in_w.push_back(m.template cast<Other>());
        for (const auto& m : in_b) o.in_b.push_back(m.template cast<Other>());
        o.gru_w = gru_w.template cast<Other>();
        o.gru_u = gru_u.template cast<Other>();
        o.gru_bw = gru_bw.template cast<Other>();
        o.gru_bu = gru_bu.template cast<Other>();
        for (const auto& m : out_w) o.out_w.push_back(m.template cast<Other>());
        for (const auto& m : out_b) o.out_b.push_back(m.template cast<Other>());
        return o;
    }

    // Zeroes the final output layer, so a residual network reduces to its
    // skip map.
    void zero_output_layer() {
        out_w.back().setZero();
        out_b.back().setZero();
    }
};

// Activations kept by the forward pass for back-propagation. Frames are
// columns.
template <typename Scalar>
struct Trace {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    std::vector<Matrix> conv_cols;  // im2col input of each input layer
    std::vector<Matrix> conv_act;   // tanh output of each input layer
    Matrix feedback;                // out_dim x n, previous frame fed to the GRU
    Matrix h;                       // H x (n + 1), column 0 is the initial state
    Matrix r, z, cand, hu_n;        // H x n
    std::vector<Matrix> out_act;    // output of each output layer (last is linear)
    Matrix output;                  // out_dim x n
};

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> causal_cols(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a, int kernel) {
    const Eigen::Index c = a.rows(), n = a.cols();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cols =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(c * kernel, n);
    for (int j = 0; j < kernel; ++j) {
        const Eigen::Index lag = kernel - 1 - j;
        if (lag < n) cols.block(j * c, lag, c, n - lag) = a.leftCols(n - lag);
    }
    return cols;
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
    using S = typename Derived::Scalar;
    return (S(1) / (S(1) + (-x.array()).exp())).matrix();
}

} // namespace detail

// Runs the network over x (in_dim x n, frames as columns). The GRU input at
// frame t includes the output at t - 1 (zero at t = 0), or teacher(:, t - 1)
// when a teacher sequence is given.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> network_forward(
    const Network<Scalar>& net, const Architecture& arch, const SkipMap<Scalar>& skip,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
    const std::type_identity_t<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>* teacher = nullptr,
    std::type_identity_t<Trace<Scalar>>* trace = nullptr) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (x.rows() != arch.in_dim)
        throw ShapeError("network input has " + std::to_string(x.rows()) + " dims, expected " +
                         std::to_string(arch.in_dim));
    if (x.cols() < 1) throw ShapeError("network input has no frames");
    const Eigen::Index n = x.cols();
    const int hid = arch.gru_hidden;
    const int od = arch.out_dim;
    if (teacher && (teacher->rows() != od || teacher->cols() != n))
        throw ShapeError("teacher sequence shape mismatch");

    Trace<Scalar> local;
    Trace<Scalar>& tr = trace ? *trace : local;
    tr.conv_cols.clear();
    tr.conv_act.clear();

    Matrix act = x;
    for (std::size_t l = 0; l < net.in_w.size(); ++l) {
        Matrix cols = detail::causal_cols<Scalar>(act, arch.kernel);
        act = ((net.in_w[l] * cols).colwise() + net.in_b[l].col(0)).array().tanh().matrix();
        if (trace) tr.conv_cols.push_back(std::move(cols));
        tr.conv_act.push_back(act);
    }
    const Matrix& conv = tr.conv_act.back();

    const auto w_conv = net.gru_w.leftCols(arch.in_channels);
    const auto w_fb = net.gru_w.rightCols(od);
    const Matrix pre_conv = (w_conv * conv).colwise() + net.gru_bw.col(0);

    tr.feedback = Matrix::Zero(od, n);
    tr.h = Matrix::Zero(hid, n + 1);
    tr.r.resize(hid, n);
    tr.z.resize(hid, n);
    tr.cand.resize(hid, n);
    tr.hu_n.resize(hid, n);
    tr.out_act.assign(net.out_w.size(), Matrix());
    for (std::size_t l = 0; l < net.out_w.size(); ++l) tr.out_act[l].resize(net.out_w[l].rows(), n);
    tr.output.resize(od, n);

    Vector pre(3 * hid), hu(3 * hid), layer_in, layer_out;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (t > 0) {
            if (teacher)
                tr.feedback.col(t) = teacher->col(t - 1);
            else
                tr.feedback.col(t) = tr.output.col(t - 1);
        }
        pre.noalias() = pre_conv.col(t) + w_fb * tr.feedback.col(t);
        hu.noalias() = net.gru_u * tr.h.col(t) + net.gru_bu.col(0);
        tr.r.col(t) = detail::sigmoid(pre.head(hid) + hu.head(hid));
        tr.z.col(t) = detail::sigmoid(pre.segment(hid, hid) + hu.segment(hid, hid));
        tr.hu_n.col(t) = hu.tail(hid);
        tr.cand.col(t) =
            (pre.tail(hid).array() + tr.r.col(t).array() * hu.tail(hid).array()).tanh().matrix();
        tr.h.col(t + 1) = ((Scalar(1) - tr.z.col(t).array()) * tr.cand.col(t).array() +
                           tr.z.col(t).array() * tr.h.col(t).array())
                              .matrix();

        layer_in = tr.h.col(t + 1);
        for (std::size_t l = 0; l < net.out_w.size(); ++l) {
            layer_out.noalias() = net.out_w[l] * layer_in + net.out_b[l].col(0);
            if (l + 1 < net.out_w.size()) layer_out = layer_out.array().tanh().matrix();
            tr.out_act[l].col(t) = layer_out;
            layer_in = layer_out;
        }
        tr.output.col(t) = layer_in;
        if (arch.residual)
            tr.output.col(t) += (skip.scale.array() * x.col(t).head(od).array()).matrix() + skip.shift;
    }
    return tr.output;
}

// Back-propagates grad_out (out_dim x n, dL/d output) through a traced
// forward pass. Parameter gradients are accumulated into grads; the return
// value is dL/dx. With teacher forcing the feedback path carries no gradient.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> network_backward(
    const Network<Scalar>& net, const Architecture& arch, const SkipMap<Scalar>& skip,
    const Trace<Scalar>& tr, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& grad_out,
    bool teacher_forced, Network<Scalar>& grads) {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = tr.output.cols();
    const int hid = arch.gru_hidden;
    const int od = arch.out_dim;
    const std::size_t n_out = net.out_w.size();

    const auto w_fb = net.gru_w.rightCols(od);
    Matrix ga(3 * hid, n), gb(3 * hid, n);
    std::vector<Matrix> g_out_layer(n_out);
    for (std::size_t l = 0; l < n_out; ++l) g_out_layer[l].resize(net.out_w[l].rows(), n);
    Matrix g_skip(od, n);

    Vector g_h_carry = Vector::Zero(hid);
    Vector g_fb_carry = Vector::Zero(od);
    Vector g, g_h, g_n(hid), g_z(hid), g_an(hid), g_ar(hid), g_az(hid);
    for (Eigen::Index t = n - 1; t >= 0; --t) {
        g = grad_out.col(t) + g_fb_carry;
        g_skip.col(t) = g;
        for (std::size_t l = n_out; l-- > 0;) {
            g_out_layer[l].col(t) = g;
            Vector back = net.out_w[l].transpose() * g;
            if (l > 0) {
                const auto a = tr.out_act[l - 1].col(t).array();
                g = (back.array() * (Scalar(1) - a * a)).matrix();
            } else {
                g_h = back + g_h_carry;
            }
        }
        const auto z = tr.z.col(t).array();
        const auto r = tr.r.col(t).array();
        const auto cand = tr.cand.col(t).array();
        const auto h_prev = tr.h.col(t).array();
        g_n = (g_h.array() * (Scalar(1) - z)).matrix();
        g_z = (g_h.array() * (h_prev - cand)).matrix();
        g_an = (g_n.array() * (Scalar(1) - cand * cand)).matrix();
        g_ar = (g_an.array() * tr.hu_n.col(t).array() * r * (Scalar(1) - r)).matrix();
        g_az = (g_z.array() * z * (Scalar(1) - z)).matrix();
        ga.col(t) << g_ar, g_az, g_an;
        gb.col(t) << g_ar, g_az, (g_an.array() * r).matrix();
        g_h_carry = (g_h.array() * z).matrix() + net.gru_u.transpose() * gb.col(t);
        if (teacher_forced)
            g_fb_carry.setZero();
        else
            g_fb_carry.noalias() = w_fb.transpose() * ga.col(t);
    }

    // batched weight gradients
    const Matrix& conv = tr.conv_act.back();
    grads.gru_w.leftCols(arch.in_channels).noalias() += ga * conv.transpose();
    grads.gru_w.rightCols(od).noalias() += ga * tr.feedback.transpose();
    grads.gru_bw.col(0) += ga.rowwise().sum();
    grads.gru_u.noalias() += gb * tr.h.leftCols(n).transpose();
    grads.gru_bu.col(0) += gb.rowwise().sum();
    for (std::size_t l = 0; l < n_out; ++l) {
        const Matrix& in = l == 0 ? Matrix(tr.h.rightCols(n)) : tr.out_act[l - 1];
        grads.out_w[l].noalias() += g_out_layer[l] * in.transpose();
        grads.out_b[l].col(0) += g_out_layer[l].rowwise().sum();
    }

    Matrix g_act = net.gru_w.leftCols(arch.in_channels).transpose() * ga;
    Matrix g_x;
    for (std::size_t l = net.in_w.size(); l-- > 0;) {
        const Matrix& a = tr.conv_act[l];
        const Matrix g_pre = (g_act.array() * (Scalar(1) - a.array() * a.array())).matrix();
        grads.in_w[l].noalias() += g_pre * tr.conv_cols[l].transpose();
        grads.in_b[l].col(0) += g_pre.rowwise().sum();
        const Matrix g_cols = net.in_w[l].transpose() * g_pre;
        const Eigen::Index c = g_cols.rows() / arch.kernel;
        Matrix g_in = Matrix::Zero(c, n);
        for (int j = 0; j < arch.kernel; ++j) {
            const Eigen::Index lag = arch.kernel - 1 - j;
            if (lag < n) g_in.leftCols(n - lag) += g_cols.block(j * c, lag, c, n - lag);
        }
        if (l == 0)
            g_x = std::move(g_in);
        else
            g_act = std::move(g_in);
    }
    if (arch.residual) g_x.topRows(od) += (g_skip.array().colwise() * skip.scale.array()).matrix();
    return g_x;
}

} // namespace cyclevc

#endif
