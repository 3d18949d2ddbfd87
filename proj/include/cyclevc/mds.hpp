#ifndef CYCLEVC_MDS_HPP
#define CYCLEVC_MDS_HPP

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cyclevc/error.hpp"

namespace cyclevc {

template <typename Scalar>
struct MdsResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> coords;  // n x dims, centered
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;          // descending, all n
    Scalar stress = 0;
};

// Pairwise Euclidean distances between the rows of x.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pairwise_distances(
    const Eigen::MatrixBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = x.rows();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
    return d;
}

// Normalized stress sqrt(sum (d_ij - delta_ij)^2 / sum delta_ij^2) over i < j.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar normalized_stress(const Eigen::MatrixBase<DerivedA>& target,
                                            const Eigen::MatrixBase<DerivedB>& embedded) {
    using Scalar = typename DerivedA::Scalar;
    Scalar num = 0, den = 0;
    for (Eigen::Index i = 0; i < target.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j) {
            const Scalar diff = embedded(i, j) - target(i, j);
            num += diff * diff;
            den += target(i, j) * target(i, j);
        }
    return den > 0 ? std::sqrt(num / den) : Scalar(0);
}

// Classical (Torgerson) scaling: eigendecomposition of the double-centered
// squared-distance matrix, keeping the top `dims` eigenpairs. Negative
// eigenvalues of non-Euclidean input are clamped to zero and show up as
// stress. Each axis is oriented so its largest-magnitude coordinate is
// positive.
template <typename Derived>
MdsResult<typename Derived::Scalar> classical_mds(const Eigen::MatrixBase<Derived>& dist, int dims = 2) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const Eigen::Index n = dist.rows();
    if (dist.cols() != n) throw ShapeError("distance matrix must be square");
    if (dims < 1) throw ConfigError("embedding dimension must be >= 1");

    MdsResult<Scalar> out;
    out.coords = Matrix::Zero(n, dims);
    out.eigenvalues = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
    if (n == 0) return out;

    const Matrix sq = dist.array().square().matrix();
    const Matrix centering = Matrix::Identity(n, n).array() - Scalar(1) / static_cast<Scalar>(n);
    const Matrix b = Scalar(-0.5) * centering * sq * centering;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(Scalar(0.5) * (b + b.transpose()));
    out.eigenvalues = solver.eigenvalues().reverse();

    for (int k = 0; k < dims && k < n; ++k) {
        const Eigen::Index src = n - 1 - k;
        const Scalar lambda = std::max(solver.eigenvalues()(src), Scalar(0));
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> axis = solver.eigenvectors().col(src) * std::sqrt(lambda);
        Eigen::Index arg = 0;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis(arg) < 0) axis = -axis;
        out.coords.col(k) = axis;
    }
    out.coords.rowwise() -= out.coords.colwise().mean();
    out.stress = normalized_stress(dist, pairwise_distances(out.coords));
    return out;
}

} // namespace cyclevc

#endif
