#include "cyclevc/features.hpp"

#include <cmath>
#include <utility>

#include "cyclevc/error.hpp"

namespace cyclevc {

UtteranceFeatures::UtteranceFeatures(std::string id, Eigen::MatrixXf mcep_, Eigen::VectorXf lf0_,
                                     Eigen::VectorXf uv_, Eigen::MatrixXf cap_)
    : utt_id(std::move(id)),
      mcep(std::move(mcep_)),
      lf0(std::move(lf0_)),
      uv(std::move(uv_)),
      cap(std::move(cap_)) {
    validate();
}

UtteranceFeatures UtteranceFeatures::from_full(std::string id, const Eigen::MatrixXf& full) {
    if (full.cols() != kFullDim)
        throw ShapeError("full frame matrix has " + std::to_string(full.cols()) +
                         " columns, expected " + std::to_string(kFullDim));
    return UtteranceFeatures(std::move(id), full.leftCols(kMcepDim), full.col(kLf0Index),
                             full.col(kUvIndex), full.middleCols(kCapOffset, kCapDim));
}

Eigen::MatrixXf UtteranceFeatures::full() const {
    Eigen::MatrixXf out(n_frames(), kFullDim);
    out.leftCols(kMcepDim) = mcep;
    out.col(kLf0Index) = lf0;
    out.col(kUvIndex) = uv;
    out.middleCols(kCapOffset, kCapDim) = cap;
    return out;
}

UtteranceFeatures UtteranceFeatures::with_mcep(const Eigen::MatrixXf& new_mcep) const {
    return UtteranceFeatures(utt_id, new_mcep, lf0, uv, cap);
}

UtteranceFeatures UtteranceFeatures::head(Index n) const {
    if (n < 0 || n > n_frames()) throw InputError("head(): frame count out of range");
    return UtteranceFeatures(utt_id, mcep.topRows(n), lf0.head(n), uv.head(n), cap.topRows(n));
}

void UtteranceFeatures::validate() const {
    const Index n = mcep.rows();
    const std::string who = "utterance '" + utt_id + "': ";
    if (mcep.cols() != kMcepDim) throw ShapeError(who + "mcep must have 45 columns");
    if (cap.cols() != kCapDim) throw ShapeError(who + "cap must have 3 columns");
    if (lf0.size() != n || uv.size() != n || cap.rows() != n)
        throw ShapeError(who + "per-frame arrays disagree on frame count");
    if (!mcep.allFinite() || !lf0.allFinite() || !uv.allFinite() || !cap.allFinite())
        throw InputError(who + "non-finite feature value");
    for (Index t = 0; t < n; ++t)
        if (uv(t) != 0.0f && uv(t) != 1.0f) throw InputError(who + "uv must be 0 or 1");
}

const char* to_string(Domain d) { return d == Domain::source ? "source" : "target"; }

Domain domain_from_string(const std::string& s) {
    if (s == "source") return Domain::source;
    if (s == "target") return Domain::target;
    throw FormatError("unknown domain tag '" + s + "'");
}

NormStats NormStats::identity(Domain d) {
    return {Eigen::VectorXf::Zero(kFullDim), Eigen::VectorXf::Ones(kFullDim), d};
}

NormStats compute_norm_stats(std::span<const UtteranceFeatures> set, Domain domain) {
    if (set.empty()) throw InputError("cannot compute normalization stats of an empty set");
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(kFullDim);
    double count = 0;
    for (const auto& u : set) {
        sum += u.full().cast<double>().colwise().sum().transpose();
        count += static_cast<double>(u.n_frames());
    }
    if (count == 0) throw InputError("normalization set has no frames");
    const Eigen::VectorXd mean = sum / count;
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(kFullDim);
    for (const auto& u : set) {
        const Eigen::MatrixXd centered = u.full().cast<double>().rowwise() - mean.transpose();
        sq += centered.array().square().colwise().sum().matrix().transpose();
    }
    Eigen::VectorXf sd = (sq / count).cwiseSqrt().cast<float>();
    sd = sd.cwiseMax(kStdFloor);
    return {mean.cast<float>(), sd, domain};
}

Eigen::MatrixXf normalize(const UtteranceFeatures& feat, const NormStats& stats) {
    const Eigen::MatrixXf full = feat.full();
    return ((full.rowwise() - stats.mean.transpose()).array().rowwise() /
            stats.std.transpose().array())
        .matrix();
}

Eigen::MatrixXf normalize_mcep(const UtteranceFeatures& feat, const NormStats& stats) {
    return ((feat.mcep.rowwise() - stats.mean.head(kMcepDim).transpose()).array().rowwise() /
            stats.std.head(kMcepDim).transpose().array())
        .matrix();
}

Eigen::MatrixXf denormalize(const Eigen::MatrixXf& mcep_norm, const NormStats& stats) {
    if (mcep_norm.cols() != kMcepDim) throw ShapeError("denormalize expects 45 mcep columns");
    return ((mcep_norm.array().rowwise() * stats.std.head(kMcepDim).transpose().array())
                .rowwise() +
            stats.mean.head(kMcepDim).transpose().array())
        .matrix();
}

} // namespace cyclevc
