#include "cyclevc/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "cyclevc/feature_file.hpp"

namespace cyclevc {
namespace {

// Adaptive-moment state for one network.
class Adam {
public:
    Adam(const Network<float>& shape, const TrainConfig& cfg)
        : m_(zeros_like(shape)), v_(zeros_like(shape)), cfg_(cfg) {}

    void step(Network<float>& params, const Network<float>& grads) {
        ++t_;
        const double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
        const double lr_t = cfg_.learning_rate * std::sqrt(1.0 - std::pow(b2, t_)) / (1.0 - std::pow(b1, t_));
        auto p = params.tensors();
        const auto g = grads.tensors();
        auto m = m_.tensors();
        auto v = v_.tensors();
        const float fb1 = static_cast<float>(b1), fb2 = static_cast<float>(b2);
        const float flr = static_cast<float>(lr_t), feps = static_cast<float>(cfg_.adam_eps);
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k]->array() = fb1 * m[k]->array() + (1.0f - fb1) * g[k]->array();
            v[k]->array() = fb2 * v[k]->array() + (1.0f - fb2) * g[k]->array().square();
            p[k]->array() -= flr * m[k]->array() / (v[k]->array().sqrt() + feps);
        }
    }

private:
    static Network<float> zeros_like(const Network<float>& n) {
        Network<float> z = n;
        for (auto* m : z.tensors()) m->setZero();
        return z;
    }

    Network<float> m_, v_;
    const TrainConfig& cfg_;
    int t_ = 0;
};

void sgd_step(Network<float>& params, const Network<float>& grads, double lr) {
    auto p = params.tensors();
    const auto g = grads.tensors();
    for (std::size_t k = 0; k < p.size(); ++k) *p[k] -= static_cast<float>(lr) * *g[k];
}

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

} // namespace

std::string PairingReport::to_string() const {
    std::string s;
    for (const auto& t : trims)
        s += t.utt_id + "\ttrimmed src=" + std::to_string(t.src_frames) + " tgt=" +
             std::to_string(t.tgt_frames) + " -> " + std::to_string(t.kept) + "\n";
    return s;
}

PairedUtterance make_pair(const std::string& utt_id, const UtteranceFeatures& src,
                          const UtteranceFeatures& tgt, PairingReport* report) {
    const Index ns = src.n_frames(), nt = tgt.n_frames();
    const Index diff = ns > nt ? ns - nt : nt - ns;
    if (diff > kMaxTrimFrames)
        throw PairingError("utterance '" + utt_id + "': temporal mismatch, source has " +
                           std::to_string(ns) + " frames and target " + std::to_string(nt));
    PairedUtterance p{utt_id, src, tgt};
    p.src.utt_id = p.tgt.utt_id = utt_id;
    if (diff > 0) {
        const Index keep = std::min(ns, nt);
        p.src = p.src.head(keep);
        p.tgt = p.tgt.head(keep);
        if (report) report->trims.push_back({utt_id, ns, nt, keep});
    }
    return p;
}

PairedDataset pair_dataset(const std::filesystem::path& manifest) {
    PairedDataset ds;
    for (const auto& e : read_manifest(manifest)) {
        const UtteranceFeatures nat = read_features(e.natural_path);
        const UtteranceFeatures syn = read_features(e.synthetic_path);
        ds.pairs.push_back(make_pair(e.utt_id, syn, nat, &ds.report));
    }
    return ds;
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(rho >= 0.0)) throw ConfigError("rho must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(adam_eps >= 0.0)) throw ConfigError("adam_eps must be >= 0");
    if (arch.in_dim != kFullDim || arch.out_dim != kMcepDim)
        throw ConfigError("architecture must map 50 -> 45 dims");
    arch.validate();
}

TrainResult train(const std::vector<PairedUtterance>& pairs, const TrainConfig& config,
                  const std::function<void(const TrainProgress&)>& on_epoch) {
    config.validate();
    if (pairs.empty()) throw InputError("training needs at least one pair");

    std::vector<const PairedUtterance*> order;
    for (const auto& p : pairs) {
        if (p.src.n_frames() != p.tgt.n_frames())
            throw PairingError("utterance '" + p.utt_id + "' is not frame-aligned");
        if (p.src.n_frames() == 0) throw InputError("utterance '" + p.utt_id + "' has no frames");
        order.push_back(&p);
    }
    std::sort(order.begin(), order.end(),
              [](const auto* a, const auto* b) { return a->utt_id < b->utt_id; });

    std::vector<UtteranceFeatures> srcs, tgts;
    for (const auto* p : order) {
        srcs.push_back(p->src);
        tgts.push_back(p->tgt);
    }
    NormStats norm_src = compute_norm_stats(srcs, Domain::source);
    NormStats norm_tgt = compute_norm_stats(tgts, Domain::target);

    std::map<std::string, std::pair<Eigen::MatrixXf, Eigen::MatrixXf>> data;
    for (const auto* p : order)
        data[p->utt_id] = {normalize(p->src, norm_src), normalize(p->tgt, norm_tgt)};

    TrainResult result{CycleVCModel<float>::initialized(config.arch, norm_src, norm_tgt, config.seed), {}};
    CycleVCModel<float>& model = result.model;
    Adam adam_theta(model.theta, config), adam_phi(model.phi, config);
    Random shuffler(config.seed ^ 0x9e3779b97f4a7c15ULL);
    const float rho = static_cast<float>(config.rho);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<const PairedUtterance*> epoch_order = order;
        shuffler.shuffle(epoch_order);
        double stot = 0, cyc = 0, total = 0;
        for (const auto* p : epoch_order) {
            const auto& [x, y] = data.at(p->utt_id);
            LossGradients<float> g = loss_gradients(model, x, y, rho, config.teacher_forcing);
            if (!std::isfinite(g.loss.total) || !g.theta.all_finite() || !g.phi.all_finite())
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", utterance '" +
                                    p->utt_id + "' (stot_l1=" + fmt(g.loss.stot_l1) +
                                    ", cycle_l1=" + fmt(g.loss.cycle_l1) + ")");
            if (config.optimizer == OptimizerKind::adam) {
                adam_theta.step(model.theta, g.theta);
                adam_phi.step(model.phi, g.phi);
            } else {
                sgd_step(model.theta, g.theta, config.learning_rate);
                sgd_step(model.phi, g.phi, config.learning_rate);
            }
            if (!model.all_finite())
                throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch) +
                                    ", utterance '" + p->utt_id + "'");
            stot += g.loss.stot_l1;
            cyc += g.loss.cycle_l1;
            total += g.loss.total;
        }
        const double n = static_cast<double>(epoch_order.size());
        LossBreakdown<float> mean;
        mean.rho = rho;
        mean.stot_l1 = static_cast<float>(stot / n);
        mean.cycle_l1 = static_cast<float>(cyc / n);
        mean.total = static_cast<float>(total / n);
        result.curve.push_back(mean);
        if (on_epoch) on_epoch({epoch, mean});
    }
    return result;
}

std::string loss_curve_tsv(const std::vector<LossBreakdown<float>>& curve) {
    std::string s;
    for (std::size_t e = 0; e < curve.size(); ++e)
        s += std::to_string(e + 1) + "\t" + fmt(curve[e].stot_l1) + "\t" + fmt(curve[e].cycle_l1) +
             "\t" + fmt(curve[e].total) + "\n";
    return s;
}

} // namespace cyclevc
