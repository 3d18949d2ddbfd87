#ifndef CYCLEVC_TRAINING_HPP
#define CYCLEVC_TRAINING_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cyclevc/features.hpp"
#include "cyclevc/loss.hpp"
#include "cyclevc/model.hpp"

namespace cyclevc {

// Frame-aligned (synthetic source, natural target) pair.
struct PairedUtterance {
    std::string utt_id;
    UtteranceFeatures src;
    UtteranceFeatures tgt;
};

// Length differences up to this many frames are trimmed away; larger ones
// are rejected as a temporal mismatch.
inline constexpr Index kMaxTrimFrames = 2;

struct TrimRecord {
    std::string utt_id;
    Index src_frames = 0;
    Index tgt_frames = 0;
    Index kept = 0;
};

struct PairingReport {
    std::vector<TrimRecord> trims;
    std::string to_string() const;
};

// Applies the trim rule to one pair; trims are appended to report.
PairedUtterance make_pair(const std::string& utt_id, const UtteranceFeatures& src,
                          const UtteranceFeatures& tgt, PairingReport* report = nullptr);

struct PairedDataset {
    std::vector<PairedUtterance> pairs;  // manifest order
    PairingReport report;
};

PairedDataset pair_dataset(const std::filesystem::path& manifest);

enum class OptimizerKind { adam, sgd };

struct TrainConfig {
    int epochs = 15;
    double rho = kDefaultRho;
    double learning_rate = 1e-4;
    std::uint64_t seed = 1;
    OptimizerKind optimizer = OptimizerKind::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-20;
    bool teacher_forcing = false;
    Architecture arch;

    void validate() const;
};

struct TrainResult {
    CycleVCModel<float> model;
    std::vector<LossBreakdown<float>> curve;  // one entry per epoch, mean over steps
};

struct TrainProgress {
    int epoch = 0;
    LossBreakdown<float> loss;
};

// Trains on pairs in one-utterance steps. Normalization stats come from the
// pairs only. Utterance order is sorted by utt_id, then reshuffled every
// epoch by a generator seeded from config.seed.
TrainResult train(const std::vector<PairedUtterance>& pairs, const TrainConfig& config,
                  const std::function<void(const TrainProgress&)>& on_epoch = {});

// "epoch<TAB>stot_l1<TAB>cycle_l1<TAB>total" lines, epochs counted from 1.
std::string loss_curve_tsv(const std::vector<LossBreakdown<float>>& curve);

} // namespace cyclevc

#endif
