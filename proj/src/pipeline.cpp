#include "cyclevc/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include "cyclevc/error.hpp"
#include "cyclevc/feature_file.hpp"
#include "cyclevc/wav.hpp"

namespace cyclevc {

void VocoderBackend::train(const std::vector<VocoderTrainingPair>&) {
    throw ConfigError("vocoder backend '" + name() + "' is not trainable");
}

std::vector<double> ResynthesisBackend::generate(const UtteranceFeatures& feat, int fs) const {
    return analyzer_->synthesize(feat, fs);
}

bool duration_matches(Index n_frames, std::size_t n_samples, int fs) {
    const long long shift = static_cast<long long>(fs) * kFrameShiftUs / 1000000;
    const long long expected = static_cast<long long>(n_frames) * shift;
    return std::llabs(static_cast<long long>(n_samples) - expected) <= shift;
}

UtteranceFeatures generate_pseudo(const CycleVCModel<float>& model, const UtteranceFeatures& y) {
    const Eigen::MatrixXf yn = normalize(y, model.norm_tgt);
    return y.with_mcep(denormalize(cycle_path(model, yn), model.norm_tgt));
}

UtteranceFeatures enhance(const CycleVCModel<float>& model, const UtteranceFeatures& x) {
    const Eigen::MatrixXf xn = normalize(x, model.norm_src);
    return x.with_mcep(denormalize(stot_forward(model, xn), model.norm_tgt));
}

const char* to_string(FeatureKind k) {
    switch (k) {
    case FeatureKind::natural: return "natural";
    case FeatureKind::synthetic: return "synthetic";
    case FeatureKind::pseudo: return "pseudo";
    case FeatureKind::enhanced: return "enhanced";
    }
    return "?";
}

const char* to_string(Scenario s) {
    switch (s) {
    case Scenario::natural: return "Natural";
    case Scenario::am: return "AM";
    case Scenario::tm: return "TM";
    case Scenario::npf: return "NPF";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "natural") return Scenario::natural;
    if (l == "am") return Scenario::am;
    if (l == "tm") return Scenario::tm;
    if (l == "npf") return Scenario::npf;
    throw ConfigError("unknown scenario '" + s + "' (expected Natural, AM, TM or NPF)");
}

ScenarioSpec scenario_spec(Scenario s) {
    switch (s) {
    case Scenario::natural: return {FeatureKind::natural, FeatureKind::natural};
    case Scenario::am: return {FeatureKind::natural, FeatureKind::synthetic};
    case Scenario::tm: return {FeatureKind::synthetic, FeatureKind::synthetic};
    case Scenario::npf: return {FeatureKind::pseudo, FeatureKind::enhanced};
    }
    throw ConfigError("unknown scenario");
}

ScenarioResult run_scenario(Scenario scenario, const ScenarioAssets& assets,
                            const std::filesystem::path& out_dir) {
    const std::string name = to_string(scenario);
    const ScenarioSpec spec = scenario_spec(scenario);
    if (!assets.backend) throw ConfigError("scenario " + name + ": no vocoder backend");
    auto test_it = assets.test_features.find(spec.test);
    if (test_it == assets.test_features.end() || test_it->second.empty())
        throw ConfigError("scenario " + name + ": missing " + to_string(spec.test) + " test features");

    std::unique_ptr<VocoderBackend> backend = assets.backend();
    if (!backend) throw ConfigError("scenario " + name + ": backend factory returned nothing");
    if (backend->trainable()) {
        auto train_it = assets.train_features.find(spec.train);
        if (train_it == assets.train_features.end() || train_it->second.empty())
            throw ConfigError("scenario " + name + ": missing " + to_string(spec.train) +
                              " training features");
        std::vector<VocoderTrainingPair> pairs;
        for (const auto& f : train_it->second) {
            auto w = assets.natural_waveforms.find(f.utt_id);
            if (w == assets.natural_waveforms.end())
                throw ConfigError("scenario " + name + ": missing natural waveform for '" + f.utt_id + "'");
            pairs.push_back({f, w->second});
        }
        backend->train(pairs);
    }

    std::vector<const UtteranceFeatures*> feats;
    for (const auto& f : test_it->second) feats.push_back(&f);
    std::sort(feats.begin(), feats.end(),
              [](const auto* a, const auto* b) { return a->utt_id < b->utt_id; });

    const std::filesystem::path rel_feat = std::filesystem::path(name) / "features";
    const std::filesystem::path rel_wav = std::filesystem::path(name) / "wav";
    std::filesystem::create_directories(out_dir / rel_feat);
    std::filesystem::create_directories(out_dir / rel_wav);

    ScenarioResult result{scenario, backend->name(), {}};
    std::string manifest = "utt_id\tscenario\tfeature_path\twav_path\n";
    for (const auto* f : feats) {
        std::vector<double> wav = backend->generate(*f, assets.fs);
        if (!duration_matches(f->n_frames(), wav.size(), assets.fs))
            throw std::logic_error("scenario " + name + ": backend '" + backend->name() + "' produced " +
                                std::to_string(wav.size()) + " samples for " +
                                std::to_string(f->n_frames()) + " frames of '" + f->utt_id + "'");
        ScenarioEntry e{f->utt_id, (rel_feat / (f->utt_id + ".cvf")).generic_string(),
                        (rel_wav / (f->utt_id + ".wav")).generic_string(), f->n_frames(), wav.size()};
        write_features(*f, out_dir / e.feature_path);
        write_wav(Waveform{std::move(wav), assets.fs}, out_dir / e.wav_path);
        manifest += e.utt_id + "\t" + name + "\t" + e.feature_path + "\t" + e.wav_path + "\n";
        result.entries.push_back(std::move(e));
    }
    write_text_file(out_dir / name / "manifest.tsv", manifest);
    return result;
}

} // namespace cyclevc
