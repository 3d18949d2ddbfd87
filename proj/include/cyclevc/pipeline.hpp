#ifndef CYCLEVC_PIPELINE_HPP
#define CYCLEVC_PIPELINE_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cyclevc/analysis.hpp"
#include "cyclevc/features.hpp"
#include "cyclevc/model.hpp"

namespace cyclevc {

struct VocoderTrainingPair {
    UtteranceFeatures features;
    std::vector<double> waveform;
};

// Waveform generator conditioned on acoustic features.
class VocoderBackend {
public:
    virtual ~VocoderBackend() = default;
    virtual std::string name() const = 0;
    // Deterministic; length within one frame of n_frames * 5 ms.
    virtual std::vector<double> generate(const UtteranceFeatures& feat, int fs) const = 0;
    virtual bool trainable() const { return false; }
    virtual void train(const std::vector<VocoderTrainingPair>& pairs);
};

// Non-trainable backend that vocodes with an analyzer's synthesizer.
class ResynthesisBackend final : public VocoderBackend {
public:
    explicit ResynthesisBackend(const Analyzer& analyzer = default_analyzer()) : analyzer_(&analyzer) {}
    std::string name() const override { return "resynthesis(" + analyzer_->name() + ")"; }
    std::vector<double> generate(const UtteranceFeatures& feat, int fs) const override;

private:
    const Analyzer* analyzer_;
};

// |n_samples - n_frames * shift| <= shift at the given rate.
bool duration_matches(Index n_frames, std::size_t n_samples, int fs);

// Y with its mcep replaced by f(g(Y)); lf0, uv and cap are copied.
UtteranceFeatures generate_pseudo(const CycleVCModel<float>& model, const UtteranceFeatures& y);

// X with its mcep replaced by f(X); lf0, uv and cap are copied.
UtteranceFeatures enhance(const CycleVCModel<float>& model, const UtteranceFeatures& x);

enum class FeatureKind { natural, synthetic, pseudo, enhanced };
enum class Scenario { natural, am, tm, npf };

const char* to_string(FeatureKind k);
const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);
inline constexpr Scenario kAllScenarios[] = {Scenario::natural, Scenario::am, Scenario::tm, Scenario::npf};

// Feature kinds the vocoder is trained on and tested with.
struct ScenarioSpec {
    FeatureKind train;
    FeatureKind test;
};
ScenarioSpec scenario_spec(Scenario s);

using BackendFactory = std::function<std::unique_ptr<VocoderBackend>()>;

struct ScenarioAssets {
    std::map<FeatureKind, std::vector<UtteranceFeatures>> test_features;
    // Only consulted for trainable backends.
    std::map<FeatureKind, std::vector<UtteranceFeatures>> train_features;
    std::map<std::string, std::vector<double>> natural_waveforms;
    BackendFactory backend;
    int fs = kSampleRate;
};

struct ScenarioEntry {
    std::string utt_id;
    std::string feature_path;  // relative to the output directory
    std::string wav_path;
    Index n_frames = 0;
    std::size_t n_samples = 0;
};

struct ScenarioResult {
    Scenario scenario = Scenario::natural;
    std::string backend;
    std::vector<ScenarioEntry> entries;  // utt_id order
};

// Vocodes the scenario's test features with a fresh backend. Writes
// <name>/features/<id>.cvf, <name>/wav/<id>.wav and the manifest
// <name>/manifest.tsv under out_dir; manifest paths are relative to out_dir.
ScenarioResult run_scenario(Scenario scenario, const ScenarioAssets& assets,
                            const std::filesystem::path& out_dir);

} // namespace cyclevc

#endif
