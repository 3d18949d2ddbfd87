#include "cyclevc/end_to_end.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "cyclevc/analysis.hpp"
#include "cyclevc/checkpoint.hpp"
#include "cyclevc/error.hpp"
#include "cyclevc/feature_file.hpp"
#include "cyclevc/fixture.hpp"
#include "cyclevc/pipeline.hpp"
#include "cyclevc/training.hpp"
#include "cyclevc/ttsim.hpp"
#include "cyclevc/wav.hpp"

namespace fs = std::filesystem;

namespace cyclevc {
namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

template <typename Fn>
auto stage(const std::string& name, const EndToEndOptions& opts, Fn&& fn) {
    if (opts.log) opts.log("stage " + name);
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const Error& e) {
        throw StageError(name, e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error("stage '" + name + "' failed (internal): " + e.what());
    }
}

void write_set(const std::vector<UtteranceFeatures>& set, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& u : set) write_features(u, dir / (u.utt_id + ".cvf"));
}

std::vector<UtteranceFeatures> select(const std::vector<UtteranceFeatures>& set,
                                      const std::vector<std::string>& ids) {
    std::map<std::string, const UtteranceFeatures*> by_id;
    for (const auto& u : set) by_id[u.utt_id] = &u;
    std::vector<UtteranceFeatures> out;
    for (const auto& id : ids) out.push_back(*by_id.at(id));
    return out;
}

} // namespace

std::vector<std::string> planned_stages(const EndToEndOptions& opts) {
    std::vector<std::string> s;
    if (opts.corpus.empty()) s.push_back("fixture");
    for (const char* n : {"extract", "simulate", "split", "train", "pseudo", "enhance", "scenario", "plane", "report"})
        s.push_back(n);
    return s;
}

EndToEndReport run_end_to_end(const EndToEndOptions& opts) {
    const RunConfig& cfg = opts.config;
    auto log = [&](const std::string& m) {
        if (opts.log) opts.log(m);
    };
    if (opts.dry_run) {
        for (const auto& s : planned_stages(opts)) log("plan " + s);
        return {};
    }
    if (opts.out.empty()) throw ConfigError("end-to-end run needs an output directory");

    const int fs_hz = cfg.get_int("fs");
    const double train_fraction = cfg.get_double("train_fraction");
    const TrainConfig train_cfg = cfg.train_config();
    const DegradeConfig degrade_cfg = cfg.degrade_config();
    const SourceFilterAnalyzer analyzer(cfg.analysis_config());
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");

    fs::path corpus = opts.corpus;
    if (corpus.empty()) {
        corpus = opts.out / "corpus";
        stage("fixture", opts, [&] {
            const auto paths = write_fixture(cfg.fixture_config(), corpus);
            log("  wrote " + std::to_string(paths.size()) + " fixture utterances");
            return 0;
        });
    }

    std::map<std::string, std::vector<double>> waveforms;
    const auto natural = stage("extract", opts, [&] {
        if (!fs::is_directory(corpus)) throw InputError("corpus directory '" + corpus.string() + "' not found");
        std::vector<fs::path> wavs;
        for (const auto& e : fs::directory_iterator(corpus))
            if (e.is_regular_file() && e.path().extension() == ".wav") wavs.push_back(e.path());
        std::sort(wavs.begin(), wavs.end());
        if (wavs.size() < 2) throw InputError("corpus '" + corpus.string() + "' needs at least 2 .wav files");
        std::vector<UtteranceFeatures> set;
        for (const auto& p : wavs) {
            const Waveform w = read_wav(p);
            if (w.sample_rate != fs_hz)
                throw InputError(p.string() + ": sample rate " + std::to_string(w.sample_rate) +
                                 " differs from fs " + std::to_string(fs_hz));
            set.push_back(analyzer.analyze(w.samples, fs_hz, p.stem().string()));
            waveforms[set.back().utt_id] = w.samples;
        }
        write_set(set, opts.out / "natural");
        log("  analyzed " + std::to_string(set.size()) + " utterances");
        return set;
    });

    const auto synthetic = stage("simulate", opts, [&] {
        std::vector<UtteranceFeatures> set;
        for (const auto& y : natural) set.push_back(degrade(y, degrade_cfg));
        write_set(set, opts.out / "synthetic");
        return set;
    });

    std::vector<std::string> ids;
    for (const auto& u : natural) ids.push_back(u.utt_id);
    std::sort(ids.begin(), ids.end());

    EndToEndReport report;
    stage("split", opts, [&] {
        const auto n = static_cast<long>(ids.size());
        const long n_train = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
        report.train_ids.assign(ids.begin(), ids.begin() + n_train);
        report.test_ids.assign(ids.begin() + n_train, ids.end());
        auto manifest = [](const std::vector<std::string>& part) {
            std::vector<ManifestEntry> m;
            for (const auto& id : part) m.push_back({id, "natural/" + id + ".cvf", "synthetic/" + id + ".cvf"});
            return m;
        };
        write_manifest(manifest(ids), opts.out / "pairs.tsv");
        write_manifest(manifest(report.train_ids), opts.out / "train.tsv");
        write_manifest(manifest(report.test_ids), opts.out / "test.tsv");
        log("  train " + std::to_string(report.train_ids.size()) + ", test " +
            std::to_string(report.test_ids.size()));
        return 0;
    });

    const TrainResult trained = stage("train", opts, [&] {
        const PairedDataset data = pair_dataset(opts.out / "train.tsv");
        const std::string trims = data.report.to_string();
        if (!trims.empty()) log(trims);
        TrainResult r = train(data.pairs, train_cfg, [&](const TrainProgress& p) {
            log("  epoch " + std::to_string(p.epoch) + " stot_l1 " + fmt("%.6f", p.loss.stot_l1) + " cycle_l1 " +
                fmt("%.6f", p.loss.cycle_l1));
        });
        fs::create_directories(opts.out / "model");
        save_model(r.model, opts.out / "model" / "model.ckpt");
        write_text_file(opts.out / "model" / "loss.tsv", loss_curve_tsv(r.curve));
        return r;
    });
    const CycleVCModel<float>& model = trained.model;

    const auto pseudo = stage("pseudo", opts, [&] {
        std::vector<UtteranceFeatures> set;
        for (const auto& y : natural) {
            set.push_back(generate_pseudo(model, y));
            const auto& p = set.back();
            if (p.n_frames() != y.n_frames() || p.lf0 != y.lf0 || p.uv != y.uv)
                throw std::logic_error("pseudo features of '" + y.utt_id + "' lost temporal match");
        }
        write_set(set, opts.out / "pseudo");
        return set;
    });

    const auto test_natural = select(natural, report.test_ids);
    const auto test_synthetic = select(synthetic, report.test_ids);
    const auto test_pseudo = select(pseudo, report.test_ids);

    const auto enhanced = stage("enhance", opts, [&] {
        std::vector<UtteranceFeatures> set;
        for (const auto& x : test_synthetic) set.push_back(enhance(model, x));
        write_set(set, opts.out / "enhanced");
        return set;
    });

    stage("scenario", opts, [&] {
        ScenarioAssets assets;
        assets.fs = fs_hz;
        assets.test_features[FeatureKind::natural] = test_natural;
        assets.test_features[FeatureKind::synthetic] = test_synthetic;
        assets.test_features[FeatureKind::pseudo] = test_pseudo;
        assets.test_features[FeatureKind::enhanced] = enhanced;
        assets.train_features[FeatureKind::natural] = select(natural, report.train_ids);
        assets.train_features[FeatureKind::synthetic] = select(synthetic, report.train_ids);
        assets.train_features[FeatureKind::pseudo] = select(pseudo, report.train_ids);
        assets.natural_waveforms = waveforms;
        assets.backend = [&analyzer] { return std::make_unique<ResynthesisBackend>(analyzer); };
        for (Scenario s : kAllScenarios) {
            const ScenarioResult r = run_scenario(s, assets, opts.out / "scenarios");
            log(std::string("  ") + to_string(s) + ": " + std::to_string(r.entries.size()) + " waveforms via " +
                r.backend);
        }
        return 0;
    });

    stage("plane", opts, [&] {
        report.plane = mcd_plane(test_natural, test_synthetic, test_pseudo, enhanced);
        fs::create_directories(opts.out / "plane");
        emit_plane(report.plane, opts.out / "plane" / "plane.svg", opts.out / "plane" / "plane.tsv");
        return 0;
    });

    stage("report", opts, [&] {
        report.dist_sn = report.plane.distance("S", "N");
        report.dist_en = report.plane.distance("E", "N");
        report.dist_ep = report.plane.distance("E", "P");
        report.en_ok = report.dist_en + kOrderingMargin <= report.dist_sn;
        report.ep_ok = report.dist_ep + kOrderingMargin <= report.dist_sn;

        std::string t = "cyclevc end-to-end report\n";
        t += "utterances " + std::to_string(ids.size()) + " (train " + std::to_string(report.train_ids.size()) +
             ", test " + std::to_string(report.test_ids.size()) + ")\n";
        t += "epochs " + std::to_string(train_cfg.epochs) + ", rho " + cfg.get("rho") + ", seed " + cfg.get("seed") +
             "\n";
        if (!trained.curve.empty()) {
            t += "stot_l1 first epoch " + fmt("%.6f", trained.curve.front().stot_l1) + "\n";
            t += "stot_l1 last epoch " + fmt("%.6f", trained.curve.back().stot_l1) + "\n";
        }
        t += "\nmean MCD on the test split (dB)\n";
        const char* labels[] = {"N", "S", "P", "E"};
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                t += std::string("dist(") + labels[j] + "," + labels[i] + ") " +
                     fmt("%.4f", report.plane.distance(labels[j], labels[i])) + "\n";
        t += "plane stress " + fmt("%.6f", report.plane.stress) + "\n\n";
        auto check = [&](const char* name, double d, bool ok) {
            t += std::string(ok ? "PASS " : "FAIL ") + name + " < dist(S,N): " + fmt("%.4f", d) + " vs " +
                 fmt("%.4f", report.dist_sn) + " (margin " + fmt("%.4f", report.dist_sn - d) + ", need " +
                 fmt("%.1f", kOrderingMargin) + ")\n";
        };
        check("dist(E,N)", report.dist_en, report.en_ok);
        check("dist(E,P)", report.dist_ep, report.ep_ok);
        t += std::string("result ") + (report.passed() ? "PASS" : "FAIL") + "\n";
        report.text = t;
        write_text_file(opts.out / "report.txt", t);
        return 0;
    });
    return report;
}

} // namespace cyclevc
