#include "cli.hpp"

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cyclevc/analysis.hpp"
#include "cyclevc/checkpoint.hpp"
#include "cyclevc/end_to_end.hpp"
#include "cyclevc/error.hpp"
#include "cyclevc/eval.hpp"
#include "cyclevc/feature_file.hpp"
#include "cyclevc/fixture.hpp"
#include "cyclevc/pipeline.hpp"
#include "cyclevc/run_config.hpp"
#include "cyclevc/training.hpp"
#include "cyclevc/ttsim.hpp"
#include "cyclevc/wav.hpp"

namespace fs = std::filesystem;

namespace cyclevc::cli {
namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> sets;
    std::string out;
};

class RunLog {
public:
    explicit RunLog(std::ostream& out) : out_(out) {}
    void line(const std::string& s) {
        text_ += s + "\n";
        out_ << s << "\n";
    }
    void quiet(const std::string& s) { text_ += s + "\n"; }
    const std::string& text() const { return text_; }

private:
    std::ostream& out_;
    std::string text_;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_file, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", c.sets, "override one config key (key=value), repeatable");
    sub->add_option("--out", c.out, "output directory")->required();
}

RunConfig effective_config(const Common& c, const std::vector<std::pair<std::string, std::string>>& flags) {
    RunConfig cfg;
    if (!c.config_file.empty()) cfg.load_file(c.config_file);
    for (const auto& [k, v] : flags) cfg.set(k, v);
    for (const auto& s : c.sets) cfg.assign(s);
    return cfg;
}

std::vector<UtteranceFeatures> load_features(const fs::path& p) {
    if (fs::is_directory(p)) {
        auto set = read_feature_dir(p);
        if (set.empty()) throw InputError("no .cvf files in '" + p.string() + "'");
        return set;
    }
    return {read_features(p)};
}

void require_supported_fs(int fs_hz) {
    if (fs_hz != kSampleRate)
        throw ConfigError("unsupported fs " + std::to_string(fs_hz) + " (only " + std::to_string(kSampleRate) +
                          " Hz is supported)");
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"cyclevc: cycle-consistent feature enhancement for neural-vocoder TTS"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for all subcommands");

    // Flags that are shortcuts for config keys, filled only when given.
    std::vector<std::pair<std::string, std::string>> flags;
    auto key_flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
        sub->add_option_function<std::string>(
            name, [&flags, key](const std::string& v) { flags.emplace_back(key, v); }, help);
    };

    Common common;
    std::function<void(RunLog&, const RunConfig&)> action;
    bool writes_log = true;

    // fixture
    auto* fixture = app.add_subcommand("fixture", "write the bundled formant-synthesized corpus as .wav files");
    add_common(fixture, common);
    key_flag(fixture, "--count", "fixture_count", "number of utterances");
    key_flag(fixture, "--seed", "fixture_seed", "corpus seed");
    fixture->callback([&] {
        action = [&](RunLog& log, const RunConfig& cfg) {
            const auto paths = write_fixture(cfg.fixture_config(), common.out);
            log.line("wrote " + std::to_string(paths.size()) + " utterances to " + common.out);
        };
    });

    // extract
    std::vector<std::string> wav_inputs;
    auto* extract = app.add_subcommand("extract", "analyze .wav files into .cvf feature files");
    add_common(extract, common);
    extract->add_option("--wav", wav_inputs, ".wav file or directory of .wav files, repeatable");
    key_flag(extract, "--fs", "fs", "sampling rate in Hz");
    extract->callback([&] {
        action = [&](RunLog& log, const RunConfig& cfg) {
            const int fs_hz = cfg.get_int("fs");
            require_supported_fs(fs_hz);
            std::vector<fs::path> files;
            for (const auto& w : wav_inputs) {
                if (fs::is_directory(w)) {
                    std::vector<fs::path> dir;
                    for (const auto& e : fs::directory_iterator(w))
                        if (e.is_regular_file() && e.path().extension() == ".wav") dir.push_back(e.path());
                    std::sort(dir.begin(), dir.end());
                    files.insert(files.end(), dir.begin(), dir.end());
                } else {
                    files.emplace_back(w);
                }
            }
            if (files.empty()) throw InputError("extract: no input waveforms (use --wav)");
            const SourceFilterAnalyzer analyzer(cfg.analysis_config());
            fs::create_directories(common.out);
            for (const auto& f : files) {
                const Waveform w = read_wav(f);
                if (w.sample_rate != fs_hz)
                    throw InputError(f.string() + ": sample rate " + std::to_string(w.sample_rate) +
                                     " differs from fs " + std::to_string(fs_hz));
                const auto feat = analyzer.analyze(w.samples, fs_hz, f.stem().string());
                write_features(feat, fs::path(common.out) / (feat.utt_id + ".cvf"));
                log.line(feat.utt_id + "\t" + std::to_string(feat.n_frames()) + " frames");
            }
        };
    });

    // simulate
    std::string natural_dir;
    auto* simulate = app.add_subcommand("simulate", "degrade natural features into synthetic-like features");
    add_common(simulate, common);
    simulate->add_option("--natural", natural_dir, "natural .cvf file or directory")->required();
    simulate->callback([&] {
        action = [&](RunLog& log, const RunConfig& cfg) {
            const DegradeConfig dc = cfg.degrade_config();
            const auto natural = load_features(natural_dir);
            const fs::path outp(common.out);
            fs::create_directories(outp / "synthetic");
            std::vector<ManifestEntry> manifest;
            for (const auto& y : natural) {
                const fs::path syn = fs::path("synthetic") / (y.utt_id + ".cvf");
                write_features(degrade(y, dc), outp / syn);
                const fs::path nat = fs::is_directory(natural_dir) ? fs::path(natural_dir) / (y.utt_id + ".cvf")
                                                                   : fs::path(natural_dir);
                manifest.push_back({y.utt_id, fs::absolute(nat).lexically_normal(), syn});
            }
            write_manifest(manifest, outp / "manifest.tsv");
            log.line("simulated " + std::to_string(natural.size()) + " utterances; manifest " +
                     (outp / "manifest.tsv").string());
        };
    });

    // train
    std::string manifest_path;
    auto* train_cmd = app.add_subcommand("train", "train the cycle conversion model on a paired manifest");
    add_common(train_cmd, common);
    train_cmd->add_option("--manifest", manifest_path, "TSV: utt_id, natural .cvf, synthetic .cvf")->required();
    key_flag(train_cmd, "--epochs", "epochs", "training epochs");
    key_flag(train_cmd, "--rho", "rho", "cycle loss weight");
    key_flag(train_cmd, "--seed", "seed", "training seed");
    key_flag(train_cmd, "--lr", "learning_rate", "learning rate");
    train_cmd->callback([&] {
        action = [&](RunLog& log, const RunConfig& cfg) {
            const TrainConfig tc = cfg.train_config();
            const PairedDataset data = pair_dataset(manifest_path);
            if (!data.report.trims.empty()) log.line(data.report.to_string());
            const TrainResult r = train(data.pairs, tc, [&](const TrainProgress& p) {
                log.line("epoch " + std::to_string(p.epoch) + "\tstot_l1 " + fmt("%.6f", p.loss.stot_l1) +
                         "\tcycle_l1 " + fmt("%.6f", p.loss.cycle_l1));
            });
            const fs::path outp(common.out);
            fs::create_directories(outp);
            save_model(r.model, outp / "model.ckpt");
            write_text_file(outp / "loss.tsv", loss_curve_tsv(r.curve));
            log.line("wrote " + (outp / "model.ckpt").string());
        };
    });

    // pseudo / enhance
    std::string model_path, features_path;
    auto convert = [&](const char* name, const char* help,
                       UtteranceFeatures (*op)(const CycleVCModel<float>&, const UtteranceFeatures&)) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, common);
        sub->add_option("--model", model_path, "checkpoint")->required();
        sub->add_option("--features", features_path, ".cvf file or directory")->required();
        sub->callback([&, op] {
            action = [&, op](RunLog& log, const RunConfig&) {
                const auto model = load_model(model_path);
                const auto set = load_features(features_path);
                fs::create_directories(common.out);
                for (const auto& u : set) {
                    write_features(op(model, u), fs::path(common.out) / (u.utt_id + ".cvf"));
                    log.line(u.utt_id);
                }
            };
        });
    };
    convert("pseudo", "pseudo-convert natural features through f(g(Y))", &generate_pseudo);
    convert("enhance", "enhance synthetic features through f(X)", &enhance);

    // scenario
    std::string scenario_name, sc_natural, sc_synthetic, sc_pseudo, sc_enhanced;
    auto* scenario = app.add_subcommand("scenario", "vocode the test features of a listening-test scenario");
    add_common(scenario, common);
    scenario->add_option("--scenario", scenario_name, "Natural, AM, TM, NPF or all")->required();
    scenario->add_option("--natural", sc_natural, "natural test features");
    scenario->add_option("--synthetic", sc_synthetic, "synthetic test features");
    scenario->add_option("--pseudo", sc_pseudo, "pseudo-converted test features");
    scenario->add_option("--enhanced", sc_enhanced, "enhanced test features");
    scenario->callback([&] {
        action = [&](RunLog& log, const RunConfig& cfg) {
            const int fs_hz = cfg.get_int("fs");
            require_supported_fs(fs_hz);
            const SourceFilterAnalyzer analyzer(cfg.analysis_config());
            ScenarioAssets assets;
            assets.fs = fs_hz;
            assets.backend = [&analyzer] { return std::make_unique<ResynthesisBackend>(analyzer); };
            const std::pair<FeatureKind, std::string*> dirs[] = {{FeatureKind::natural, &sc_natural},
                                                                 {FeatureKind::synthetic, &sc_synthetic},
                                                                 {FeatureKind::pseudo, &sc_pseudo},
                                                                 {FeatureKind::enhanced, &sc_enhanced}};
            for (const auto& [kind, dir] : dirs)
                if (!dir->empty()) assets.test_features[kind] = load_features(*dir);
            std::vector<Scenario> which;
            if (scenario_name == "all")
                which.assign(std::begin(kAllScenarios), std::end(kAllScenarios));
            else
                which.push_back(scenario_from_string(scenario_name));
            for (Scenario s : which) {
                const ScenarioResult r = run_scenario(s, assets, common.out);
                log.line(std::string(to_string(s)) + ": " + std::to_string(r.entries.size()) + " waveforms via " +
                         r.backend);
            }
        };
    });

    // mcd
    std::string mcd_a, mcd_b;
    auto* mcd = app.add_subcommand("mcd", "mean mel-cepstral distortion between two feature sets");
    add_common(mcd, common);
    mcd->add_option("--a", mcd_a, "first feature set")->required();
    mcd->add_option("--b", mcd_b, "second feature set")->required();
    mcd->callback([&] {
        action = [&](RunLog& log, const RunConfig&) {
            const double d = mcd_set(load_features(mcd_a), load_features(mcd_b));
            fs::create_directories(common.out);
            write_text_file(fs::path(common.out) / "mcd.txt", "mean_mcd_db\t" + fmt("%.6f", d) + "\n");
            log.line("mean MCD " + fmt("%.6f", d) + " dB");
        };
    });

    // plane
    std::string pn, ps, pp, pe;
    auto* plane = app.add_subcommand("plane", "MCD plane of natural, synthetic, pseudo and enhanced sets");
    add_common(plane, common);
    plane->add_option("--n", pn, "natural features")->required();
    plane->add_option("--s", ps, "synthetic features")->required();
    plane->add_option("--p", pp, "pseudo-converted features")->required();
    plane->add_option("--e", pe, "enhanced features")->required();
    plane->callback([&] {
        action = [&](RunLog& log, const RunConfig&) {
            const auto r = mcd_plane(load_features(pn), load_features(ps), load_features(pp), load_features(pe));
            fs::create_directories(common.out);
            emit_plane(r, fs::path(common.out) / "plane.svg", fs::path(common.out) / "plane.tsv");
            log.line(plane_tsv(r) + "stress " + fmt("%.6f", r.stress));
        };
    });

    // synth
    std::string synth_features;
    auto* synth = app.add_subcommand("synth", "vocode feature files into .wav files");
    add_common(synth, common);
    synth->add_option("--features", synth_features, ".cvf file or directory")->required();
    synth->callback([&] {
        action = [&](RunLog& log, const RunConfig& cfg) {
            const int fs_hz = cfg.get_int("fs");
            require_supported_fs(fs_hz);
            const SourceFilterAnalyzer analyzer(cfg.analysis_config());
            const ResynthesisBackend backend(analyzer);
            fs::create_directories(common.out);
            for (const auto& u : load_features(synth_features)) {
                write_wav(Waveform{backend.generate(u, fs_hz), fs_hz}, fs::path(common.out) / (u.utt_id + ".wav"));
                log.line(u.utt_id);
            }
        };
    });

    // run
    std::string corpus;
    bool dry_run = false;
    auto* run_cmd = app.add_subcommand("run", "end-to-end experiment on a corpus (default: bundled fixture)");
    add_common(run_cmd, common);
    run_cmd->add_option("--corpus", corpus, "directory of 24 kHz .wav files");
    run_cmd->add_flag("--dry-run", dry_run, "print the planned stages and exit");
    run_cmd->callback([&] {
        writes_log = !dry_run;
        action = [&](RunLog& log, const RunConfig& cfg) {
            EndToEndOptions opts;
            opts.corpus = corpus;
            opts.out = common.out;
            opts.config = cfg;
            opts.dry_run = dry_run;
            opts.log = [&log](const std::string& s) { log.line(s); };
            const EndToEndReport r = run_end_to_end(opts);
            if (!dry_run) {
                out << r.text;
                log.quiet(r.text);
            }
        };
    });

    if (argc > 1 && argv[1][0] != '-') {
        bool known = false;
        for (const auto* sub : app.get_subcommands({})) known |= sub->get_name() == argv[1];
        if (!known) {
            err << "usage error: unknown subcommand '" << argv[1] << "'\n";
            return 1;
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    }

    RunLog log(out);
    int code = 0;
    try {
        const RunConfig cfg = effective_config(common, flags);
        std::string cmdline;
        for (int i = 0; i < argc; ++i) cmdline += (i ? " " : "") + std::string(argv[i]);
        log.quiet("command " + cmdline);
        log.quiet("[config]");
        log.quiet(cfg.echo() + "[log]");
        action(log, cfg);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        log.quiet(std::string("error: ") + e.what());
        code = 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        log.quiet(std::string("internal error: ") + e.what());
        code = 2;
    }
    if (writes_log && !common.out.empty()) {
        try {
            fs::create_directories(common.out);
            write_text_file(fs::path(common.out) / "run.log", log.text());
        } catch (const std::exception& e) {
            err << "warning: could not write run.log: " << e.what() << "\n";
        }
    }
    return code;
}

} // namespace cyclevc::cli
