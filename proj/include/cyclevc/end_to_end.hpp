#ifndef CYCLEVC_END_TO_END_HPP
#define CYCLEVC_END_TO_END_HPP

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cyclevc/eval.hpp"
#include "cyclevc/run_config.hpp"

namespace cyclevc {

// Required gap (dB) between the enhanced distances and dist(S, N).
inline constexpr double kOrderingMargin = 0.1;

struct EndToEndOptions {
    // Directory of 24 kHz .wav files; empty means "generate the fixture corpus".
    std::filesystem::path corpus;
    std::filesystem::path out;
    RunConfig config;
    bool dry_run = false;
    std::function<void(const std::string&)> log;
};

struct EndToEndReport {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    MCDPlaneResult plane;
    double dist_sn = 0.0;
    double dist_en = 0.0;
    double dist_ep = 0.0;
    bool en_ok = false;  // dist(E,N) + margin <= dist(S,N)
    bool ep_ok = false;  // dist(E,P) + margin <= dist(S,N)
    std::string text;    // contents of report.txt

    bool passed() const { return en_ok && ep_ok; }
};

// Stage names in execution order for the given options.
std::vector<std::string> planned_stages(const EndToEndOptions& opts);

// Runs fixture/extract -> simulate -> split -> train -> pseudo -> enhance ->
// scenario -> plane -> report under opts.out. A failing stage raises
// StageError naming it. With dry_run only the plan is logged and nothing is
// written.
EndToEndReport run_end_to_end(const EndToEndOptions& opts);

} // namespace cyclevc

#endif
