#ifndef CYCLEVC_RUN_CONFIG_HPP
#define CYCLEVC_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cyclevc/analysis.hpp"
#include "cyclevc/fixture.hpp"
#include "cyclevc/training.hpp"
#include "cyclevc/ttsim.hpp"

namespace cyclevc {

// Every tunable of the toolkit as a flat key=value map. Values start at
// their defaults; a config file is applied first, then --set overrides.
// Unknown keys and malformed values throw ConfigError naming the token.
class RunConfig {
public:
    RunConfig();

    // Lines "key = value"; blank lines and '#' comments are ignored.
    void load_file(const std::filesystem::path& path);
    void load_text(const std::string& text, const std::string& origin = "<text>");
    void set(const std::string& key, const std::string& value);
    // "key=value"
    void assign(const std::string& assignment);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    std::vector<std::string> keys() const;

    // Sorted "key = value" lines, loadable with load_text.
    std::string echo() const;

    TrainConfig train_config() const;
    DegradeConfig degrade_config() const;
    AnalysisConfig analysis_config() const;
    FixtureConfig fixture_config() const;

private:
    std::map<std::string, std::string> values_;
};

} // namespace cyclevc

#endif
