#include "cyclevc/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "cyclevc/error.hpp"
#include "cyclevc/feature_file.hpp"

namespace cyclevc {
namespace {

enum class Type { integer, u64, real, boolean, optimizer };

struct KeySpec {
    Type type;
    const char* value;
};

const std::map<std::string, KeySpec>& key_table() {
    static const std::map<std::string, KeySpec> table = {
        {"fs", {Type::integer, "24000"}},
        {"train_fraction", {Type::real, "0.8"}},
        // training
        {"epochs", {Type::integer, "15"}},
        {"rho", {Type::real, "1e-08"}},
        {"learning_rate", {Type::real, "0.0001"}},
        {"seed", {Type::u64, "1"}},
        {"optimizer", {Type::optimizer, "adam"}},
        {"adam_beta1", {Type::real, "0.9"}},
        {"adam_beta2", {Type::real, "0.999"}},
        {"adam_eps", {Type::real, "1e-20"}},
        {"teacher_forcing", {Type::boolean, "false"}},
        // network
        {"in_conv_layers", {Type::integer, "2"}},
        {"in_channels", {Type::integer, "128"}},
        {"kernel", {Type::integer, "3"}},
        {"gru_hidden", {Type::integer, "256"}},
        {"out_conv_layers", {Type::integer, "2"}},
        {"out_channels", {Type::integer, "128"}},
        {"residual", {Type::boolean, "true"}},
        // degradation
        {"smooth_window", {Type::integer, "9"}},
        {"variance_scale", {Type::real, "0.6"}},
        {"lf0_smooth_window", {Type::integer, "5"}},
        {"noise_std", {Type::real, "0.05"}},
        {"degrade_seed", {Type::u64, "7"}},
        // analysis
        {"f0_floor", {Type::real, "60"}},
        {"f0_ceil", {Type::real, "400"}},
        {"alpha", {Type::real, "0.466"}},
        {"fft_size", {Type::integer, "2048"}},
        {"voicing_threshold", {Type::real, "0.2"}},
        {"silence_db", {Type::real, "-45"}},
        {"unvoiced_f0", {Type::real, "500"}},
        {"analysis_noise_seed", {Type::u64, "24301"}},
        // fixture corpus
        {"fixture_count", {Type::integer, "20"}},
        {"fixture_min_seconds", {Type::real, "1.6"}},
        {"fixture_max_seconds", {Type::real, "2.4"}},
        {"fixture_seed", {Type::u64, "2020"}},
    };
    return table;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

// Canonical spelling of a value, or throws.
std::string canonical(const std::string& key, Type type, const std::string& raw) {
    auto bad = [&](const char* what) {
        return ConfigError("invalid value '" + raw + "' for key '" + key + "' (expected " + what + ")");
    };
    switch (type) {
    case Type::integer: {
        long long v = 0;
        if (!parse_number(raw, v) || v < INT32_MIN || v > INT32_MAX) throw bad("an integer");
        return std::to_string(v);
    }
    case Type::u64: {
        std::uint64_t v = 0;
        if (!parse_number(raw, v)) throw bad("a non-negative integer");
        return std::to_string(v);
    }
    case Type::real: {
        double v = 0;
        if (!parse_number(raw, v) || !std::isfinite(v)) throw bad("a finite number");
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
        (void)ec;
        return std::string(buf, p);
    }
    case Type::boolean:
        if (raw == "true" || raw == "1" || raw == "yes") return "true";
        if (raw == "false" || raw == "0" || raw == "no") return "false";
        throw bad("true or false");
    case Type::optimizer:
        if (raw == "adam" || raw == "sgd") return raw;
        throw bad("adam or sgd");
    }
    throw bad("a value");
}

} // namespace

RunConfig::RunConfig() {
    for (const auto& [k, spec] : key_table()) values_[k] = canonical(k, spec.type, spec.value);
}

void RunConfig::set(const std::string& key, const std::string& value) {
    auto it = key_table().find(key);
    if (it == key_table().end()) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = canonical(key, it->second.type, trim(value));
}

void RunConfig::assign(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.find('=') == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
        try {
            assign(line);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void RunConfig::load_file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    load_text(std::string(bytes.begin(), bytes.end()), path.string());
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

double RunConfig::get_double(const std::string& key) const {
    double v = 0;
    parse_number(get(key), v);
    return v;
}

int RunConfig::get_int(const std::string& key) const {
    int v = 0;
    parse_number(get(key), v);
    return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    std::uint64_t v = 0;
    parse_number(get(key), v);
    return v;
}

bool RunConfig::get_bool(const std::string& key) const { return get(key) == "true"; }

std::vector<std::string> RunConfig::keys() const {
    std::vector<std::string> k;
    for (const auto& [key, _] : values_) k.push_back(key);
    return k;
}

std::string RunConfig::echo() const {
    std::string s;
    for (const auto& [k, v] : values_) s += k + " = " + v + "\n";
    return s;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig c;
    c.epochs = get_int("epochs");
    c.rho = get_double("rho");
    c.learning_rate = get_double("learning_rate");
    c.seed = get_u64("seed");
    c.optimizer = get("optimizer") == "sgd" ? OptimizerKind::sgd : OptimizerKind::adam;
    c.adam_beta1 = get_double("adam_beta1");
    c.adam_beta2 = get_double("adam_beta2");
    c.adam_eps = get_double("adam_eps");
    c.teacher_forcing = get_bool("teacher_forcing");
    c.arch.in_conv_layers = get_int("in_conv_layers");
    c.arch.in_channels = get_int("in_channels");
    c.arch.kernel = get_int("kernel");
    c.arch.gru_hidden = get_int("gru_hidden");
    c.arch.out_conv_layers = get_int("out_conv_layers");
    c.arch.out_channels = get_int("out_channels");
    c.arch.residual = get_bool("residual");
    c.validate();
    return c;
}

DegradeConfig RunConfig::degrade_config() const {
    DegradeConfig c;
    c.smooth_window = get_int("smooth_window");
    c.variance_scale = get_double("variance_scale");
    c.lf0_smooth_window = get_int("lf0_smooth_window");
    c.noise_std = get_double("noise_std");
    c.seed = get_u64("degrade_seed");
    c.validate();
    return c;
}

AnalysisConfig RunConfig::analysis_config() const {
    AnalysisConfig c;
    c.f0_floor = get_double("f0_floor");
    c.f0_ceil = get_double("f0_ceil");
    c.alpha = get_double("alpha");
    c.fft_size = get_int("fft_size");
    c.voicing_threshold = get_double("voicing_threshold");
    c.silence_db = get_double("silence_db");
    c.unvoiced_f0 = get_double("unvoiced_f0");
    c.noise_seed = get_u64("analysis_noise_seed");
    if (c.f0_floor <= 0 || c.f0_ceil <= c.f0_floor) throw ConfigError("need 0 < f0_floor < f0_ceil");
    if (c.fft_size < 256 || (c.fft_size & (c.fft_size - 1)) != 0)
        throw ConfigError("fft_size must be a power of two >= 256");
    if (!(c.alpha > -1 && c.alpha < 1)) throw ConfigError("alpha must lie in (-1, 1)");
    return c;
}

FixtureConfig RunConfig::fixture_config() const {
    FixtureConfig c;
    c.count = get_int("fixture_count");
    c.min_seconds = get_double("fixture_min_seconds");
    c.max_seconds = get_double("fixture_max_seconds");
    c.seed = get_u64("fixture_seed");
    if (c.count < 1) throw ConfigError("fixture_count must be positive");
    if (c.min_seconds <= 0 || c.max_seconds < c.min_seconds)
        throw ConfigError("need 0 < fixture_min_seconds <= fixture_max_seconds");
    return c;
}

} // namespace cyclevc
