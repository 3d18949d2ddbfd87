#include "cyclevc/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>

#include "cyclevc/feature_file.hpp"

namespace cyclevc {
namespace {

constexpr const char* kCheckpointTag = "cyclevc-checkpoint=1";

std::string format_float(float v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_vector(const Eigen::VectorXf& v) {
    std::string s;
    for (Index i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += format_float(v(i));
    }
    return s;
}

Eigen::VectorXf parse_vector(const std::string& key, const std::string& text) {
    std::vector<float> values;
    const char* p = text.data();
    const char* end = p + text.size();
    while (p < end) {
        while (p < end && *p == ' ') ++p;
        if (p == end) break;
        float v = 0;
        auto res = std::from_chars(p, end, v);
        if (res.ec != std::errc()) throw FormatError("checkpoint: bad number in '" + key + "'");
        values.push_back(v);
        p = res.ptr;
    }
    if (values.size() != static_cast<std::size_t>(kFullDim))
        throw FormatError("checkpoint: '" + key + "' has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(kFullDim));
    return Eigen::Map<Eigen::VectorXf>(values.data(), static_cast<Index>(values.size()));
}

int parse_int(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("checkpoint: missing header key '" + key + "'");
    int v = 0;
    auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (res.ec != std::errc() || res.ptr != it->second.data() + it->second.size())
        throw FormatError("checkpoint: bad integer for '" + key + "'");
    return v;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("checkpoint: missing header key '" + key + "'");
    return it->second;
}

} // namespace

std::vector<unsigned char> encode_model(const CycleVCModel<float>& model) {
    const Architecture& a = model.arch;
    std::ostringstream h;
    h << kCheckpointTag << '\n'
      << "in_dim=" << a.in_dim << '\n'
      << "out_dim=" << a.out_dim << '\n'
      << "in_conv_layers=" << a.in_conv_layers << '\n'
      << "in_channels=" << a.in_channels << '\n'
      << "kernel=" << a.kernel << '\n'
      << "gru_hidden=" << a.gru_hidden << '\n'
      << "out_conv_layers=" << a.out_conv_layers << '\n'
      << "out_channels=" << a.out_channels << '\n'
      << "residual=" << (a.residual ? 1 : 0) << '\n'
      << "params_per_network=" << model.theta.parameter_count() << '\n';
    for (const auto& [name, stats] : {std::pair{"norm_src", &model.norm_src}, std::pair{"norm_tgt", &model.norm_tgt}}) {
        h << name << "_domain=" << to_string(stats->domain) << '\n'
          << name << "_mean=" << format_vector(stats->mean) << '\n'
          << name << "_std=" << format_vector(stats->std) << '\n';
    }
    h << '\n';
    const std::string header = h.str();
    std::vector<unsigned char> out(header.begin(), header.end());
    for (const Network<float>* net : {&model.theta, &model.phi})
        for (const auto* m : net->tensors())
            for (Index i = 0; i < m->size(); ++i) {
                const auto bits = std::bit_cast<std::uint32_t>((*m)(i));
                for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xffu));
            }
    return out;
}

CycleVCModel<float> decode_model(const std::vector<unsigned char>& bytes) {
    // header: lines up to the first empty line
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    bool first = true, terminated = false;
    while (pos < bytes.size()) {
        std::size_t eol = pos;
        while (eol < bytes.size() && bytes[eol] != '\n') ++eol;
        if (eol == bytes.size()) break;
        std::string line(bytes.begin() + static_cast<long>(pos), bytes.begin() + static_cast<long>(eol));
        pos = eol + 1;
        if (line.empty()) {
            terminated = true;
            break;
        }
        if (first) {
            if (line != kCheckpointTag) throw FormatError("checkpoint: bad magic line");
            first = false;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("checkpoint: malformed header line '" + line + "'");
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (first) throw FormatError("checkpoint: bad magic line");
    if (!terminated) throw FormatError("checkpoint: header not terminated by an empty line");

    Architecture a;
    a.in_dim = parse_int(kv, "in_dim");
    a.out_dim = parse_int(kv, "out_dim");
    a.in_conv_layers = parse_int(kv, "in_conv_layers");
    a.in_channels = parse_int(kv, "in_channels");
    a.kernel = parse_int(kv, "kernel");
    a.gru_hidden = parse_int(kv, "gru_hidden");
    a.out_conv_layers = parse_int(kv, "out_conv_layers");
    a.out_channels = parse_int(kv, "out_channels");
    a.residual = parse_int(kv, "residual") != 0;
    if (a.in_dim != kFullDim || a.out_dim != kMcepDim)
        throw FormatError("checkpoint: model must map 50 -> 45 dims");
    try {
        a.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }

    CycleVCModel<float> model = CycleVCModel<float>::zeros(a, NormStats::identity(Domain::source),
                                                           NormStats::identity(Domain::target));
    const Index declared = parse_int(kv, "params_per_network");
    if (declared != model.theta.parameter_count())
        throw FormatError("checkpoint: params_per_network=" + std::to_string(declared) +
                          " does not match the declared architecture (" +
                          std::to_string(model.theta.parameter_count()) + ")");
    for (const auto& [name, stats] : {std::pair{"norm_src", &model.norm_src}, std::pair{"norm_tgt", &model.norm_tgt}}) {
        const std::string n(name);
        stats->domain = domain_from_string(require(kv, n + "_domain"));
        stats->mean = parse_vector(n + "_mean", require(kv, n + "_mean"));
        stats->std = parse_vector(n + "_std", require(kv, n + "_std"));
    }

    const std::size_t expected = static_cast<std::size_t>(2 * model.theta.parameter_count()) * 4;
    const std::size_t actual = bytes.size() - pos;
    if (actual != expected)
        throw FormatError("checkpoint: parameter blob has " + std::to_string(actual) +
                          " bytes, expected " + std::to_string(expected));
    const unsigned char* p = bytes.data() + pos;
    for (Network<float>* net : {&model.theta, &model.phi})
        for (auto* m : net->tensors())
            for (Index i = 0; i < m->size(); ++i, p += 4) {
                const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                                           (static_cast<std::uint32_t>(p[2]) << 16) |
                                           (static_cast<std::uint32_t>(p[3]) << 24);
                (*m)(i) = std::bit_cast<float>(bits);
            }
    return model;
}

void save_model(const CycleVCModel<float>& model, const std::filesystem::path& path) {
    write_file_bytes(path, encode_model(model));
}

CycleVCModel<float> load_model(const std::filesystem::path& path) {
    try {
        return decode_model(read_file_bytes(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace cyclevc
