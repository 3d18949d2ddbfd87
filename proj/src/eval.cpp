#include "cyclevc/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "cyclevc/feature_file.hpp"
#include "cyclevc/mds.hpp"
#include "cyclevc/training.hpp"

namespace cyclevc {
namespace {

std::map<std::string, const UtteranceFeatures*> index_by_id(std::span<const UtteranceFeatures> set,
                                                             const char* which) {
    std::map<std::string, const UtteranceFeatures*> m;
    for (const auto& u : set)
        if (!m.emplace(u.utt_id, &u).second)
            throw PairingError(std::string("duplicate utt_id '") + u.utt_id + "' in " + which + " set");
    return m;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    // avoid "-0.000"
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

} // namespace

double mcd_utterance(const Eigen::MatrixXf& a, const Eigen::MatrixXf& b) {
    if (a.rows() != b.rows()) throw PairingError("mcd_utterance: frame counts differ");
    if (a.rows() == 0) return 0.0;
    double sum = 0.0;
    for (Index t = 0; t < a.rows(); ++t) sum += mcd_frame(a.row(t), b.row(t));
    return sum / static_cast<double>(a.rows());
}

double mcd_set(std::span<const UtteranceFeatures> a, std::span<const UtteranceFeatures> b) {
    const auto ia = index_by_id(a, "first");
    const auto ib = index_by_id(b, "second");
    if (ia.empty()) throw InputError("mcd_set: empty feature set");
    for (const auto& [id, _] : ib)
        if (!ia.count(id)) throw PairingError("mcd_set: utterance '" + id + "' missing from first set");
    double total = 0.0;
    for (const auto& [id, ua] : ia) {
        auto it = ib.find(id);
        if (it == ib.end()) throw PairingError("mcd_set: utterance '" + id + "' missing from second set");
        const PairedUtterance p = make_pair(id, *ua, *it->second);
        total += mcd_utterance(p.src.mcep, p.tgt.mcep);
    }
    return total / static_cast<double>(ia.size());
}

double MCDPlaneResult::distance(const std::string& a, const std::string& b) const {
    auto pos = [&](const std::string& l) {
        auto it = std::find(labels.begin(), labels.end(), l);
        if (it == labels.end()) throw InputError("no label '" + l + "' in MCD plane");
        return static_cast<Index>(it - labels.begin());
    };
    return dist(pos(a), pos(b));
}

MCDPlaneResult plane_from_distances(std::vector<std::string> labels, const Eigen::MatrixXd& dist) {
    const auto n = static_cast<Index>(labels.size());
    if (dist.rows() != n || dist.cols() != n) throw ShapeError("distance matrix does not match labels");
    const auto mds = classical_mds(dist, 2);
    return {std::move(labels), dist, mds.coords, mds.stress};
}

MCDPlaneResult mcd_plane(std::span<const UtteranceFeatures> natural,
                         std::span<const UtteranceFeatures> synthetic,
                         std::span<const UtteranceFeatures> pseudo,
                         std::span<const UtteranceFeatures> enhanced) {
    const std::span<const UtteranceFeatures> sets[4] = {natural, synthetic, pseudo, enhanced};
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < i; ++j) d(i, j) = d(j, i) = mcd_set(sets[i], sets[j]);
    return plane_from_distances({"N", "S", "P", "E"}, d);
}

std::string plane_tsv(const MCDPlaneResult& r) {
    std::string s = "label";
    for (const auto& l : r.labels) s += "\t" + l;
    s += "\n";
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        s += r.labels[i];
        for (std::size_t j = 0; j < r.labels.size(); ++j)
            s += "\t" + fixed(r.dist(static_cast<Index>(i), static_cast<Index>(j)), 3);
        s += "\n";
    }
    return s;
}

std::string plane_svg(const MCDPlaneResult& r) {
    constexpr double size = 480.0, margin = 70.0;
    const Index n = static_cast<Index>(r.labels.size());
    double extent = 0.0;
    for (Index i = 0; i < n; ++i) extent = std::max(extent, r.coords.row(i).cwiseAbs().maxCoeff());
    const double scale = extent > 0.0 ? (size / 2 - margin) / extent : 0.0;
    auto px = [&](Index i) { return size / 2 + scale * r.coords(i, 0); };
    auto py = [&](Index i) { return size / 2 - scale * r.coords(i, 1); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" viewBox=\"0 0 480 480\">\n";
    s += "<title>MCD plane (stress " + fixed(r.stress, 4) + ")</title>\n";
    s += "<rect width=\"480\" height=\"480\" fill=\"white\"/>\n";
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            s += "<line x1=\"" + fixed(px(i), 2) + "\" y1=\"" + fixed(py(i), 2) + "\" x2=\"" + fixed(px(j), 2) +
                 "\" y2=\"" + fixed(py(j), 2) + "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
            s += "<text class=\"edge\" x=\"" + fixed((px(i) + px(j)) / 2, 2) + "\" y=\"" +
                 fixed((py(i) + py(j)) / 2 - 4, 2) + "\" font-size=\"11\" fill=\"#555\" text-anchor=\"middle\">" +
                 fixed(r.dist(i, j), 2) + " dB</text>\n";
        }
    for (Index i = 0; i < n; ++i) {
        s += "<circle cx=\"" + fixed(px(i), 2) + "\" cy=\"" + fixed(py(i), 2) + "\" r=\"6\" fill=\"#1f77b4\"/>\n";
        s += "<text class=\"label\" x=\"" + fixed(px(i) + 9, 2) + "\" y=\"" + fixed(py(i) - 9, 2) +
             "\" font-size=\"16\" font-weight=\"bold\">" + r.labels[static_cast<std::size_t>(i)] + "</text>\n";
    }
    s += "<text class=\"stress\" x=\"10\" y=\"470\" font-size=\"11\">stress " + fixed(r.stress, 4) + "</text>\n";
    s += "</svg>\n";
    return s;
}

void emit_plane(const MCDPlaneResult& result, const std::filesystem::path& svg_path,
                const std::filesystem::path& tsv_path) {
    write_text_file(svg_path, plane_svg(result));
    write_text_file(tsv_path, plane_tsv(result));
}

} // namespace cyclevc
