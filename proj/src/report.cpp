#include "ecomlm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "ecomlm/errors.hpp"

namespace ecomlm::report {

using nlohmann::json;

namespace {

const std::vector<std::pair<std::string, std::string>>& task_columns() {
    static const std::vector<std::pair<std::string, std::string>> cols = {
        {"ap", "AP"}, {"ap_mc", "AP^MC"}, {"pp_mc", "PP^MC"}, {"mca", "MCA"}, {"mca_mc", "MCA^MC"}};
    return cols;
}

} // namespace

std::string render_eval_table(const eval::EvalReport& report) {
    // languages in evaluation order, en first
    std::vector<std::string> languages;
    for (const std::string lang : {"en", "de", "es", "fr", "it"}) {
        for (const auto& [key, g] : report.groups) {
            if (key.second == lang) {
                languages.push_back(lang);
                break;
            }
        }
    }

    char buf[64];
    std::string out;
    out += "language  ";
    for (const auto& [id, label] : task_columns()) {
        std::snprintf(buf, sizeof(buf), "%8s", label.c_str());
        out += buf;
    }
    out += '\n';

    for (const auto& lang : languages) {
        std::snprintf(buf, sizeof(buf), "%-10s", lang.c_str());
        out += buf;
        for (const auto& [id, label] : task_columns()) {
            const auto it = report.groups.find({id, lang});
            if (it == report.groups.end()) {
                std::snprintf(buf, sizeof(buf), "%8s", "-");
            } else {
                std::snprintf(buf, sizeof(buf), "%8.1f", 100.0 * it->second.accuracy);
            }
            out += buf;
        }
        out += '\n';
    }

    if (const auto avg = report.non_english_avg()) {
        std::snprintf(buf, sizeof(buf), "non-En avg.: %.1f\n", 100.0 * *avg);
        out += buf;
    }
    return out;
}

LinearFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw ConfigError("fit_linear: need at least 2 (x, y) points");
    }
    const auto n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw ConfigError("fit_linear: x values are all equal");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double pred = fit.intercept + fit.slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - my) * (ys[i] - my);
    }
    fit.r2 = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    if (xs.size() == 2) fit.r2 = 1.0; // two points are fitted exactly
    return fit;
}

std::string MergeCurve::to_csv() const {
    std::string out = "alpha,general_score,ecom_score\n";
    char buf[128];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f\n", p.alpha, p.general_score,
                      p.ecom_score);
        out += buf;
    }
    return out;
}

json MergeCurve::to_json() const {
    json j;
    json pts = json::array();
    for (const auto& p : points) {
        pts.push_back({{"alpha", p.alpha},
                       {"general_score", p.general_score},
                       {"ecom_score", p.ecom_score}});
    }
    j["points"] = std::move(pts);
    j["general_fit"] = {{"slope", general_fit.slope},
                        {"intercept", general_fit.intercept},
                        {"r2", general_fit.r2}};
    j["ecom_fit"] = {{"slope", ecom_fit.slope},
                     {"intercept", ecom_fit.intercept},
                     {"r2", ecom_fit.r2}};
    return j;
}

MergeCurve merge_curve(const std::vector<double>& manifest_alphas,
                       const std::vector<MergeCurvePoint>& scores) {
    if (manifest_alphas.size() != scores.size()) {
        throw ConfigError("merge_curve: manifest lists " + std::to_string(manifest_alphas.size()) +
                          " alphas but " + std::to_string(scores.size()) +
                          " score records were given");
    }
    MergeCurve curve;
    curve.points = scores;
    std::sort(curve.points.begin(), curve.points.end(),
              [](const MergeCurvePoint& a, const MergeCurvePoint& b) { return a.alpha < b.alpha; });
    auto sorted_alphas = manifest_alphas;
    std::sort(sorted_alphas.begin(), sorted_alphas.end());
    for (size_t i = 0; i < sorted_alphas.size(); ++i) {
        if (std::fabs(sorted_alphas[i] - curve.points[i].alpha) > 1e-12) {
            char buf[128];
            std::snprintf(buf, sizeof(buf),
                          "merge_curve: alpha mismatch (manifest %.6f vs report %.6f)",
                          sorted_alphas[i], curve.points[i].alpha);
            throw ConfigError(buf);
        }
    }

    std::vector<double> xs, general, ecom;
    for (const auto& p : curve.points) {
        xs.push_back(p.alpha);
        general.push_back(p.general_score);
        ecom.push_back(p.ecom_score);
    }
    curve.general_fit = fit_linear(xs, general);
    curve.ecom_fit = fit_linear(xs, ecom);
    return curve;
}

} // namespace ecomlm::report
