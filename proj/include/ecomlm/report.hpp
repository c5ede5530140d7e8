#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ecomlm/eval.hpp"

namespace ecomlm::report {

// Fixed-width accuracy table: one row per language, task columns
// AP AP^MC PP^MC MCA MCA^MC (percent, one decimal), plus a trailing
// non-English average line when non-English rows exist.
std::string render_eval_table(const eval::EvalReport& report);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
};

// Ordinary least squares via the normal equations. Needs >= 2 points;
// r2 is defined as 1 when the residuals vanish (including the exact
// two-point fit).
LinearFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys);

struct MergeCurvePoint {
    double alpha = 0.0;
    double general_score = 0.0;
    double ecom_score = 0.0;
};

struct MergeCurve {
    std::vector<MergeCurvePoint> points; // sorted by alpha
    LinearFit general_fit;
    LinearFit ecom_fit;

    std::string to_csv() const; // alpha,general_score,ecom_score
    nlohmann::json to_json() const;
};

// Joins the sweep manifest's alphas with per-alpha score records. The two
// alpha sets must match exactly (tolerance 1e-12); throws ConfigError
// otherwise.
MergeCurve merge_curve(const std::vector<double>& manifest_alphas,
                       const std::vector<MergeCurvePoint>& scores);

} // namespace ecomlm::report
