#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "riskscore/dataset.hpp"

namespace riskscore {

/// A trained risk score: integer points per feature plus an intercept. The
/// predicted risk at total score s is 1/(1+exp(-s)).
struct RiskScoreModel {
    std::vector<std::int64_t> coefficients;  // size d+1, [0] is the intercept
    std::vector<std::string> names;          // aligned with coefficients
    std::string method;                      // provenance
    std::string options_digest;
    double gap = 1.0;

    std::size_t dim() const { return names.empty() ? 0 : names.size() - 1; }
    double score(const Dataset& data, std::size_t i) const;
    /// Sum of feature points only (the number a user adds up by hand).
    double points(const Dataset& data, std::size_t i) const;
};

double predicted_risk(double score);

/// Expected calibration error, in percent: mean |p_i - pbar_{s_i}| where
/// pbar_s is the empirical positive rate among examples scoring s.
double cal(const RiskScoreModel& model, const Dataset& data);

/// Pairwise rank accuracy with ties counted 1/2. Exact double loop for
/// n <= 10^4; rank-based otherwise.
double auc(const RiskScoreModel& model, const Dataset& data);

double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels);

struct ReliabilityPoint {
    double predicted = 0.0;
    double observed = 0.0;
    std::size_t count = 0;
};

struct ReliabilityDiagram {
    std::vector<ReliabilityPoint> points;
    bool binned = false;  // true when scores were grouped into 10 bins
};

/// Per-score points when there are at most 30 distinct scores, otherwise 10
/// equal-frequency bins.
ReliabilityDiagram reliability_diagram(const RiskScoreModel& model, const Dataset& data);

struct RiskTableRow {
    // Inclusive range of observed point totals covered by this row.
    std::int64_t score_lo = 0;
    std::int64_t score_hi = 0;
    double risk = 0.0;       // predicted risk at score_lo..score_hi (midpoint if collapsed)
    bool below_cut = false;  // rendered as "< x%"
    bool above_cut = false;  // rendered as "> y%"
};

struct RiskTable {
    std::vector<RiskTableRow> rows;
    std::string rendered;  // two-line SCORE / RISK table
};

/// Table of observed point totals against predicted risk, one decimal place.
/// Runs of extreme scores whose risk leaves [5%, 95%] collapse into a single
/// "< 5.0%" or "> 95.0%" group when the run has at least two scores.
RiskTable render_risk_table(const RiskScoreModel& model, const Dataset& data);

struct MetricSet {
    double cal = 0.0;  // percent
    double auc = 0.0;
    double loss = 0.0;
};

MetricSet evaluate_model(const RiskScoreModel& model, const Dataset& data);

struct CvReport {
    std::vector<MetricSet> fold_test;   // one per fold
    MetricSet mean, min, max;
    RiskScoreModel final_model;         // trained on the full dataset
    std::vector<RiskScoreModel> fold_models;
};

/// K-fold cross-validation of a deterministic trainer; metrics are computed
/// on each held-out fold and the final model is fit on everything. Trainers
/// that tune their own parameters must do so inside the callback (nested CV).
CvReport cross_validate(const std::function<RiskScoreModel(const Dataset&)>& trainer,
                        const Dataset& data, int k, std::uint64_t seed);

/// Plain-text model file: '@'-prefixed metadata then one "name points" line
/// per feature (intercept carried in the metadata).
void save_model(const RiskScoreModel& model, const std::string& path);
RiskScoreModel load_model(const std::string& path);

}  // namespace riskscore
