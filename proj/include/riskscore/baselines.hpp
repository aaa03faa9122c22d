#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskscore/evaluation.hpp"
#include "riskscore/problem.hpp"

namespace riskscore {

/// Elastic-net penalized logistic regression fit, real coefficients.
struct PenalizedFit {
    std::vector<double> coefficients;  // size d+1
    double mixing = 0.0;               // a in [0,1]; 1 = lasso, 0 = ridge
    double penalty = 0.0;              // g >= 0
    bool converged = false;
    std::size_t iterations = 0;
    double residual = 0.0;  // prox-gradient residual at exit
};

/// Minimizes (1/2n) sum log(1+exp(-<coef, y_i x_i>))
///           + g (a |coef|_1 + (1-a) |coef|_2^2)
/// by accelerated proximal gradient with backtracking. The intercept is not
/// penalized; sign constraints are enforced by projection. Warm starts come
/// from `initial`.
PenalizedFit fit_penalized_logistic(
    const Dataset& data, double mixing, double penalty,
    const std::vector<std::pair<std::size_t, int>>& sign_constraints = {},
    const std::vector<double>* initial = nullptr);

/// Clamp to the box, round half away from zero.
std::vector<std::int64_t> round_naive(std::span<const double> coef, const CoefficientSet& box);

/// Rescale so the largest non-intercept magnitude maps to the largest box
/// bound, then round. Throws on all-zero non-intercept input.
std::vector<std::int64_t> round_rescaled(std::span<const double> coef, const CoefficientSet& box);

/// Non-intercept coefficients to sign(coef) in {-1,0,+1}; the intercept is
/// refit by exact 1-D integer logistic minimization on the data.
std::vector<std::int64_t> unit_weights(std::span<const double> coef, const Dataset& data,
                                       const CoefficientSet& box);

/// Two-parameter recalibration sigma(A s + B) fit by logistic-loss Newton
/// steps (tiny ridge keeps A, B finite on separable inputs).
std::pair<double, double> platt_scale(const std::vector<double>& scores,
                                      const std::vector<int>& labels);

enum class PostProcessor { Rd, RdDcd, SeqRdDcd, RsRd, RsRdDcd, SeqRd, Unit };

std::string to_string(PostProcessor post);
PostProcessor post_processor_from_string(const std::string& name);

/// Applies a post-processor to a real-coefficient fit.
std::vector<std::int64_t> post_process(PostProcessor post, std::span<const double> coef,
                                       const ProblemSpec& spec);

struct PoolGrid {
    std::vector<std::pair<double, double>> params;  // (mixing, penalty)
};

/// 11 mixing values x `penalty_count` penalties log-spaced from the smallest
/// all-zero penalty down by a factor of 1e-4, per mixing value.
PoolGrid default_pool_grid(const Dataset& data, std::size_t mixing_count = 11,
                           std::size_t penalty_count = 100);

struct PoolEntry {
    double mixing = 0.0;
    double penalty = 0.0;
    std::vector<std::int64_t> coefficients;  // full-data post-processed model
    bool feasible = false;
    std::vector<std::string> violations;
    double cv_auc = 0.0;  // mean test AUC over folds
    double train_loss = 0.0;
};

struct PoolReport {
    std::vector<PoolEntry> entries;
    std::optional<RiskScoreModel> best;  // absent when no member is feasible
    /// Fraction of pool members violating each constraint, by description.
    std::vector<std::pair<std::string, double>> violation_rates;
    /// Outer-fold metrics of the selection procedure when nested CV ran.
    std::vector<MetricSet> nested_fold_metrics;
};

/// Fits the pool, post-processes every member, filters by feasibility, and
/// selects the best feasible member by mean CV test AUC. With nested=true an
/// outer CV wraps the selection so the reported fold metrics are unbiased.
PoolReport pooled_pipeline(const Dataset& data, const PoolGrid& grid, PostProcessor post,
                           const ProblemSpec& spec, int folds, std::uint64_t seed,
                           bool nested = false, int jobs = 1);

}  // namespace riskscore
