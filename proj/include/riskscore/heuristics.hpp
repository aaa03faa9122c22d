#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "riskscore/loss.hpp"
#include "riskscore/problem.hpp"
#include "riskscore/rng.hpp"

namespace riskscore {

/// Per-component rounding choices {floor, ceil} of an anchor, intersected
/// with the lattice box. Holds at most 2^(d+1) points.
struct RoundingLattice {
    std::vector<double> anchor;
    std::vector<std::pair<std::int64_t, std::int64_t>> choices;

    double count() const {
        double c = 1.0;
        for (const auto& [lo, hi] : choices) c *= (lo == hi ? 1.0 : 2.0);
        return c;
    }
    bool contains(const std::vector<std::int64_t>& point) const {
        if (point.size() != choices.size()) return false;
        for (std::size_t j = 0; j < choices.size(); ++j) {
            if (point[j] != choices[j].first && point[j] != choices[j].second) return false;
        }
        return true;
    }
};

RoundingLattice rounding_lattice(std::span<const double> anchor, const CoefficientSet& box);

struct HeuristicStats {
    std::uint64_t loss_evaluations = 0;     // candidate-level evaluations
    std::uint64_t example_evaluations = 0;  // summed over examples touched
    std::uint64_t golden_fallbacks = 0;     // golden result beaten by brute force
};

/// Discrete coordinate descent: repeatedly applies the best single-coordinate
/// integer move until no move strictly improves the objective. The result is
/// 1-opt. The per-coordinate line search uses golden-section over the loss
/// slice when the slice is long, brute force otherwise; golden results are
/// verified against their integer neighbours and fall back to brute force on
/// disagreement. When a model-size constraint is tight the direction set
/// shrinks to the intercept plus currently non-zero coordinates.
std::vector<std::int64_t> dcd_polish(std::vector<std::int64_t> coef, const ProblemSpec& spec,
                                     const LossEngine& engine,
                                     std::vector<std::size_t> directions = {},
                                     HeuristicStats* stats = nullptr);

/// Greedy per-component rounding: each step evaluates every remaining
/// (component, up/down) pair and commits the objective-minimizing one.
/// Ties break on the lowest component index, down before up.
std::vector<std::int64_t> sequential_round(std::span<const double> anchor,
                                           const ProblemSpec& spec, const LossEngine& engine,
                                           HeuristicStats* stats = nullptr);

/// Margin for subsample-based incumbent gates:
///   eps = delta_max * sqrt(((log(1/delta) + d log 2) / 2) (1/m) (1 - m^2/n^2)).
double subsample_threshold(double delta, std::size_t m, std::size_t n, double delta_max,
                           std::size_t d);

/// Conservative loss-spread bound over the box (per-example worst minus
/// best-case loss), used to normalize the subsample threshold.
double loss_spread_bound(const Dataset& data, const CoefficientSet& box,
                         std::optional<std::size_t> r_max = std::nullopt);

/// Same bound over arbitrary per-component intervals (the rounding lattice
/// of an anchor does not straddle zero in general).
double loss_spread_bound(const Dataset& data, const std::vector<double>& lb,
                         const std::vector<double>& ub);

/// Rounds on an m-point sample drawn without replacement; proposes the
/// candidate only when the subsample objective clears v_max by the
/// concentration margin and the full objective then confirms it.
std::optional<std::vector<std::int64_t>> subsampled_round(
    std::span<const double> anchor, const ProblemSpec& spec, const LossEngine& full_engine,
    std::size_t m, double delta, double v_max, Rng& rng, HeuristicStats* stats = nullptr);

}  // namespace riskscore
