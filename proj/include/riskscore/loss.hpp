#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "riskscore/coefficients.hpp"
#include "riskscore/dataset.hpp"

namespace riskscore {

/// Supporting hyperplane of the loss at an anchor point: the pointwise
/// maximum of cuts under-approximates the loss everywhere.
struct Cut {
    std::vector<double> anchor;
    double value = 0.0;
    std::vector<double> gradient;

    double evaluate(std::span<const double> point) const {
        double v = value;
        for (std::size_t j = 0; j < gradient.size(); ++j) {
            v += gradient[j] * (point[j] - anchor[j]);
        }
        return v;
    }
};

/// Per-example extremes of <coef, x_i> over the coefficient box, plus the
/// extrema across examples.
struct ScoreBounds {
    std::vector<double> per_example_min;
    std::vector<double> per_example_max;
    double global_min = 0.0;
    double global_max = 0.0;
};

/// Precomputed log(1+exp(-s)) for every integer margin the data and lattice
/// can produce. Margins here include the label sign.
struct LossTable {
    std::int64_t score_min = 0;
    std::vector<double> values;

    std::size_t rows() const { return values.size(); }
    double at(std::int64_t s) const { return values[static_cast<std::size_t>(s - score_min)]; }
    bool covers(std::int64_t s) const {
        return s >= score_min && s < score_min + static_cast<std::int64_t>(values.size());
    }
};

/// Normalized logistic loss (1/n) sum log(1+exp(-<coef, y_i x_i>)).
/// Compensated summation in fixed index order; bit-identical across calls.
double loss_value(std::span<const double> coef, const Dataset& data);

/// Loss value and gradient at a point, packaged as a cut.
Cut loss_cut(std::span<const double> coef, const Dataset& data);

/// Score extremes over the box. When r_max is given, only the r_max most
/// extreme non-intercept contributions count (the intercept always does).
ScoreBounds score_extremes(const Dataset& data, const CoefficientSet& coefset,
                           std::optional<std::size_t> r_max = std::nullopt);

/// Best/worst-case loss over the box: the minimum pairs positives with their
/// maximal scores and negatives with their minimal scores; the maximum is
/// the reverse.
std::pair<double, double> loss_range(const Dataset& data, const CoefficientSet& coefset,
                                     std::optional<std::size_t> r_max = std::nullopt);

/// Lookup table over all reachable integer margins. Requires integer-valued
/// data; throws UnsupportedError otherwise so callers can fall back to
/// direct evaluation.
LossTable build_lookup(const Dataset& data, const CoefficientSet& coefset,
                       std::optional<std::size_t> r_max = std::nullopt);

/// Hot-path evaluator used by the solver and heuristics: routes through the
/// lookup table when eligible, tracks evaluation counts and time spent on
/// data-related computation.
class LossEngine {
  public:
    explicit LossEngine(const Dataset& data) : data_(&data) {}

    const Dataset& data() const { return *data_; }

    /// Builds the margin table when the data is integer-valued; silently
    /// keeps direct evaluation otherwise.
    void enable_table(const CoefficientSet& coefset,
                      std::optional<std::size_t> r_max = std::nullopt);
    void disable_table() { table_.reset(); }
    bool table_enabled() const { return table_.has_value(); }
    const LossTable* table() const { return table_ ? &*table_ : nullptr; }

    double value(std::span<const double> coef) const;
    Cut cut(std::span<const double> coef) const;

    /// Loss from cached scores s_i = <coef, x_i>. integer_scores marks that
    /// every margin is an exact integer so the table may be used.
    double value_from_scores(std::span<const double> scores, bool integer_scores) const;

    void fill_scores(std::span<const double> coef, std::vector<double>& scores) const;

    std::uint64_t value_evaluations() const { return value_evals_; }
    std::uint64_t example_evaluations() const { return example_evals_; }
    std::uint64_t cut_evaluations() const { return cut_evals_; }
    double data_seconds() const { return data_seconds_; }
    void reset_stats() {
        value_evals_ = 0;
        example_evals_ = 0;
        cut_evals_ = 0;
        data_seconds_ = 0.0;
    }

  private:
    const Dataset* data_;
    std::optional<LossTable> table_;
    mutable std::uint64_t value_evals_ = 0;
    mutable std::uint64_t example_evals_ = 0;
    mutable std::uint64_t cut_evals_ = 0;
    mutable double data_seconds_ = 0.0;
};

}  // namespace riskscore
