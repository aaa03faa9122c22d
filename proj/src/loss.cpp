#include "riskscore/loss.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace riskscore {

namespace {

void check_coef(std::span<const double> coef, const Dataset& data) {
    if (coef.size() != data.dim() + 1) {
        throw ArgumentError("coefficient vector has dimension " + std::to_string(coef.size()) +
                            ", expected " + std::to_string(data.dim() + 1));
    }
    for (double v : coef) {
        if (!std::isfinite(v)) throw ArgumentError("non-finite coefficient");
    }
}

struct ScopedTimer {
    explicit ScopedTimer(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
    ~ScopedTimer() {
        sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    double& sink_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

double loss_value(std::span<const double> coef, const Dataset& data) {
    check_coef(coef, data);
    KahanSum sum;
    const std::size_t n = data.n();
    for (std::size_t i = 0; i < n; ++i) {
        const double margin = data.label(i) * data.score(coef, i);
        sum.add(log1p_exp_neg(margin));
    }
    return sum.value() / static_cast<double>(n);
}

Cut loss_cut(std::span<const double> coef, const Dataset& data) {
    check_coef(coef, data);
    const std::size_t n = data.n();
    const std::size_t width = data.dim() + 1;
    Cut cut;
    cut.anchor.assign(coef.begin(), coef.end());
    cut.gradient.assign(width, 0.0);
    KahanSum sum;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        const int y = data.label(i);
        double s = 0.0;
        for (std::size_t j = 0; j < width; ++j) s += coef[j] * x[j];
        const double margin = y * s;
        sum.add(log1p_exp_neg(margin));
        const double w = y * sigmoid(-margin);
        for (std::size_t j = 0; j < width; ++j) cut.gradient[j] -= w * x[j];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    cut.value = sum.value() * inv_n;
    for (double& g : cut.gradient) g *= inv_n;
    return cut;
}

ScoreBounds score_extremes(const Dataset& data, const CoefficientSet& coefset,
                           std::optional<std::size_t> r_max) {
    coefset.validate();
    if (coefset.dim() != data.dim()) {
        throw ArgumentError("coefficient set dimension mismatch");
    }
    const std::size_t n = data.n();
    const std::size_t d = data.dim();
    ScoreBounds out;
    out.per_example_min.resize(n);
    out.per_example_max.resize(n);

    std::vector<double> lo(d), hi(d);
    for (std::size_t i = 0; i < n; ++i) {
        // Intercept column is identically 1.
        double base_lo = static_cast<double>(coefset.lb[0]);
        double base_hi = static_cast<double>(coefset.ub[0]);
        for (std::size_t j = 1; j <= d; ++j) {
            const double x = data.x(i, j);
            const double a = x * static_cast<double>(coefset.lb[j]);
            const double b = x * static_cast<double>(coefset.ub[j]);
            lo[j - 1] = std::min(a, b);  // <= 0 because 0 is in the box
            hi[j - 1] = std::max(a, b);  // >= 0
        }
        if (r_max && *r_max < d) {
            const std::size_t r = *r_max;
            std::partial_sort(lo.begin(), lo.begin() + r, lo.end());
            std::partial_sort(hi.begin(), hi.begin() + r, hi.end(), std::greater<double>());
            double s_lo = base_lo, s_hi = base_hi;
            for (std::size_t j = 0; j < r; ++j) {
                s_lo += lo[j];
                s_hi += hi[j];
            }
            out.per_example_min[i] = s_lo;
            out.per_example_max[i] = s_hi;
        } else {
            double s_lo = base_lo, s_hi = base_hi;
            for (std::size_t j = 0; j < d; ++j) {
                s_lo += lo[j];
                s_hi += hi[j];
            }
            out.per_example_min[i] = s_lo;
            out.per_example_max[i] = s_hi;
        }
    }
    out.global_min = *std::min_element(out.per_example_min.begin(), out.per_example_min.end());
    out.global_max = *std::max_element(out.per_example_max.begin(), out.per_example_max.end());
    return out;
}

std::pair<double, double> loss_range(const Dataset& data, const CoefficientSet& coefset,
                                     std::optional<std::size_t> r_max) {
    const ScoreBounds bounds = score_extremes(data, coefset, r_max);
    const std::size_t n = data.n();
    KahanSum lo, hi;
    for (std::size_t i = 0; i < n; ++i) {
        if (data.label(i) == +1) {
            lo.add(log1p_exp_neg(bounds.per_example_max[i]));
            hi.add(log1p_exp_neg(bounds.per_example_min[i]));
        } else {
            lo.add(log1p_exp_neg(-bounds.per_example_min[i]));
            hi.add(log1p_exp_neg(-bounds.per_example_max[i]));
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    return {lo.value() * inv_n, hi.value() * inv_n};
}

LossTable build_lookup(const Dataset& data, const CoefficientSet& coefset,
                       std::optional<std::size_t> r_max) {
    if (!data.integer_valued()) {
        throw UnsupportedError("lookup table requires integer-valued features");
    }
    const ScoreBounds bounds = score_extremes(data, coefset, r_max);
    // Margins include the label sign: for y = -1 the reachable margin range
    // is the negated score range.
    double margin_min = 0.0, margin_max = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        double lo, hi;
        if (data.label(i) == +1) {
            lo = bounds.per_example_min[i];
            hi = bounds.per_example_max[i];
        } else {
            lo = -bounds.per_example_max[i];
            hi = -bounds.per_example_min[i];
        }
        if (i == 0) {
            margin_min = lo;
            margin_max = hi;
        } else {
            margin_min = std::min(margin_min, lo);
            margin_max = std::max(margin_max, hi);
        }
    }
    LossTable table;
    table.score_min = std::llround(margin_min);
    const std::int64_t score_max = std::llround(margin_max);
    const std::int64_t count = score_max - table.score_min + 1;
    if (count <= 0 || count > (1LL << 26)) {
        throw UnsupportedError("lookup table would need " + std::to_string(count) + " rows");
    }
    table.values.resize(static_cast<std::size_t>(count));
    for (std::int64_t s = table.score_min; s <= score_max; ++s) {
        table.values[static_cast<std::size_t>(s - table.score_min)] =
            log1p_exp_neg(static_cast<double>(s));
    }
    return table;
}

void LossEngine::enable_table(const CoefficientSet& coefset, std::optional<std::size_t> r_max) {
    if (!data_->integer_valued()) {
        table_.reset();
        return;
    }
    table_ = build_lookup(*data_, coefset, r_max);
}

double LossEngine::value(std::span<const double> coef) const {
    ScopedTimer timer(data_seconds_);
    ++value_evals_;
    example_evals_ += data_->n();
    check_coef(coef, *data_);
    bool integral = table_.has_value();
    if (integral) {
        for (double v : coef) {
            if (v != std::floor(v)) {
                integral = false;
                break;
            }
        }
    }
    const std::size_t n = data_->n();
    KahanSum sum;
    if (integral) {
        for (std::size_t i = 0; i < n; ++i) {
            const double margin = data_->label(i) * data_->score(coef, i);
            const std::int64_t s = std::llround(margin);
            sum.add(table_->covers(s) ? table_->at(s) : log1p_exp_neg(margin));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double margin = data_->label(i) * data_->score(coef, i);
            sum.add(log1p_exp_neg(margin));
        }
    }
    return sum.value() / static_cast<double>(n);
}

Cut LossEngine::cut(std::span<const double> coef) const {
    ScopedTimer timer(data_seconds_);
    ++cut_evals_;
    example_evals_ += data_->n();
    return loss_cut(coef, *data_);
}

double LossEngine::value_from_scores(std::span<const double> scores, bool integer_scores) const {
    ScopedTimer timer(data_seconds_);
    ++value_evals_;
    example_evals_ += data_->n();
    const std::size_t n = data_->n();
    if (scores.size() != n) throw ArgumentError("score vector length mismatch");
    KahanSum sum;
    if (integer_scores && table_) {
        for (std::size_t i = 0; i < n; ++i) {
            const double margin = data_->label(i) * scores[i];
            const std::int64_t s = std::llround(margin);
            sum.add(table_->covers(s) ? table_->at(s) : log1p_exp_neg(margin));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            sum.add(log1p_exp_neg(data_->label(i) * scores[i]));
        }
    }
    return sum.value() / static_cast<double>(n);
}

void LossEngine::fill_scores(std::span<const double> coef, std::vector<double>& scores) const {
    check_coef(coef, *data_);
    scores.resize(data_->n());
    for (std::size_t i = 0; i < data_->n(); ++i) scores[i] = data_->score(coef, i);
}

}  // namespace riskscore
