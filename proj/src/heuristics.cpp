#include "riskscore/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace riskscore {

namespace {

// Shared score-cache evaluator: objective of the current point with one
// coordinate shifted, without touching the other n*(d) products.
struct CoordEvaluator {
    const LossEngine& engine;
    const Dataset& data;
    double c0;
    bool integer_data;
    std::vector<double> scores;
    std::vector<double> tmp;
    HeuristicStats* stats;

    void init(std::span<const double> coef) {
        engine.fill_scores(coef, scores);
        tmp.resize(scores.size());
    }

    double loss_shift(std::size_t j, double delta, bool integer_scores) {
        const std::size_t n = data.n();
        if (delta == 0.0) {
            std::copy(scores.begin(), scores.end(), tmp.begin());
        } else {
            for (std::size_t i = 0; i < n; ++i) tmp[i] = scores[i] + delta * data.x(i, j);
        }
        if (stats != nullptr) {
            ++stats->loss_evaluations;
            stats->example_evaluations += n;
        }
        return engine.value_from_scores(tmp, integer_scores && integer_data);
    }

    void commit(std::size_t j, double delta) {
        if (delta == 0.0) return;
        for (std::size_t i = 0; i < data.n(); ++i) scores[i] += delta * data.x(i, j);
    }
};

std::size_t support_of(const std::vector<std::int64_t>& coef) {
    std::size_t s = 0;
    for (std::size_t j = 1; j < coef.size(); ++j) s += (coef[j] != 0);
    return s;
}

}  // namespace

RoundingLattice rounding_lattice(std::span<const double> anchor, const CoefficientSet& box) {
    if (anchor.size() != box.lb.size()) throw ArgumentError("anchor dimension mismatch");
    RoundingLattice out;
    out.anchor.assign(anchor.begin(), anchor.end());
    out.choices.resize(anchor.size());
    for (std::size_t j = 0; j < anchor.size(); ++j) {
        if (anchor[j] < static_cast<double>(box.lb[j]) - 1e-9 ||
            anchor[j] > static_cast<double>(box.ub[j]) + 1e-9) {
            throw ArgumentError("anchor lies outside the lattice box at dimension " +
                                std::to_string(j));
        }
        std::int64_t lo = static_cast<std::int64_t>(std::floor(anchor[j]));
        std::int64_t hi = static_cast<std::int64_t>(std::ceil(anchor[j]));
        lo = std::max(lo, box.lb[j]);
        hi = std::min(hi, box.ub[j]);
        out.choices[j] = {lo, hi};
    }
    return out;
}

namespace {

// Integer ternary search for the minimum of a convex slice; exact for convex
// profiles including plateaus.
template <typename F>
std::int64_t convex_slice_argmin(std::int64_t lo, std::int64_t hi, F&& f) {
    while (hi - lo >= 3) {
        const std::int64_t m1 = lo + (hi - lo) / 3;
        const std::int64_t m2 = hi - (hi - lo) / 3;
        if (f(m1) <= f(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    std::int64_t best = lo;
    double best_val = f(lo);
    for (std::int64_t c = lo + 1; c <= hi; ++c) {
        const double v = f(c);
        if (v < best_val) {
            best_val = v;
            best = c;
        }
    }
    return best;
}

}  // namespace

std::vector<std::int64_t> dcd_polish(std::vector<std::int64_t> coef, const ProblemSpec& spec,
                                     const LossEngine& engine,
                                     std::vector<std::size_t> directions,
                                     HeuristicStats* stats) {
    const std::size_t d = spec.dim();
    {
        const auto feas = is_feasible(coef, spec);
        if (!feas.feasible) {
            throw ArgumentError("dcd_polish requires a feasible starting point");
        }
    }
    if (directions.empty()) {
        directions.resize(d + 1);
        std::iota(directions.begin(), directions.end(), std::size_t{0});
    }

    const auto& box = spec.coefficients();
    const double c0 = spec.c0();
    CoordEvaluator eval{engine, engine.data(), c0, engine.data().integer_valued(), {}, {}, stats};
    std::vector<double> real(coef.begin(), coef.end());
    eval.init(real);

    std::size_t support = support_of(coef);
    double current = eval.loss_shift(0, 0.0, true) + c0 * static_cast<double>(support);

    // Best feasible integer move along one coordinate. Feasibility of the
    // operational constraints is constant on the negative part, at zero, and
    // on the positive part of a slice, so each part is scanned separately;
    // the loss slice itself is convex.
    auto best_move_along = [&](std::size_t j) -> std::pair<double, std::int64_t> {
        const std::int64_t cur = coef[j];
        const std::size_t base_support = support - (j >= 1 && cur != 0 ? 1 : 0);
        std::map<std::int64_t, double> memo;
        auto slice_loss = [&](std::int64_t c) {
            auto it = memo.find(c);
            if (it != memo.end()) return it->second;
            const double loss = eval.loss_shift(j, static_cast<double>(c - cur), true);
            memo.emplace(c, loss);
            return loss;
        };
        auto class_feasible = [&](std::int64_t representative) {
            std::vector<std::int64_t> probe = coef;
            probe[j] = representative;
            return static_cast<bool>(is_feasible(probe, spec));
        };
        auto class_objective = [&](std::int64_t c) {
            const std::size_t nnz = base_support + (j >= 1 && c != 0 ? 1 : 0);
            return slice_loss(c) + c0 * static_cast<double>(nnz);
        };

        double best_val = std::numeric_limits<double>::infinity();
        std::int64_t best_c = cur;
        auto consider_range = [&](std::int64_t lo, std::int64_t hi) {
            if (lo > hi) return;
            if (!class_feasible(lo == 0 ? 0 : (lo > 0 ? std::max<std::int64_t>(lo, 1) : hi))) {
                return;
            }
            std::int64_t cand;
            if (hi - lo + 1 <= 8) {
                cand = lo;
                double cand_loss = slice_loss(lo);
                for (std::int64_t c = lo + 1; c <= hi; ++c) {
                    const double v = slice_loss(c);
                    if (v < cand_loss) {
                        cand_loss = v;
                        cand = c;
                    }
                }
            } else {
                cand = convex_slice_argmin(lo, hi, slice_loss);
                // The slice is convex in exact arithmetic; verify against the
                // integer neighbours and fall back to brute force otherwise.
                const bool ok = (cand == lo || slice_loss(cand) <= slice_loss(cand - 1)) &&
                                (cand == hi || slice_loss(cand) <= slice_loss(cand + 1));
                if (!ok) {
                    if (stats != nullptr) ++stats->golden_fallbacks;
                    cand = lo;
                    double cand_loss = slice_loss(lo);
                    for (std::int64_t c = lo + 1; c <= hi; ++c) {
                        const double v = slice_loss(c);
                        if (v < cand_loss) {
                            cand_loss = v;
                            cand = c;
                        }
                    }
                }
            }
            const double v = class_objective(cand);
            if (v < best_val) {
                best_val = v;
                best_c = cand;
            }
        };

        consider_range(box.lb[j], std::min<std::int64_t>(box.ub[j], -1));  // negative part
        if (box.lb[j] <= 0 && box.ub[j] >= 0) consider_range(0, 0);
        consider_range(std::max<std::int64_t>(box.lb[j], 1), box.ub[j]);  // positive part
        return {best_val, best_c};
    };

    while (true) {
        // With a tight model-size constraint, descend only along the
        // intercept and the currently non-zero coordinates.
        std::vector<std::size_t> active = directions;
        if (spec.size_cap() < d && support >= spec.size_cap()) {
            std::vector<std::size_t> restricted;
            for (std::size_t j : directions) {
                if (j == 0 || coef[j] != 0) restricted.push_back(j);
            }
            active = std::move(restricted);
        }

        double best_val = std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        std::int64_t best_c = 0;
        for (std::size_t j : active) {
            const auto [val, c] = best_move_along(j);
            if (val < best_val) {
                best_val = val;
                best_j = j;
                best_c = c;
            }
        }
        if (!(best_val < current) || best_c == coef[best_j]) break;

        eval.commit(best_j, static_cast<double>(best_c - coef[best_j]));
        if (best_j >= 1) {
            support -= (coef[best_j] != 0);
            support += (best_c != 0);
        }
        coef[best_j] = best_c;
        current = best_val;
    }
    return coef;
}

std::vector<std::int64_t> sequential_round(std::span<const double> anchor,
                                           const ProblemSpec& spec, const LossEngine& engine,
                                           HeuristicStats* stats) {
    const auto& box = spec.coefficients();
    const RoundingLattice lattice = rounding_lattice(anchor, box);  // validates the anchor
    (void)lattice;
    const double c0 = spec.c0();

    std::vector<double> current(anchor.begin(), anchor.end());
    CoordEvaluator eval{engine, engine.data(), c0, engine.data().integer_valued(), {}, {}, stats};
    eval.init(current);

    std::vector<std::size_t> pending;
    for (std::size_t j = 0; j < current.size(); ++j) {
        if (current[j] != std::floor(current[j])) pending.push_back(j);
    }

    auto partial_support = [&]() {
        std::size_t s = 0;
        for (std::size_t j = 1; j < current.size(); ++j) s += (current[j] != 0.0);
        return s;
    };

    while (!pending.empty()) {
        double best_val = std::numeric_limits<double>::infinity();
        std::size_t best_pos = 0;
        double best_target = 0.0;
        for (std::size_t p = 0; p < pending.size(); ++p) {
            const std::size_t j = pending[p];
            // Down before up so ties resolve deterministically.
            for (const double target :
                 {std::floor(current[j]), std::ceil(current[j])}) {
                const double loss = eval.loss_shift(j, target - current[j], false);
                std::size_t nnz = partial_support();
                if (j >= 1) {
                    nnz -= (current[j] != 0.0);
                    nnz += (target != 0.0);
                }
                const double val = loss + c0 * static_cast<double>(nnz);
                if (val < best_val) {
                    best_val = val;
                    best_pos = p;
                    best_target = target;
                }
            }
        }
        const std::size_t j = pending[best_pos];
        eval.commit(j, best_target - current[j]);
        current[j] = best_target;
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best_pos));
    }

    std::vector<std::int64_t> out(current.size());
    for (std::size_t j = 0; j < current.size(); ++j) out[j] = std::llround(current[j]);
    return out;
}

double subsample_threshold(double delta, std::size_t m, std::size_t n, double delta_max,
                           std::size_t d) {
    if (m == 0 || m > n) throw ArgumentError("sample size must satisfy 0 < m <= n");
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("delta must lie in (0,1)");
    if (delta_max < 0.0) throw ArgumentError("delta_max must be non-negative");
    const double dm = static_cast<double>(m);
    const double dn = static_cast<double>(n);
    const double tail = (std::log(1.0 / delta) + static_cast<double>(d) * std::log(2.0)) / 2.0;
    return delta_max * std::sqrt(tail * (1.0 / dm) * (1.0 - (dm * dm) / (dn * dn)));
}

namespace {

double spread_from_score_ranges(const Dataset& data, const std::vector<double>& score_lo,
                                const std::vector<double>& score_hi) {
    double worst = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < data.n(); ++i) {
        double margin_lo, margin_hi;
        if (data.label(i) == +1) {
            margin_lo = score_lo[i];
            margin_hi = score_hi[i];
        } else {
            margin_lo = -score_hi[i];
            margin_hi = -score_lo[i];
        }
        worst = std::max(worst, log1p_exp_neg(margin_lo));
        best = std::min(best, log1p_exp_neg(margin_hi));
    }
    return std::max(0.0, worst - best);
}

}  // namespace

double loss_spread_bound(const Dataset& data, const CoefficientSet& box,
                         std::optional<std::size_t> r_max) {
    const ScoreBounds bounds = score_extremes(data, box, r_max);
    return spread_from_score_ranges(data, bounds.per_example_min, bounds.per_example_max);
}

double loss_spread_bound(const Dataset& data, const std::vector<double>& lb,
                         const std::vector<double>& ub) {
    if (lb.size() != data.dim() + 1 || ub.size() != lb.size()) {
        throw ArgumentError("interval bounds must span all d+1 dimensions");
    }
    std::vector<double> score_lo(data.n()), score_hi(data.n());
    for (std::size_t i = 0; i < data.n(); ++i) {
        double lo = 0.0, hi = 0.0;
        for (std::size_t j = 0; j < lb.size(); ++j) {
            const double x = data.x(i, j);
            lo += std::min(x * lb[j], x * ub[j]);
            hi += std::max(x * lb[j], x * ub[j]);
        }
        score_lo[i] = lo;
        score_hi[i] = hi;
    }
    return spread_from_score_ranges(data, score_lo, score_hi);
}

std::optional<std::vector<std::int64_t>> subsampled_round(
    std::span<const double> anchor, const ProblemSpec& spec, const LossEngine& full_engine,
    std::size_t m, double delta, double v_max, Rng& rng, HeuristicStats* stats) {
    const Dataset& data = full_engine.data();
    const std::size_t n = data.n();
    if (m == 0 || m > n) throw ArgumentError("sample size must satisfy 0 < m <= n");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::vector<std::size_t> sample(order.begin(), order.begin() + m);
    std::sort(sample.begin(), sample.end());

    const Dataset sub = data.subset(sample);
    LossEngine sub_engine(sub);
    if (full_engine.table_enabled()) {
        sub_engine.enable_table(spec.coefficients(),
                                spec.size_cap() < spec.dim()
                                    ? std::optional<std::size_t>(spec.size_cap())
                                    : std::nullopt);
    }

    const std::vector<std::int64_t> candidate = sequential_round(anchor, spec, sub_engine, stats);
    std::vector<double> real(candidate.begin(), candidate.end());
    double sub_loss;
    {
        sub_loss = sub_engine.value(real);
        if (stats != nullptr) {
            ++stats->loss_evaluations;
            stats->example_evaluations += m;
        }
    }
    const double penalty = spec.c0() * static_cast<double>(spec.support_size(candidate));
    const double v_m = sub_loss + penalty;

    // The candidate set is the rounding lattice of the anchor, so the spread
    // normalizer only needs to cover floor/ceil per component.
    const RoundingLattice lattice = rounding_lattice(anchor, spec.coefficients());
    std::vector<double> lb(anchor.size()), ub(anchor.size());
    for (std::size_t j = 0; j < anchor.size(); ++j) {
        lb[j] = static_cast<double>(lattice.choices[j].first);
        ub[j] = static_cast<double>(lattice.choices[j].second);
    }
    const double spread = loss_spread_bound(data, lb, ub);
    const double eps = subsample_threshold(delta, m, n, spread, spec.dim());
    if (!(v_m < v_max - eps)) return std::nullopt;

    // Promising on the sample: validate on the full data before proposing.
    const double v_n = full_engine.value(real) + penalty;
    if (stats != nullptr) {
        ++stats->loss_evaluations;
        stats->example_evaluations += n - m;
    }
    if (v_n < v_max) return candidate;
    return std::nullopt;
}

}  // namespace riskscore
