#include "riskscore/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <future>
#include <limits>
#include <numeric>

#include "riskscore/heuristics.hpp"
#include "riskscore/loss.hpp"

namespace riskscore {

namespace {

// Smooth part: (1/2n) logistic loss + g (1-a) |coef[1..d]|^2.
struct SmoothObjective {
    const Dataset& data;
    double ridge;  // g * (1 - a)

    double value(const std::vector<double>& coef) const {
        double loss = 0.0;
        for (std::size_t i = 0; i < data.n(); ++i) {
            loss += log1p_exp_neg(data.label(i) * data.score(coef, i));
        }
        loss /= 2.0 * static_cast<double>(data.n());
        double reg = 0.0;
        for (std::size_t j = 1; j < coef.size(); ++j) reg += coef[j] * coef[j];
        return loss + ridge * reg;
    }

    void gradient(const std::vector<double>& coef, std::vector<double>& grad) const {
        grad.assign(coef.size(), 0.0);
        for (std::size_t i = 0; i < data.n(); ++i) {
            const auto x = data.row(i);
            const int y = data.label(i);
            double s = 0.0;
            for (std::size_t j = 0; j < coef.size(); ++j) s += coef[j] * x[j];
            const double w = y * sigmoid(-y * s);
            for (std::size_t j = 0; j < coef.size(); ++j) grad[j] -= w * x[j];
        }
        const double inv = 1.0 / (2.0 * static_cast<double>(data.n()));
        for (double& g : grad) g *= inv;
        for (std::size_t j = 1; j < coef.size(); ++j) grad[j] += 2.0 * ridge * coef[j];
    }
};

void apply_prox(std::vector<double>& coef, double threshold,
                const std::vector<int>& sign_of) {
    for (std::size_t j = 1; j < coef.size(); ++j) {
        double v = coef[j];
        if (threshold > 0.0) {
            if (v > threshold) {
                v -= threshold;
            } else if (v < -threshold) {
                v += threshold;
            } else {
                v = 0.0;
            }
        }
        if (sign_of[j] > 0 && v < 0.0) v = 0.0;
        if (sign_of[j] < 0 && v > 0.0) v = 0.0;
        coef[j] = v;
    }
}

}  // namespace

PenalizedFit fit_penalized_logistic(const Dataset& data, double mixing, double penalty,
                                    const std::vector<std::pair<std::size_t, int>>& sign_constraints,
                                    const std::vector<double>* initial) {
    if (mixing < 0.0 || mixing > 1.0) throw ArgumentError("mixing must lie in [0,1]");
    if (penalty < 0.0) throw ArgumentError("penalty must be non-negative");
    const std::size_t width = data.dim() + 1;

    std::vector<int> sign_of(width, 0);
    for (const auto& [j, s] : sign_constraints) {
        if (j == 0 || j >= width) throw ArgumentError("sign constraint on invalid dimension");
        sign_of[j] = s;
    }

    SmoothObjective smooth{data, penalty * (1.0 - mixing)};
    const double l1 = penalty * mixing;

    std::vector<double> x(width, 0.0);
    if (initial != nullptr && initial->size() == width) x = *initial;
    apply_prox(x, 0.0, sign_of);  // project the warm start

    std::vector<double> y = x, x_prev = x, grad(width), candidate(width);
    double t = 1.0;       // momentum
    double step = 1.0;    // backtracked step size
    double fy = smooth.value(y);

    PenalizedFit out;
    out.mixing = mixing;
    out.penalty = penalty;

    const std::size_t max_iterations = 5000;
    for (std::size_t iter = 0; iter < max_iterations; ++iter) {
        smooth.gradient(y, grad);

        // Backtracking on the smooth majorant.
        double fx_new = 0.0;
        while (true) {
            for (std::size_t j = 0; j < width; ++j) candidate[j] = y[j] - step * grad[j];
            apply_prox(candidate, step * l1, sign_of);
            fx_new = smooth.value(candidate);
            double quad = fy;
            double dist = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
                const double diff = candidate[j] - y[j];
                quad += grad[j] * diff;
                dist += diff * diff;
            }
            quad += dist / (2.0 * step);
            if (fx_new <= quad + 1e-12 || step < 1e-12) break;
            step *= 0.5;
        }

        // Residual of the prox-gradient map at the new point.
        double residual = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            const double diff = (candidate[j] - y[j]) / step;
            residual += diff * diff;
        }
        residual = std::sqrt(residual);

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double momentum = (t - 1.0) / t_next;
        x_prev = x;
        x = candidate;
        for (std::size_t j = 0; j < width; ++j) y[j] = x[j] + momentum * (x[j] - x_prev[j]);
        t = t_next;
        fy = smooth.value(y);

        out.iterations = iter + 1;
        out.residual = residual;
        if (residual <= 1e-7 * (1.0 + std::sqrt(std::inner_product(
                                     x.begin(), x.end(), x.begin(), 0.0)))) {
            out.converged = true;
            break;
        }
    }
    out.coefficients = std::move(x);
    return out;
}

std::vector<std::int64_t> round_naive(std::span<const double> coef, const CoefficientSet& box) {
    if (coef.size() != box.lb.size()) throw ArgumentError("dimension mismatch");
    std::vector<std::int64_t> out(coef.size());
    for (std::size_t j = 0; j < coef.size(); ++j) {
        const double clamped = std::clamp(coef[j], static_cast<double>(box.lb[j]),
                                          static_cast<double>(box.ub[j]));
        out[j] = std::llround(clamped);  // halves away from zero
    }
    return out;
}

std::vector<std::int64_t> round_rescaled(std::span<const double> coef,
                                         const CoefficientSet& box) {
    if (coef.size() != box.lb.size()) throw ArgumentError("dimension mismatch");
    double largest = 0.0;
    std::int64_t target = 0;
    for (std::size_t j = 1; j < coef.size(); ++j) {
        largest = std::max(largest, std::abs(coef[j]));
        target = std::max({target, box.ub[j], -box.lb[j]});
    }
    if (largest == 0.0) {
        throw ArgumentError("rescaled rounding needs a non-zero non-intercept coefficient");
    }
    const double scale = static_cast<double>(target) / largest;
    std::vector<double> scaled(coef.size());
    for (std::size_t j = 0; j < coef.size(); ++j) scaled[j] = coef[j] * scale;
    return round_naive(scaled, box);
}

std::vector<std::int64_t> unit_weights(std::span<const double> coef, const Dataset& data,
                                       const CoefficientSet& box) {
    if (coef.size() != box.lb.size()) throw ArgumentError("dimension mismatch");
    std::vector<std::int64_t> out(coef.size(), 0);
    for (std::size_t j = 1; j < coef.size(); ++j) {
        out[j] = coef[j] > 0.0 ? 1 : (coef[j] < 0.0 ? -1 : 0);
        out[j] = std::clamp(out[j], box.lb[j], box.ub[j]);
    }
    // Fixed points; exact integer intercept by ternary search on the convex
    // 1-D slice.
    std::vector<double> points(data.n(), 0.0);
    for (std::size_t i = 0; i < data.n(); ++i) {
        double s = 0.0;
        for (std::size_t j = 1; j < out.size(); ++j) {
            s += static_cast<double>(out[j]) * data.x(i, j);
        }
        points[i] = s;
    }
    auto slice_loss = [&](std::int64_t b) {
        KahanSum sum;
        for (std::size_t i = 0; i < data.n(); ++i) {
            sum.add(log1p_exp_neg(data.label(i) * (points[i] + static_cast<double>(b))));
        }
        return sum.value() / static_cast<double>(data.n());
    };
    std::int64_t lo = box.lb[0], hi = box.ub[0];
    while (hi - lo >= 3) {
        const std::int64_t m1 = lo + (hi - lo) / 3;
        const std::int64_t m2 = hi - (hi - lo) / 3;
        if (slice_loss(m1) <= slice_loss(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    std::int64_t best = lo;
    double best_val = slice_loss(lo);
    for (std::int64_t b = lo + 1; b <= hi; ++b) {
        const double v = slice_loss(b);
        if (v < best_val) {
            best_val = v;
            best = b;
        }
    }
    out[0] = best;
    return out;
}

std::pair<double, double> platt_scale(const std::vector<double>& scores,
                                      const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw ArgumentError("scores and labels must be non-empty and aligned");
    }
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        has_pos = has_pos || (y == +1);
        has_neg = has_neg || (y == -1);
    }
    if (!has_pos || !has_neg) throw ArgumentError("Platt scaling needs both classes");

    const double ridge = 1e-8;
    double a = 1.0, b = 0.0;
    const std::size_t n = scores.size();
    for (int iter = 0; iter < 200; ++iter) {
        double ga = ridge * a, gb = ridge * b;
        double haa = ridge, hab = 0.0, hbb = ridge;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = labels[i];
            const double z = a * scores[i] + b;
            const double p = sigmoid(-y * z);  // d/dz of loss has weight -y p
            ga += -y * p * scores[i] / static_cast<double>(n);
            gb += -y * p / static_cast<double>(n);
            const double w = sigmoid(z) * sigmoid(-z) / static_cast<double>(n);
            haa += w * scores[i] * scores[i];
            hab += w * scores[i];
            hbb += w;
        }
        const double det = haa * hbb - hab * hab;
        if (std::abs(det) < 1e-300) break;
        const double da = (hbb * ga - hab * gb) / det;
        const double db = (haa * gb - hab * ga) / det;
        a -= da;
        b -= db;
        if (std::abs(da) + std::abs(db) < 1e-12) break;
    }
    if (!std::isfinite(a) || !std::isfinite(b)) throw SolverError("Platt scaling diverged");
    return {a, b};
}

std::string to_string(PostProcessor post) {
    switch (post) {
        case PostProcessor::Rd: return "rd";
        case PostProcessor::RdDcd: return "rd_dcd";
        case PostProcessor::SeqRdDcd: return "seqrd_dcd";
        case PostProcessor::RsRd: return "rsrd";
        case PostProcessor::RsRdDcd: return "rsrd_dcd";
        case PostProcessor::SeqRd: return "seqrd";
        case PostProcessor::Unit: return "unit";
    }
    return "unknown";
}

PostProcessor post_processor_from_string(const std::string& name) {
    if (name == "rd") return PostProcessor::Rd;
    if (name == "rd_dcd") return PostProcessor::RdDcd;
    if (name == "seqrd_dcd") return PostProcessor::SeqRdDcd;
    if (name == "rsrd") return PostProcessor::RsRd;
    if (name == "rsrd_dcd") return PostProcessor::RsRdDcd;
    if (name == "seqrd") return PostProcessor::SeqRd;
    if (name == "unit") return PostProcessor::Unit;
    throw ArgumentError("unknown post-processor '" + name + "'");
}

namespace {

std::vector<double> clamp_to_box(std::span<const double> coef, const CoefficientSet& box) {
    std::vector<double> out(coef.begin(), coef.end());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = std::clamp(out[j], static_cast<double>(box.lb[j]),
                            static_cast<double>(box.ub[j]));
    }
    return out;
}

// Polishing never adds support: descend only on the intercept and the
// currently non-zero coordinates.
std::vector<std::int64_t> polish_support(std::vector<std::int64_t> coef,
                                         const ProblemSpec& spec) {
    if (!is_feasible(coef, spec)) return coef;
    std::vector<std::size_t> dirs{0};
    for (std::size_t j = 1; j < coef.size(); ++j) {
        if (coef[j] != 0) dirs.push_back(j);
    }
    LossEngine engine(spec.data());
    return dcd_polish(std::move(coef), spec, engine, dirs);
}

}  // namespace

std::vector<std::int64_t> post_process(PostProcessor post, std::span<const double> coef,
                                       const ProblemSpec& spec) {
    const auto& box = spec.coefficients();
    switch (post) {
        case PostProcessor::Rd: return round_naive(coef, box);
        case PostProcessor::RdDcd: return polish_support(round_naive(coef, box), spec);
        case PostProcessor::RsRd: return round_rescaled(coef, box);
        case PostProcessor::RsRdDcd: return polish_support(round_rescaled(coef, box), spec);
        case PostProcessor::SeqRd: {
            LossEngine engine(spec.data());
            return sequential_round(clamp_to_box(coef, box), spec, engine);
        }
        case PostProcessor::SeqRdDcd: {
            LossEngine engine(spec.data());
            return polish_support(sequential_round(clamp_to_box(coef, box), spec, engine), spec);
        }
        case PostProcessor::Unit: return unit_weights(coef, spec.data(), box);
    }
    throw ArgumentError("unknown post-processor");
}

PoolGrid default_pool_grid(const Dataset& data, std::size_t mixing_count,
                           std::size_t penalty_count) {
    // Largest penalty that zeroes every coefficient for the lasso: the
    // infinity norm of the smooth gradient at the intercept-only optimum.
    const double base_rate =
        static_cast<double>(data.positives()) / static_cast<double>(data.n());
    const double intercept = std::log(base_rate / (1.0 - base_rate));
    std::vector<double> coef(data.dim() + 1, 0.0);
    coef[0] = intercept;
    std::vector<double> grad(coef.size(), 0.0);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const int y = data.label(i);
        const double w = y * sigmoid(-y * data.score(coef, i));
        for (std::size_t j = 1; j < coef.size(); ++j) grad[j] -= w * data.x(i, j);
    }
    double gmax_num = 0.0;
    for (std::size_t j = 1; j < grad.size(); ++j) {
        gmax_num = std::max(gmax_num, std::abs(grad[j]) / (2.0 * static_cast<double>(data.n())));
    }

    PoolGrid out;
    for (std::size_t mi = 0; mi < mixing_count; ++mi) {
        const double a = mixing_count == 1
                             ? 1.0
                             : static_cast<double>(mi) / static_cast<double>(mixing_count - 1);
        const double gmax = gmax_num / std::max(a, 1e-3);
        for (std::size_t gi = 0; gi < penalty_count; ++gi) {
            const double frac = penalty_count == 1
                                    ? 0.0
                                    : static_cast<double>(gi) /
                                          static_cast<double>(penalty_count - 1);
            out.params.emplace_back(a, gmax * std::pow(1e-4, frac));
        }
    }
    return out;
}

PoolReport pooled_pipeline(const Dataset& data, const PoolGrid& grid, PostProcessor post,
                           const ProblemSpec& spec, int folds, std::uint64_t seed, bool nested,
                           int jobs) {
    if (grid.params.empty()) throw ArgumentError("empty parameter grid");
    const FoldAssignment assignment = split_folds(data, folds, seed);

    std::vector<Dataset> train_sets, test_sets;
    for (int f = 1; f <= folds; ++f) {
        train_sets.push_back(data.subset(assignment.train_rows(f)));
        test_sets.push_back(data.subset(assignment.test_rows(f)));
    }

    std::vector<std::pair<std::size_t, int>> signs;
    for (const auto& c : spec.constraints()) {
        if (const auto* sc = std::get_if<SignConstraint>(&c)) {
            signs.emplace_back(data.feature_index(sc->feature), sc->sign);
        }
    }

    auto eval_entry = [&](std::size_t g) {
        const auto [a, gamma] = grid.params[g];
        PoolEntry entry;
        entry.mixing = a;
        entry.penalty = gamma;

        double auc_sum = 0.0;
        for (int f = 0; f < folds; ++f) {
            const PenalizedFit fit =
                fit_penalized_logistic(train_sets[f], a, gamma, signs, nullptr);
            std::vector<std::int64_t> cand;
            try {
                cand = post_process(post, fit.coefficients, spec);
            } catch (const ArgumentError&) {
                cand.assign(fit.coefficients.size(), 0);
            }
            RiskScoreModel m;
            m.coefficients = cand;
            m.names = data.names();
            auc_sum += auc(m, test_sets[f]);
        }
        entry.cv_auc = auc_sum / folds;

        const PenalizedFit full = fit_penalized_logistic(data, a, gamma, signs, nullptr);
        try {
            entry.coefficients = post_process(post, full.coefficients, spec);
        } catch (const ArgumentError&) {
            entry.coefficients.assign(full.coefficients.size(), 0);
        }
        const auto feas = is_feasible(entry.coefficients, spec);
        entry.feasible = feas.feasible;
        entry.violations = feas.violations;
        std::vector<double> real(entry.coefficients.begin(), entry.coefficients.end());
        entry.train_loss = loss_value(real, data);
        return entry;
    };

    PoolReport report;
    report.entries.resize(grid.params.size());
    if (jobs > 1) {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t g = next.fetch_add(1);
                if (g >= grid.params.size()) break;
                report.entries[g] = eval_entry(g);
            }
        };
        std::vector<std::future<void>> futures;
        for (int w = 0; w < jobs; ++w) futures.push_back(std::async(std::launch::async, worker));
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t g = 0; g < grid.params.size(); ++g) report.entries[g] = eval_entry(g);
    }

    // Violation rates per constraint description.
    std::map<std::string, std::size_t> violation_counts;
    for (const auto& c : spec.constraints()) violation_counts[describe(c)] = 0;
    for (const auto& entry : report.entries) {
        for (const auto& v : entry.violations) {
            auto it = violation_counts.find(v);
            if (it != violation_counts.end()) ++it->second;
        }
    }
    for (const auto& [desc, count] : violation_counts) {
        report.violation_rates.emplace_back(
            desc, static_cast<double>(count) / static_cast<double>(report.entries.size()));
    }

    // Best feasible member by CV AUC; first wins on ties.
    std::size_t best_idx = report.entries.size();
    for (std::size_t g = 0; g < report.entries.size(); ++g) {
        if (!report.entries[g].feasible) continue;
        if (best_idx == report.entries.size() ||
            report.entries[g].cv_auc > report.entries[best_idx].cv_auc) {
            best_idx = g;
        }
    }
    if (best_idx < report.entries.size()) {
        RiskScoreModel model;
        model.coefficients = report.entries[best_idx].coefficients;
        model.names = data.names();
        model.method = "pooled_" + to_string(post);
        report.best = std::move(model);
    }

    if (nested) {
        // Outer folds evaluate the whole selection procedure.
        for (int f = 0; f < folds; ++f) {
            const PoolReport inner = pooled_pipeline(train_sets[f], grid, post, spec, folds,
                                                     seed + static_cast<std::uint64_t>(f) + 1,
                                                     false, jobs);
            if (!inner.best) continue;
            report.nested_fold_metrics.push_back(evaluate_model(*inner.best, test_sets[f]));
        }
    }
    return report;
}

}  // namespace riskscore
