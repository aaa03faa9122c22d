#include "riskscore/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace riskscore {

namespace {
constexpr double kFeasTol = 1e-7;   // primal feasibility
constexpr double kDualTol = 1e-9;   // optimality
constexpr double kPivotTol = 1e-9;  // smallest acceptable pivot element
constexpr std::uint64_t kMaxPivots = 400'000;
constexpr int kRefactorEvery = 120;
}  // namespace

double LpSolver::perturbation(std::size_t v, double bound) const {
    // splitmix-style hash of the variable index, mapped into [0.5, 1.5)
    std::uint64_t x = static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    x = x ^ (x >> 31);
    const double xi = 0.5 + static_cast<double>(x >> 11) * 0x1.0p-53;
    return 3e-10 * (1.0 + std::abs(bound)) * xi;
}

void LinearProgram::validate() const {
    if (lower.size() != num_vars || upper.size() != num_vars || objective.size() != num_vars) {
        throw ArgumentError("LP vector sizes do not match the variable count");
    }
    for (std::size_t j = 0; j < num_vars; ++j) {
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j])) {
            throw ArgumentError("structural variable " + std::to_string(j) +
                                " must have finite bounds");
        }
        if (lower[j] > upper[j]) {
            throw ArgumentError("variable " + std::to_string(j) + " has crossed bounds");
        }
        if (!std::isfinite(objective[j])) throw ArgumentError("non-finite objective coefficient");
    }
    for (const auto& row : rows) {
        if (!std::isfinite(row.rhs)) throw ArgumentError("non-finite row rhs");
        for (const auto& [var, coeff] : row.terms) {
            if (var >= num_vars) throw ArgumentError("row references unknown variable");
            if (!std::isfinite(coeff)) throw ArgumentError("non-finite row coefficient");
        }
    }
}

LpSolver::LpSolver(LinearProgram lp) {
    lp.validate();
    num_structural_ = lp.num_vars;
    cost_ = lp.objective;
    lower_ = lp.lower;
    upper_ = lp.upper;
    cols_.resize(num_structural_);

    // Start from the all-slack basis; choose nonbasic bounds by cost sign so
    // the initial basis is dual feasible and every solve is a dual solve.
    state_.assign(num_structural_, VarStatus::AtLower);
    for (std::size_t j = 0; j < num_structural_; ++j) {
        if (cost_[j] < 0.0) state_[j] = VarStatus::AtUpper;
    }
    basic_slot_.assign(num_structural_, 0);
    add_rows(lp.rows);
    factorized_ = false;
}

double LpSolver::nonbasic_value(std::size_t v) const {
    return state_[v] == VarStatus::AtUpper ? upper_[v] : lower_[v];
}

void LpSolver::add_rows(std::span<const LinearRow> new_rows) {
    const std::size_t m_old = rows_.size();
    for (const auto& row : new_rows) {
        const std::size_t r = rows_.size();
        LinearRow stored;
        stored.relation = Relation::Equal;  // a.x + s = rhs after adding the slack
        stored.rhs = row.rhs;
        for (const auto& [var, coeff] : row.terms) {
            if (var >= num_structural_) throw ArgumentError("row references unknown variable");
            if (coeff == 0.0) continue;
            stored.terms.emplace_back(var, coeff);
            cols_[var].emplace_back(r, coeff);
        }
        rows_.push_back(std::move(stored));
        rhs_.push_back(row.rhs);
        // Slack bounds encode the relation.
        switch (row.relation) {
            case Relation::LessEqual:
                lower_.push_back(0.0);
                upper_.push_back(kInf);
                break;
            case Relation::GreaterEqual:
                lower_.push_back(-kInf);
                upper_.push_back(0.0);
                break;
            case Relation::Equal:
                lower_.push_back(0.0);
                upper_.push_back(0.0);
                break;
        }
        state_.push_back(VarStatus::Basic);
        basic_.push_back(num_structural_ + r);
        basic_slot_.push_back(0);
        basic_slot_[num_structural_ + r] = basic_.size();
    }

    const std::size_t m_new = rows_.size();
    if (m_new == m_old) return;
    if (!factorized_) return;  // first factorization will cover everything

    // Extend the dense inverse: B_new = [[B, 0], [C, I]] so
    // B_new^{-1} = [[B^{-1}, 0], [-C B^{-1}, I]].
    std::vector<double> extended(m_new * m_new, 0.0);
    for (std::size_t i = 0; i < m_old; ++i) {
        std::copy(binv_.begin() + i * m_old, binv_.begin() + (i + 1) * m_old,
                  extended.begin() + i * m_new);
    }
    for (std::size_t r = m_old; r < m_new; ++r) {
        // Coefficients of the new row on the old basic variables.
        std::vector<double> c(m_old, 0.0);
        for (const auto& [var, coeff] : rows_[r].terms) {
            const std::size_t slot = basic_slot_[var];
            if (slot > 0 && slot <= m_old) c[slot - 1] = coeff;
        }
        double* out = extended.data() + r * m_new;
        for (std::size_t k = 0; k < m_old; ++k) {
            const double ck = c[k];
            if (ck == 0.0) continue;
            const double* brow = binv_.data() + k * m_old;
            for (std::size_t col = 0; col < m_old; ++col) out[col] -= ck * brow[col];
        }
        out[r] = 1.0;
    }
    binv_ = std::move(extended);
    compute_basic_values();
}

bool LpSolver::set_variable_bounds(std::size_t var, double lo, double hi) {
    if (var >= num_structural_) throw ArgumentError("bound change on unknown variable");
    if (lo > hi + 1e-12) return false;
    lower_[var] = lo;
    upper_[var] = std::max(lo, hi);
    // Nonbasic values snap to the moved bound on the next solve; nothing to
    // update eagerly.
    return true;
}

double LpSolver::row_activity(std::size_t r) const {
    double activity = 0.0;
    for (const auto& [var, coeff] : rows_[r].terms) activity += coeff * x_[var];
    return activity;
}

Basis LpSolver::basis() const { return Basis{state_, basic_}; }

void LpSolver::load_basis(const Basis& basis) {
    if (basis.status.size() != total_vars() || basis.basic.size() != rows_.size()) {
        throw ArgumentError("warm-start basis does not match the LP shape");
    }
    state_ = basis.status;
    basic_ = basis.basic;
    basic_slot_.assign(total_vars(), 0);
    for (std::size_t k = 0; k < basic_.size(); ++k) basic_slot_[basic_[k]] = k + 1;
    factorized_ = false;
}

void LpSolver::refactorize() {
    const std::size_t m = rows_.size();
    binv_.assign(m * m, 0.0);
    if (m == 0) {
        factorized_ = true;
        return;
    }
    // Gauss-Jordan on [B | I] with partial pivoting. On a singular basis we
    // repair by swapping the offending column for the slack of an unpivoted
    // row, which is always independent.
    std::vector<double> work(m * m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t v = basic_[k];
        if (is_slack(v)) {
            work[(v - num_structural_) * m + k] = 1.0;
        } else {
            for (const auto& [r, coeff] : cols_[v]) work[r * m + k] = coeff;
        }
        binv_[k * m + k] = 1.0;
    }
    std::vector<std::size_t> row_of_col(m, 0);
    std::vector<bool> row_used(m, false);
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t best_row = m;
        double best = kPivotTol;
        for (std::size_t r = 0; r < m; ++r) {
            if (row_used[r]) continue;
            const double a = std::abs(work[r * m + col]);
            if (a > best) {
                best = a;
                best_row = r;
            }
        }
        if (best_row == m) {
            // Singular: replace this basic variable by the slack of the first
            // unused row.
            std::size_t free_row = 0;
            while (row_used[free_row]) ++free_row;
            const std::size_t old_var = basic_[col];
            const std::size_t slack_var = num_structural_ + free_row;
            state_[old_var] = VarStatus::AtLower;
            if (!std::isfinite(lower_[old_var])) state_[old_var] = VarStatus::AtUpper;
            basic_slot_[old_var] = 0;
            basic_[col] = slack_var;
            state_[slack_var] = VarStatus::Basic;
            basic_slot_[slack_var] = col + 1;
            for (std::size_t r = 0; r < m; ++r) work[r * m + col] = 0.0;
            work[free_row * m + col] = 1.0;
            best_row = free_row;
        }
        row_used[best_row] = true;
        row_of_col[col] = best_row;
        const double piv = work[best_row * m + col];
        const double inv = 1.0 / piv;
        for (std::size_t c = 0; c < m; ++c) work[best_row * m + c] *= inv;
        for (std::size_t c = 0; c < m; ++c) binv_[best_row * m + c] *= inv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == best_row) continue;
            const double factor = work[r * m + col];
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < m; ++c) {
                work[r * m + c] -= factor * work[best_row * m + c];
                binv_[r * m + c] -= factor * binv_[best_row * m + c];
            }
        }
    }
    // work is now a permutation: row_of_col[col] holds 1 in column col, and
    // binv_ rows are aligned with the original row order of B. We need
    // slot-ordered rows: slot k of the inverse corresponds to basic column k,
    // i.e. row row_of_col[k] of the eliminated system.
    std::vector<double> ordered(m * m);
    for (std::size_t col = 0; col < m; ++col) {
        std::copy(binv_.begin() + row_of_col[col] * m, binv_.begin() + (row_of_col[col] + 1) * m,
                  ordered.begin() + col * m);
    }
    binv_ = std::move(ordered);
    factorized_ = true;
    compute_basic_values();
}

void LpSolver::compute_basic_values() {
    const std::size_t m = rows_.size();
    std::vector<double> rhs_eff(rhs_);
    for (std::size_t v = 0; v < num_structural_; ++v) {
        if (state_[v] == VarStatus::Basic) continue;
        const double value = nonbasic_value(v);
        if (value == 0.0) continue;
        for (const auto& [r, coeff] : cols_[v]) rhs_eff[r] -= coeff * value;
    }
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t slack = num_structural_ + r;
        if (state_[slack] == VarStatus::Basic) continue;
        const double value = nonbasic_value(slack);
        if (value != 0.0) rhs_eff[r] -= value;
    }
    xb_.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const double* brow = binv_.data() + k * m;
        double acc = 0.0;
        for (std::size_t r = 0; r < m; ++r) acc += brow[r] * rhs_eff[r];
        xb_[k] = acc;
    }
}

void LpSolver::compute_duals(std::vector<double>& y) const {
    const std::size_t m = rows_.size();
    y.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t v = basic_[k];
        const double c = is_slack(v) ? 0.0 : cost_[v];
        if (c == 0.0) continue;
        const double* brow = binv_.data() + k * m;
        for (std::size_t r = 0; r < m; ++r) y[r] += c * brow[r];
    }
}

double LpSolver::reduced_cost(std::size_t v, const std::vector<double>& y) const {
    if (is_slack(v)) return -y[v - num_structural_];
    double d = cost_[v];
    for (const auto& [r, coeff] : cols_[v]) d -= y[r] * coeff;
    return d;
}

std::size_t LpSolver::ensure_dual_feasible() {
    std::vector<double> y;
    compute_duals(y);
    bool reset = false;
    std::size_t adjustments = 0;
    for (std::size_t v = 0; v < total_vars() && !reset; ++v) {
        if (state_[v] == VarStatus::Basic) continue;
        // Nonbasic variables whose resting bound became infinite must move
        // to the finite side regardless of reduced cost.
        if (!std::isfinite(nonbasic_value(v))) {
            state_[v] = state_[v] == VarStatus::AtLower ? VarStatus::AtUpper : VarStatus::AtLower;
            ++adjustments;
        }
        const double d = reduced_cost(v, y);
        if (state_[v] == VarStatus::AtLower && d < -1e-7) {
            if (std::isfinite(var_upper(v))) {
                state_[v] = VarStatus::AtUpper;
                ++adjustments;
            } else {
                reset = true;
            }
        } else if (state_[v] == VarStatus::AtUpper && d > 1e-7) {
            if (std::isfinite(var_lower(v))) {
                state_[v] = VarStatus::AtLower;
                ++adjustments;
            } else {
                reset = true;
            }
        }
    }
    if (reset) {
        // Fall back to the all-slack basis, which is dual feasible by
        // construction.
        for (std::size_t v = 0; v < num_structural_; ++v) {
            state_[v] = cost_[v] < 0.0 ? VarStatus::AtUpper : VarStatus::AtLower;
        }
        basic_.clear();
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const std::size_t slack = num_structural_ + r;
            state_[slack] = VarStatus::Basic;
            basic_.push_back(slack);
        }
        basic_slot_.assign(total_vars(), 0);
        for (std::size_t k = 0; k < basic_.size(); ++k) basic_slot_[basic_[k]] = k + 1;
        refactorize();
        ++adjustments;
    }
    compute_basic_values();
    return adjustments;
}

void LpSolver::column_times(std::size_t v, std::vector<double>& out) const {
    out.assign(rows_.size(), 0.0);
    if (is_slack(v)) {
        out[v - num_structural_] = 1.0;
    } else {
        for (const auto& [r, coeff] : cols_[v]) out[r] = coeff;
    }
}

void LpSolver::ftran(const std::vector<double>& a, std::vector<double>& w) const {
    const std::size_t m = rows_.size();
    w.assign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const double ar = a[r];
        if (ar == 0.0) continue;
        for (std::size_t k = 0; k < m; ++k) w[k] += binv_[k * m + r] * ar;
    }
}

bool LpSolver::pivot(std::size_t slot, std::size_t entering, VarStatus leaving_state) {
    const std::size_t m = rows_.size();
    std::vector<double> a, w;
    column_times(entering, a);
    ftran(a, w);
    const double piv = w[slot];
    if (std::abs(piv) < 1e-8) return false;

    double* prow = binv_.data() + slot * m;
    const double inv = 1.0 / piv;
    for (std::size_t c = 0; c < m; ++c) prow[c] *= inv;
    for (std::size_t k = 0; k < m; ++k) {
        if (k == slot) continue;
        const double factor = w[k];
        if (factor == 0.0) continue;
        double* krow = binv_.data() + k * m;
        for (std::size_t c = 0; c < m; ++c) krow[c] -= factor * prow[c];
    }

    const std::size_t leaving = basic_[slot];
    state_[leaving] = leaving_state;
    basic_slot_[leaving] = 0;
    basic_[slot] = entering;
    state_[entering] = VarStatus::Basic;
    basic_slot_[entering] = slot + 1;
    ++pivots_;
    return true;
}

LpStatus LpSolver::dual_simplex() {
    const std::size_t m = rows_.size();
    std::vector<double> y, rho;
    int tiny_pivot_retries = 0;
    std::uint64_t since_refactor = 0;
    std::uint64_t local_pivots = 0;
    // Sticky anti-cycling switch: after enough pivots in one call the rule
    // drops to Bland selection, which cannot cycle.
    const std::uint64_t bland_after = std::max<std::uint64_t>(2000, 15 * m);
    bool bland = false;

    while (true) {
        if (local_pivots > kMaxPivots) {
            throw SolverError("dual simplex exceeded the pivot budget (" +
                              std::to_string(kMaxPivots) + ")");
        }
        if (local_pivots > bland_after) bland = true;
        // Leaving variable: the basic value most outside its bounds.
        std::size_t slot = m;
        double worst = kFeasTol;
        bool below = false;
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t v = basic_[k];
            const double lo = var_lower(v), hi = var_upper(v);
            double viol = 0.0;
            bool this_below = false;
            if (xb_[k] < lo - kFeasTol) {
                viol = lo - xb_[k];
                this_below = true;
            } else if (xb_[k] > hi + kFeasTol) {
                viol = xb_[k] - hi;
            } else {
                continue;
            }
            if (bland) {
                // Smallest variable index among violated rows.
                if (slot == m || v < basic_[slot]) {
                    slot = k;
                    below = this_below;
                    worst = viol;
                }
            } else if (viol > worst) {
                slot = k;
                below = this_below;
                worst = viol;
            }
        }
        if (slot == m) return LpStatus::Optimal;

        compute_duals(y);
        rho.assign(binv_.begin() + slot * m, binv_.begin() + (slot + 1) * m);

        // Two-pass ratio test: find the smallest dual ratio, then among
        // candidates within tolerance of it take the largest pivot element.
        // Degenerate ties would otherwise admit tiny pivots that wreck the
        // product-form inverse.
        struct Candidate {
            std::size_t var;
            double alpha;
            double ratio;
        };
        std::vector<Candidate> eligible_set;
        double best_ratio = kInf;
        for (std::size_t v = 0; v < total_vars(); ++v) {
            if (state_[v] == VarStatus::Basic) continue;
            double alpha;
            if (is_slack(v)) {
                alpha = rho[v - num_structural_];
            } else {
                alpha = 0.0;
                for (const auto& [r, coeff] : cols_[v]) alpha += rho[r] * coeff;
            }
            if (std::abs(alpha) < kPivotTol) continue;
            const bool at_lower = state_[v] == VarStatus::AtLower;
            bool eligible;
            if (below) {
                eligible = (at_lower && alpha < 0.0) || (!at_lower && alpha > 0.0);
            } else {
                eligible = (at_lower && alpha > 0.0) || (!at_lower && alpha < 0.0);
            }
            if (!eligible) continue;
            const double ratio = std::abs(reduced_cost(v, y) / alpha);
            eligible_set.push_back({v, alpha, ratio});
            best_ratio = std::min(best_ratio, ratio);
        }
        if (eligible_set.empty()) return LpStatus::Infeasible;

        // Prefer numerically strong pivot elements; fall back to the full
        // candidate set only when no strong pivot exists.
        constexpr double kStrongPivot = 1e-7;
        bool have_strong = false;
        double strong_best_ratio = kInf;
        for (const auto& c : eligible_set) {
            if (std::abs(c.alpha) >= kStrongPivot) {
                have_strong = true;
                strong_best_ratio = std::min(strong_best_ratio, c.ratio);
            }
        }
        const double pick_ratio = have_strong ? strong_best_ratio : best_ratio;
        auto strong_enough = [&](const Candidate& c) {
            return !have_strong || std::abs(c.alpha) >= kStrongPivot;
        };

        std::size_t entering = total_vars();
        if (bland) {
            const double exact = pick_ratio * (1.0 + 1e-14) + 1e-300;
            for (const auto& c : eligible_set) {
                if (strong_enough(c) && c.ratio <= exact) {
                    entering = c.var;
                    break;
                }
            }
        } else {
            const double band = pick_ratio + 1e-9 * (1.0 + pick_ratio);
            double best_alpha = 0.0;
            for (const auto& c : eligible_set) {
                if (strong_enough(c) && c.ratio <= band && std::abs(c.alpha) > best_alpha) {
                    best_alpha = std::abs(c.alpha);
                    entering = c.var;
                }
            }
        }
        if (entering == total_vars()) return LpStatus::Infeasible;

#ifdef RISKSCORE_LP_TRACE
        if (pivots_ > 5000 && pivots_ < 5060) {
            std::fprintf(stderr,
                         "piv=%llu slot=%zu leave=%zu viol=%.3e below=%d enter=%zu ratio=%.3e "
                         "bland=%d\n",
                         (unsigned long long)pivots_, slot, basic_[slot], worst, (int)below,
                         entering, best_ratio, (int)bland);
        }
#endif
        if (!pivot(slot, entering, below ? VarStatus::AtLower : VarStatus::AtUpper)) {
            // Pivot element too small once recomputed: refresh the basis and
            // retry the iteration from exact values.
            refactorize();
            since_refactor = 0;
            if (++tiny_pivot_retries > 40) {
                throw SolverError("dual simplex stuck on degenerate pivots");
            }
            continue;
        }
        tiny_pivot_retries = 0;
        ++local_pivots;
        ++since_refactor;
        if (since_refactor >= static_cast<std::uint64_t>(kRefactorEvery)) {
            refactorize();
            since_refactor = 0;
        } else {
            compute_basic_values();
        }
    }
}

void LpSolver::rebuild_solution() {
    x_.assign(total_vars(), 0.0);
    for (std::size_t v = 0; v < total_vars(); ++v) {
        if (state_[v] != VarStatus::Basic) x_[v] = nonbasic_value(v);
    }
    for (std::size_t k = 0; k < basic_.size(); ++k) x_[basic_[k]] = xb_[k];
    objective_ = 0.0;
    for (std::size_t v = 0; v < num_structural_; ++v) objective_ += cost_[v] * x_[v];
}

LpStatus LpSolver::solve() {
    if (!factorized_) refactorize();
    // Bound crossings mean the region is empty; report without pivoting.
    for (std::size_t v = 0; v < total_vars(); ++v) {
        if (var_lower(v) > var_upper(v) + 1e-12) return LpStatus::Infeasible;
    }
    // Alternate dual-feasibility repair and dual pivots until a clean
    // optimum survives a refactorization.
    for (int pass = 0; pass < 8; ++pass) {
        ensure_dual_feasible();
        const LpStatus status = dual_simplex();
        if (status == LpStatus::Infeasible) return status;
        refactorize();
        if (dual_simplex() == LpStatus::Infeasible) return LpStatus::Infeasible;
        if (ensure_dual_feasible() == 0) {
            // No repairs needed and primal feasibility held: done.
            bool primal_ok = true;
            for (std::size_t k = 0; k < basic_.size() && primal_ok; ++k) {
                const std::size_t v = basic_[k];
                primal_ok = xb_[k] >= var_lower(v) - kFeasTol && xb_[k] <= var_upper(v) + kFeasTol;
            }
            if (primal_ok) {
                rebuild_solution();
                return LpStatus::Optimal;
            }
        }
    }
    // Diagnostics: worst primal and dual violations at the point of failure.
    double worst_primal = 0.0, worst_dual = 0.0;
    {
        std::vector<double> y;
        compute_duals(y);
        for (std::size_t k = 0; k < basic_.size(); ++k) {
            const std::size_t v = basic_[k];
            worst_primal = std::max(worst_primal, var_lower(v) - xb_[k]);
            worst_primal = std::max(worst_primal, xb_[k] - var_upper(v));
        }
        for (std::size_t v = 0; v < total_vars(); ++v) {
            if (state_[v] == VarStatus::Basic || var_lower(v) == var_upper(v)) continue;
            const double d = reduced_cost(v, y);
            if (state_[v] == VarStatus::AtLower) {
                worst_dual = std::max(worst_dual, -d);
            } else {
                worst_dual = std::max(worst_dual, d);
            }
        }
    }
    throw SolverError("simplex failed to converge (rows=" + std::to_string(rows_.size()) +
                      ", pivots=" + std::to_string(pivots_) +
                      ", primal_viol=" + format_double(worst_primal) +
                      ", dual_viol=" + format_double(worst_dual) + ")");
}

std::vector<std::size_t> LpSolver::remove_rows(const std::vector<std::size_t>& candidates) {
    std::vector<std::size_t> removable;
    for (std::size_t r : candidates) {
        if (r >= rows_.size()) continue;
        if (state_[num_structural_ + r] == VarStatus::Basic) removable.push_back(r);
    }
    if (removable.empty()) return removable;
    std::sort(removable.begin(), removable.end());

    std::vector<bool> drop(rows_.size(), false);
    for (std::size_t r : removable) drop[r] = true;

    std::vector<std::size_t> new_index(rows_.size(), 0);
    std::size_t next = 0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (!drop[r]) new_index[r] = next++;
    }

    std::vector<LinearRow> rows;
    std::vector<double> rhs;
    std::vector<double> lower(lower_.begin(), lower_.begin() + num_structural_);
    std::vector<double> upper(upper_.begin(), upper_.begin() + num_structural_);
    std::vector<VarStatus> state(state_.begin(), state_.begin() + num_structural_);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (drop[r]) continue;
        rows.push_back(rows_[r]);
        rhs.push_back(rhs_[r]);
        lower.push_back(lower_[num_structural_ + r]);
        upper.push_back(upper_[num_structural_ + r]);
        state.push_back(state_[num_structural_ + r]);
    }
    std::vector<std::size_t> basic;
    for (std::size_t v : basic_) {
        if (is_slack(v)) {
            const std::size_t r = v - num_structural_;
            if (drop[r]) continue;
            basic.push_back(num_structural_ + new_index[r]);
        } else {
            basic.push_back(v);
        }
    }

    rows_ = std::move(rows);
    rhs_ = std::move(rhs);
    lower_ = std::move(lower);
    upper_ = std::move(upper);
    state_ = std::move(state);
    basic_ = std::move(basic);
    basic_slot_.assign(total_vars(), 0);
    for (std::size_t k = 0; k < basic_.size(); ++k) basic_slot_[basic_[k]] = k + 1;
    cols_.assign(num_structural_, {});
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        for (const auto& [var, coeff] : rows_[r].terms) cols_[var].emplace_back(r, coeff);
    }
    factorized_ = false;
    return removable;
}

LpSolution lp_solve(const LinearProgram& lp, const Basis* warm) {
    LpSolver solver(lp);
    if (warm != nullptr) solver.load_basis(*warm);
    LpSolution out;
    out.status = solver.solve();
    if (out.status == LpStatus::Optimal) {
        out.x.assign(solver.x().begin(), solver.x().end());
        out.objective = solver.objective();
        out.basis = solver.basis();
    }
    return out;
}

LinearProgram lp_add_rows(LinearProgram lp, std::span<const LinearRow> rows) {
    for (const auto& row : rows) {
        for (const auto& [var, coeff] : row.terms) {
            if (var >= lp.num_vars) throw ArgumentError("row references unknown variable");
        }
        lp.rows.push_back(row);
    }
    return lp;
}

LinearProgram lp_tighten_bound(LinearProgram lp, std::size_t var, double lo, double hi) {
    if (var >= lp.num_vars) throw ArgumentError("unknown variable");
    if (lo > hi) throw InfeasibleError("bound crossing on variable " + std::to_string(var));
    lp.lower[var] = lo;
    lp.upper[var] = hi;
    return lp;
}

}  // namespace riskscore
