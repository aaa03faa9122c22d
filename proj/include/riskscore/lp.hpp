#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskscore/problem.hpp"

namespace riskscore {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Minimization LP with per-variable bounds and sparse inequality rows.
/// Structural variables must have finite bounds (the lattice box guarantees
/// this for every LP the solver builds).
struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> objective;
    std::vector<LinearRow> rows;

    void validate() const;
};

enum class LpStatus { Optimal, Infeasible };

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper };

/// Basis descriptor for warm starts: a status per variable (structural
/// variables first, then one slack per row) plus the basic variable of each
/// row position.
struct Basis {
    std::vector<VarStatus> status;
    std::vector<std::size_t> basic;
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    Basis basis;
};

/// Bounded-variable revised simplex. All solves run the dual simplex: the
/// initial all-slack basis is dual feasible by construction, and neither
/// added rows nor bound changes disturb dual feasibility, so warm re-solves
/// start exactly where the previous optimum left off. Primal infeasibility
/// surfaces as dual unboundedness. Deterministic: fixed pricing with a
/// Bland-style fallback after long degenerate stretches.
class LpSolver {
  public:
    explicit LpSolver(LinearProgram lp);

    LpStatus solve();

    /// Valid after solve() returned Optimal.
    double objective() const { return objective_; }
    std::span<const double> x() const { return {x_.data(), num_structural_}; }
    double x(std::size_t j) const { return x_[j]; }

    /// Appended rows keep the current basis warm (their slacks enter basic).
    void add_rows(std::span<const LinearRow> rows);

    /// Replaces the bounds of a structural variable. Returns false when the
    /// bounds cross, which signals an infeasible region to the caller.
    bool set_variable_bounds(std::size_t var, double lo, double hi);

    /// Drops rows whose slack is currently basic; returns indices actually
    /// removed (ascending). Row indices above the removed ones shift down.
    std::vector<std::size_t> remove_rows(const std::vector<std::size_t>& candidates);

    /// Activity of row r at the current solution.
    double row_activity(std::size_t r) const;

    std::size_t num_rows() const { return rows_.size(); }
    std::size_t num_structural() const { return num_structural_; }
    double variable_lower(std::size_t var) const { return lower_[var]; }
    double variable_upper(std::size_t var) const { return upper_[var]; }

    Basis basis() const;
    void load_basis(const Basis& basis);

    std::uint64_t pivots() const { return pivots_; }

  private:
    std::size_t num_structural_ = 0;
    std::vector<double> cost_;       // structural costs; slacks cost 0
    std::vector<double> lower_, upper_;  // all variables
    std::vector<LinearRow> rows_;
    std::vector<double> rhs_;
    // Column-wise copy of the row matrix for pricing, slacks excluded
    // (slack columns are unit vectors handled implicitly).
    std::vector<std::vector<std::pair<std::size_t, double>>> cols_;

    std::vector<VarStatus> state_;
    std::vector<std::size_t> basic_;     // variable in each basis slot
    std::vector<std::size_t> basic_slot_; // var -> slot + 1, 0 if nonbasic
    std::vector<double> binv_;           // dense m x m row-major
    std::vector<double> xb_;             // basic variable values
    std::vector<double> x_;              // full primal point after solve
    double objective_ = 0.0;
    std::uint64_t pivots_ = 0;
    bool factorized_ = false;

    std::size_t total_vars() const { return num_structural_ + rows_.size(); }
    // Anti-degeneracy: every finite bound is relaxed outward by a tiny
    // deterministic per-variable amount, so LP values stay valid lower
    // bounds while ties in the ratio test become rare.
    double perturbation(std::size_t v, double bound) const;
    double var_lower(std::size_t v) const {
        const double b = lower_[v];
        return std::isinf(b) ? b : b - perturbation(v, b);
    }
    double var_upper(std::size_t v) const {
        const double b = upper_[v];
        return std::isinf(b) ? b : b + perturbation(v, b);
    }
    double nonbasic_value(std::size_t v) const;
    bool is_slack(std::size_t v) const { return v >= num_structural_; }

    void refactorize();
    void compute_basic_values();
    void compute_duals(std::vector<double>& y) const;
    double reduced_cost(std::size_t v, const std::vector<double>& y) const;
    void column_times(std::size_t v, std::vector<double>& out) const;  // out = A_v
    void ftran(const std::vector<double>& a, std::vector<double>& w) const;
    std::size_t ensure_dual_feasible();  // returns number of adjustments
    LpStatus dual_simplex();
    bool pivot(std::size_t slot, std::size_t entering, VarStatus leaving_state);
    void rebuild_solution();
};

/// One-shot solve, optionally warm-started.
LpSolution lp_solve(const LinearProgram& lp, const Basis* warm = nullptr);

/// Value-semantics row addition (the incremental path lives on LpSolver).
LinearProgram lp_add_rows(LinearProgram lp, std::span<const LinearRow> rows);

/// Value-semantics bound tightening; throws InfeasibleError when the new
/// bounds cross.
LinearProgram lp_tighten_bound(LinearProgram lp, std::size_t var, double lo, double hi);

}  // namespace riskscore
