#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "riskscore/coefficients.hpp"
#include "riskscore/dataset.hpp"
#include "riskscore/loss.hpp"

namespace riskscore {

// Operational constraints over coefficients and their selection indicators
// alpha_j = 1[lambda_j != 0].
struct MaxModelSize {
    std::size_t k;
};
struct SignConstraint {
    std::string feature;
    int sign;  // +1 or -1
};
struct AtMostKOf {
    std::size_t k;
    std::vector<std::string> features;
};
// Non-zero features may come from at most one of the two groups.
struct ExclusiveChoice {
    std::vector<std::string> group_a;
    std::vector<std::string> group_b;
};
// Selecting the antecedent requires selecting at least one consequent.
struct Implies {
    std::string antecedent;
    std::vector<std::string> consequents;
};
// User-provided row over the indicators: sum coeff_f * alpha_f  rel  rhs.
struct LinearIndicatorRow {
    std::vector<std::pair<std::string, double>> terms;
    char relation;  // '<' for <=, '>' for >=, '=' for equality
    double rhs;
};

using OperationalConstraint = std::variant<MaxModelSize, SignConstraint, AtMostKOf,
                                           ExclusiveChoice, Implies, LinearIndicatorRow>;

std::string describe(const OperationalConstraint& c);

enum class Relation { LessEqual, GreaterEqual, Equal };

/// One compiled linear row over the stacked variable vector
/// [lambda_0..lambda_d, alpha_1..alpha_d, aux selectors...].
struct LinearRow {
    std::vector<std::pair<std::size_t, double>> terms;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

struct CompiledConstraints {
    std::vector<LinearRow> rows;
    std::size_t num_aux = 0;  // auxiliary binary selectors appended after alpha

    std::size_t lambda_var(std::size_t j) const { return j; }
    std::size_t alpha_var(std::size_t d, std::size_t j) const { return d + j; }  // j in 1..d
    std::size_t aux_var(std::size_t d, std::size_t g) const { return 2 * d + 1 + g; }
};

/// Bounds on the optimal objective (V), loss (L), and support size (R)
/// carried through the solve and tightened by chained updates.
struct SolverBounds {
    double objective_min = 0.0;
    double objective_max = 0.0;
    double loss_min = 0.0;
    double loss_max = 0.0;
    double size_min = 0.0;
    double size_max = 0.0;
};

/// The risk score problem: dataset, lattice, l0 penalty, and operational
/// constraints. Immutable after construction; shareable across threads.
class ProblemSpec {
  public:
    ProblemSpec(const Dataset& data, CoefficientSet coefset, double c0,
                std::vector<OperationalConstraint> constraints = {});

    const Dataset& data() const { return *data_; }
    const CoefficientSet& coefficients() const { return coefset_; }
    double c0() const { return c0_; }
    const std::vector<OperationalConstraint>& constraints() const { return constraints_; }

    std::size_t dim() const { return coefset_.dim(); }

    /// Cached model-size cap implied by a MaxModelSize constraint, else d.
    std::size_t size_cap() const { return size_cap_; }

    double penalty(const std::vector<std::int64_t>& coef) const;
    std::size_t support_size(const std::vector<std::int64_t>& coef) const;

  private:
    const Dataset* data_;
    CoefficientSet coefset_;
    double c0_;
    std::vector<OperationalConstraint> constraints_;
    std::size_t size_cap_;
};

/// loss + C0 * |support|, intercept exempt from the penalty.
double objective_value(const std::vector<std::int64_t>& coef, const ProblemSpec& spec);

struct FeasibilityResult {
    bool feasible = true;
    std::vector<std::string> violations;
    explicit operator bool() const { return feasible; }
};

FeasibilityResult is_feasible(const std::vector<std::int64_t>& coef, const ProblemSpec& spec);

/// Indicator linking rows plus every operational constraint compiled to
/// linear rows over (lambda, alpha, aux).
CompiledConstraints compile_constraints(const ProblemSpec& spec);

/// All feasible lattice points in lexicographic order over
/// (lambda_0, ..., lambda_d). Refuses lattices larger than cap.
std::vector<std::vector<std::int64_t>> enumerate_feasible(const ProblemSpec& spec,
                                                          double cap = 1e7);

/// Line-oriented constraint file:
///   max_size K
///   sign FEATURE +|-
///   at_most_k K F1 F2 ...
///   exclusive A1 A2 | B1 B2
///   implies F -> F1 F2 ...
/// Comments start with '#'.
std::vector<OperationalConstraint> parse_constraint_file(const std::string& path);

}  // namespace riskscore
