#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "riskscore/bnb.hpp"
#include "riskscore/heuristics.hpp"
#include "riskscore/lp.hpp"
#include "riskscore/problem.hpp"

namespace riskscore {

enum class Termination { GapReached, TimeLimit, NodeLimit, QueueExhausted };

std::string to_string(Termination t);

struct TraceRow {
    double wall_seconds = 0.0;
    std::uint64_t nodes = 0;
    std::uint64_t cuts = 0;
    double objective_min = 0.0;
    double objective_max = 0.0;
    double gap = 1.0;
    std::string event;
};

struct SolveStats {
    std::uint64_t nodes = 0;
    std::uint64_t cuts = 0;
    std::uint64_t incumbent_updates = 0;
    std::uint64_t lp_pivots = 0;
    double wall_seconds = 0.0;
    double data_seconds = 0.0;  // loss value / gradient computation
};

struct SolveResult {
    std::vector<std::int64_t> best;
    double objective = std::numeric_limits<double>::infinity();
    double lower_bound = 0.0;
    double gap = 1.0;
    Termination termination = Termination::QueueExhausted;
    SolverBounds bounds;
    SolveStats stats;
    std::vector<TraceRow> trace;
};

struct SolverOptions {
    double gap_tol = 0.0;
    double time_limit = std::numeric_limits<double>::infinity();
    std::uint64_t node_limit = std::numeric_limits<std::uint64_t>::max();

    // Heuristic cadence: DCD polishes integer candidates whose objective is
    // within polish_threshold of the upper bound; rounding runs on fractional
    // LP solutions whenever the lower bound improves.
    bool polish = true;
    double polish_threshold = 0.10;
    bool round_on_bound_improvement = true;

    // 0 disables subsampled rounding; otherwise the fraction of examples the
    // rounding heuristic sees.
    double subsample_fraction = 0.0;
    double subsample_delta = 0.05;
    std::uint64_t seed = 0;

    bool initialize = true;
    double init_time_limit = 60.0;
    std::size_t init_iteration_cap = 100;

    bool use_lookup_table = true;
    bool record_trace = true;
};

/// Fixpoint propagation of bounds among objective, loss, and support count.
/// Returns false when the tightened bounds cross, which proves that no
/// feasible solution can beat the current incumbent.
bool chained_updates(SolverBounds& bounds, double c0);

/// Initial bounds from the loss range over the box and the model-size cap.
SolverBounds initial_bounds(const ProblemSpec& spec);

/// Lattice cutting-plane algorithm: branch-and-bound over the coefficient
/// box where each node solves a surrogate LP carrying the shared cut pool,
/// cuts are added lazily at integer candidates, and incumbents use the true
/// objective. Produces an optimality-gap certificate.
SolveResult lcpa_solve(const ProblemSpec& spec, const SolverOptions& options = {});

enum class CpaMode { LpRelaxation, Mip };

struct CpaIteration {
    double seconds = 0.0;       // time to solve this surrogate
    double lower_bound = 0.0;
    double upper_bound = std::numeric_limits<double>::infinity();
    std::uint64_t nodes = 0;    // surrogate branch-and-bound nodes (Mip mode)
};

struct CpaResult {
    SolveResult core;
    std::vector<Cut> cuts;
    std::vector<std::vector<double>> iterates;
    std::vector<CpaIteration> iterations;
    bool stalled = false;  // a surrogate hit its per-iteration time cap
};

struct CpaOptions {
    double gap_tol = 0.0;
    std::size_t iteration_cap = 100;
    double time_limit = std::numeric_limits<double>::infinity();
    double per_iteration_time_limit = std::numeric_limits<double>::infinity();
    // LP-mode stall rule: stop when the relative bound improvement over the
    // last `stall_window` iterations falls below `stall_tolerance`.
    double stall_tolerance = 1e-4;
    std::size_t stall_window = 5;
    bool use_lookup_table = true;
};

/// Classic cutting-plane algorithm. In Mip mode every iteration solves the
/// surrogate MIP to optimality (or stalls on its per-iteration cap); in
/// LpRelaxation mode the surrogate is the relaxation over the box and the
/// result carries the relaxation bound plus all iterates.
CpaResult cpa_solve(const ProblemSpec& spec, CpaMode mode, const CpaOptions& options = {});

struct InitializationResult {
    std::optional<std::vector<std::int64_t>> incumbent;
    double incumbent_objective = std::numeric_limits<double>::infinity();
    std::vector<Cut> cuts;
    SolverBounds bounds;
    double data_seconds = 0.0;
};

/// Warm-start procedure: CPA on the LP relaxation harvests cuts and the
/// relaxation bound, every iterate is rounded and polished to seed the
/// incumbent, and chained updates tighten the bounds.
InitializationResult initialize(const ProblemSpec& spec, const SolverOptions& options = {});

/// Writes a recorded trace as CSV (wall_time_s, nodes, cuts, V_min, V_max,
/// gap, event), with `# key: value` header lines prepended.
void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& header = {});

}  // namespace riskscore
