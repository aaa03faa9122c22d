#include "riskscore/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>

namespace riskscore {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::GapReached: return "gap_reached";
        case Termination::TimeLimit: return "time_limit";
        case Termination::NodeLimit: return "node_limit";
        case Termination::QueueExhausted: return "queue_exhausted";
    }
    return "unknown";
}

bool chained_updates(SolverBounds& b, double c0) {
    for (int pass = 0; pass < 1000; ++pass) {
        bool changed = false;
        auto raise = [&changed](double& slot, double candidate) {
            if (candidate > slot) {
                slot = candidate;
                changed = true;
            }
        };
        auto lower = [&changed](double& slot, double candidate) {
            if (candidate < slot) {
                slot = candidate;
                changed = true;
            }
        };
        raise(b.objective_min, b.loss_min + c0 * b.size_min);
        lower(b.objective_max, b.loss_max + c0 * b.size_max);
        raise(b.loss_min, b.objective_min - c0 * b.size_max);
        lower(b.loss_max, b.objective_max - c0 * b.size_min);
        lower(b.size_max, std::floor((b.objective_max - b.loss_min) / c0));
        if (!changed) break;
    }
    const double tol = 1e-9;
    return b.objective_min <= b.objective_max + tol && b.loss_min <= b.loss_max + tol &&
           b.size_min <= b.size_max + tol;
}

SolverBounds initial_bounds(const ProblemSpec& spec) {
    SolverBounds b;
    const std::size_t cap = spec.size_cap();
    const std::optional<std::size_t> r_max =
        cap < spec.dim() ? std::optional<std::size_t>(cap) : std::nullopt;
    const auto [lo, hi] = loss_range(spec.data(), spec.coefficients(), r_max);
    b.loss_min = lo;
    b.loss_max = hi;
    b.size_min = 0.0;
    b.size_max = static_cast<double>(cap);
    b.objective_min = b.loss_min + spec.c0() * b.size_min;
    b.objective_max = b.loss_max + spec.c0() * b.size_max;
    return b;
}

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

struct VarLayout {
    std::size_t d = 0;
    std::size_t naux = 0;

    std::size_t lambda(std::size_t j) const { return j; }
    std::size_t alpha(std::size_t j) const { return d + j; }  // j in 1..d
    std::size_t aux(std::size_t g) const { return 2 * d + 1 + g; }
    std::size_t loss_var() const { return 2 * d + 1 + naux; }
    std::size_t size_var() const { return loss_var() + 1; }
    std::size_t objective_var() const { return loss_var() + 2; }
    std::size_t count() const { return loss_var() + 3; }
};

LinearRow make_cut_row(const Cut& cut, const VarLayout& vars) {
    // L >= value + g . (lambda - anchor)
    LinearRow row;
    row.relation = Relation::GreaterEqual;
    double rhs = cut.value;
    for (std::size_t j = 0; j < cut.gradient.size(); ++j) {
        const double g = cut.gradient[j];
        if (g == 0.0) continue;
        row.terms.emplace_back(vars.lambda(j), -g);
        rhs -= g * cut.anchor[j];
    }
    row.terms.emplace_back(vars.loss_var(), 1.0);
    row.rhs = rhs;
    return row;
}

std::vector<std::int64_t> anchor_key(const std::vector<double>& anchor) {
    std::vector<std::int64_t> key(anchor.size());
    for (std::size_t j = 0; j < anchor.size(); ++j) key[j] = std::llround(anchor[j] * 1048576.0);
    return key;
}

// Surrogate LP shared by the lattice solver and the classic algorithm: the
// formulation rows, the cut pool with lazy activation, and the region /
// bound application hooks.
class SurrogateLp {
  public:
    SurrogateLp(const ProblemSpec& spec, const CompiledConstraints& compiled)
        : spec_(&spec), compiled_(&compiled) {
        vars_.d = spec.dim();
        vars_.naux = compiled.num_aux;
    }

    const VarLayout& vars() const { return vars_; }
    LpSolver& lp() { return *lp_; }

    void build(const SolverBounds& bounds) {
        const std::size_t d = vars_.d;
        LinearProgram prog;
        prog.num_vars = vars_.count();
        prog.lower.assign(prog.num_vars, 0.0);
        prog.upper.assign(prog.num_vars, 1.0);
        prog.objective.assign(prog.num_vars, 0.0);
        const auto& box = spec_->coefficients();
        for (std::size_t j = 0; j <= d; ++j) {
            prog.lower[vars_.lambda(j)] = static_cast<double>(box.lb[j]);
            prog.upper[vars_.lambda(j)] = static_cast<double>(box.ub[j]);
        }
        prog.lower[vars_.loss_var()] = bounds.loss_min;
        prog.upper[vars_.loss_var()] = bounds.loss_max;
        prog.lower[vars_.size_var()] = bounds.size_min;
        prog.upper[vars_.size_var()] = bounds.size_max;
        prog.lower[vars_.objective_var()] = bounds.objective_min;
        prog.upper[vars_.objective_var()] = bounds.objective_max;
        prog.objective[vars_.objective_var()] = 1.0;

        // V = L + C0 R and R = sum alpha.
        LinearRow objective_row;
        objective_row.relation = Relation::Equal;
        objective_row.rhs = 0.0;
        objective_row.terms = {{vars_.objective_var(), 1.0},
                               {vars_.loss_var(), -1.0},
                               {vars_.size_var(), -spec_->c0()}};
        prog.rows.push_back(std::move(objective_row));

        LinearRow size_row;
        size_row.relation = Relation::Equal;
        size_row.rhs = 0.0;
        size_row.terms.emplace_back(vars_.size_var(), 1.0);
        for (std::size_t j = 1; j <= d; ++j) size_row.terms.emplace_back(vars_.alpha(j), -1.0);
        prog.rows.push_back(std::move(size_row));

        for (const auto& row : compiled_->rows) prog.rows.push_back(row);

        lp_ = std::make_unique<LpSolver>(std::move(prog));
        structural_rows_ = lp_->num_rows();
        row_cut_.assign(structural_rows_, std::numeric_limits<std::size_t>::max());
        cut_row_.assign(pool_.size(), 0);
        // Reactivate the whole pool; callers trim later if they care.
        for (std::size_t c = 0; c < pool_.size(); ++c) activate(c);
    }

    void apply_bounds(const SolverBounds& bounds) {
        lp_->set_variable_bounds(vars_.loss_var(), bounds.loss_min, bounds.loss_max);
        lp_->set_variable_bounds(vars_.size_var(), bounds.size_min, bounds.size_max);
        lp_->set_variable_bounds(vars_.objective_var(), bounds.objective_min,
                                 bounds.objective_max);
    }

    bool apply_region(const Region& region) {
        const std::size_t d = vars_.d;
        bool ok = true;
        for (std::size_t j = 0; j <= d; ++j) {
            ok = ok && lp_->set_variable_bounds(vars_.lambda(j), static_cast<double>(region.lb[j]),
                                                static_cast<double>(region.ub[j]));
        }
        for (std::size_t j = 1; j <= d; ++j) {
            const std::int8_t fix = region.alpha_fix[j - 1];
            const double lo = fix == 1 ? 1.0 : 0.0;
            const double hi = fix == 0 ? 0.0 : 1.0;
            ok = ok && lp_->set_variable_bounds(vars_.alpha(j), lo, hi);
        }
        for (std::size_t g = 0; g < vars_.naux; ++g) {
            const std::int8_t fix = region.aux_fix[g];
            const double lo = fix == 1 ? 1.0 : 0.0;
            const double hi = fix == 0 ? 0.0 : 1.0;
            ok = ok && lp_->set_variable_bounds(vars_.aux(g), lo, hi);
        }
        return ok;
    }

    /// Adds a cut to the pool (deduplicated by anchor) and activates it when
    /// the LP is already built. Returns true when the pool grew.
    bool add_cut(Cut cut) {
        const auto key = anchor_key(cut.anchor);
        auto it = pool_index_.find(key);
        if (it != pool_index_.end()) {
            if (lp_ && cut_row_[it->second] == 0) activate(it->second);
            return false;
        }
        const std::size_t idx = pool_.size();
        pool_.push_back(std::move(cut));
        pool_index_.emplace(key, idx);
        cut_row_.push_back(0);
        if (lp_) activate(idx);
        return true;
    }

    std::size_t pool_size() const { return pool_.size(); }
    const std::vector<Cut>& pool() const { return pool_; }

    /// Activates pool cuts violated at (lambda, L). Returns the count.
    std::size_t activate_violated(std::span<const double> lambda, double loss_value) {
        std::size_t activated = 0;
        for (std::size_t c = 0; c < pool_.size(); ++c) {
            if (cut_row_[c] != 0) continue;
            if (pool_[c].evaluate(lambda) > loss_value + 1e-7) {
                activate(c);
                ++activated;
            }
        }
        return activated;
    }

    /// Drops loose cut rows, keeping the given number of most recent cuts.
    void cleanup(std::size_t keep_recent) {
        if (pool_.size() <= keep_recent) return;
        std::vector<std::size_t> candidates;
        for (std::size_t r = structural_rows_; r < lp_->num_rows(); ++r) {
            const std::size_t c = row_cut_[r];
            if (c == std::numeric_limits<std::size_t>::max()) continue;
            if (c + keep_recent >= pool_.size()) continue;  // recent cuts stay
            candidates.push_back(r);
        }
        const std::vector<std::size_t> removed = lp_->remove_rows(candidates);
        if (removed.empty()) return;
        std::vector<std::size_t> new_row_cut;
        new_row_cut.reserve(row_cut_.size() - removed.size());
        std::size_t next_removed = 0;
        for (std::size_t r = 0; r < row_cut_.size(); ++r) {
            if (next_removed < removed.size() && removed[next_removed] == r) {
                const std::size_t c = row_cut_[r];
                if (c != std::numeric_limits<std::size_t>::max()) cut_row_[c] = 0;
                ++next_removed;
                continue;
            }
            new_row_cut.push_back(row_cut_[r]);
        }
        row_cut_ = std::move(new_row_cut);
        for (std::size_t r = 0; r < row_cut_.size(); ++r) {
            const std::size_t c = row_cut_[r];
            if (c != std::numeric_limits<std::size_t>::max()) cut_row_[c] = r + 1;
        }
    }

    RelaxationPoint extract() const {
        RelaxationPoint pt;
        pt.lambda.resize(vars_.d + 1);
        for (std::size_t j = 0; j <= vars_.d; ++j) pt.lambda[j] = lp_->x(vars_.lambda(j));
        pt.alpha.resize(vars_.d);
        for (std::size_t j = 1; j <= vars_.d; ++j) pt.alpha[j - 1] = lp_->x(vars_.alpha(j));
        pt.aux.resize(vars_.naux);
        for (std::size_t g = 0; g < vars_.naux; ++g) pt.aux[g] = lp_->x(vars_.aux(g));
        return pt;
    }

    double loss_value() const { return lp_->x(vars_.loss_var()); }

  private:
    void activate(std::size_t pool_idx) {
        const LinearRow row = make_cut_row(pool_[pool_idx], vars_);
        lp_->add_rows({&row, 1});
        row_cut_.push_back(pool_idx);
        cut_row_[pool_idx] = lp_->num_rows();  // row index + 1
    }

    const ProblemSpec* spec_;
    const CompiledConstraints* compiled_;
    VarLayout vars_;
    std::unique_ptr<LpSolver> lp_;
    std::size_t structural_rows_ = 0;
    std::vector<Cut> pool_;
    std::map<std::vector<std::int64_t>, std::size_t> pool_index_;
    std::vector<std::size_t> row_cut_;  // LP row -> pool index (max() = structural)
    std::vector<std::size_t> cut_row_;  // pool index -> LP row + 1 (0 = inactive)
};

std::vector<std::int64_t> round_point(const std::vector<double>& lambda, const Region& region) {
    std::vector<std::int64_t> out(lambda.size());
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        const std::int64_t v = std::llround(lambda[j]);
        out[j] = std::clamp(v, region.lb[j], region.ub[j]);
    }
    return out;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Keeps the anchor inside the box and, when a model-size cap is active,
// zeroes all but the largest-magnitude coefficients so that rounding can
// produce feasible candidates.
std::vector<double> prepare_anchor(std::vector<double> anchor, const ProblemSpec& spec,
                                   std::size_t cap) {
    const auto& box = spec.coefficients();
    for (std::size_t j = 0; j < anchor.size(); ++j) {
        anchor[j] = std::clamp(anchor[j], static_cast<double>(box.lb[j]),
                               static_cast<double>(box.ub[j]));
    }
    if (cap < spec.dim()) {
        std::vector<std::size_t> idx;
        for (std::size_t j = 1; j < anchor.size(); ++j) {
            if (anchor[j] != 0.0) idx.push_back(j);
        }
        if (idx.size() > cap) {
            std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(anchor[a]) > std::abs(anchor[b]);
            });
            for (std::size_t p = cap; p < idx.size(); ++p) anchor[idx[p]] = 0.0;
        }
    }
    return anchor;
}

}  // namespace

// ---------------------------------------------------------------------------
// LCPA

namespace {

class LcpaRun {
  public:
    LcpaRun(const ProblemSpec& spec, const SolverOptions& options)
        : spec_(spec),
          options_(options),
          compiled_(compile_constraints(spec)),
          surrogate_(spec, compiled_),
          engine_(spec.data()),
          rng_(options.seed) {
        if (options_.use_lookup_table) {
            engine_.enable_table(spec.coefficients(), r_max_hint());
        }
    }

    SolveResult run() {
        start_ = std::chrono::steady_clock::now();
        bounds_ = initial_bounds(spec_);
        lower_bound_ = std::max(0.0, bounds_.objective_min);

        if (options_.initialize) {
            run_initialization();
        }

        surrogate_.build(bounds_);
        built_ = true;
        queue_.push(Region::full(spec_.coefficients(), compiled_.num_aux),
                    bounds_.objective_min);
        trace("start");

        Termination termination = Termination::QueueExhausted;
        while (true) {
            if (queue_.empty()) {
                termination = Termination::QueueExhausted;
                break;
            }
            if (incumbent_ && gap() <= options_.gap_tol) {
                termination = Termination::GapReached;
                break;
            }
            if (elapsed_seconds(start_) > options_.time_limit) {
                termination = Termination::TimeLimit;
                break;
            }
            if (stats_.nodes >= options_.node_limit) {
                termination = Termination::NodeLimit;
                break;
            }
            auto node = queue_.pop_best();
            if (!node) {
                termination = Termination::QueueExhausted;
                break;
            }
            if (node->bound >= upper_bound()) {
                update_lower_bound();
                continue;  // pruned at pop
            }
            ++stats_.nodes;
            process_node(*node);
            update_lower_bound();
            if ((stats_.nodes & 0x1ff) == 0) surrogate_.cleanup(64);
        }

        if (termination == Termination::QueueExhausted ||
            termination == Termination::GapReached) {
            if (!incumbent_) {
                throw InfeasibleError("the lattice box admits no feasible risk score");
            }
        }
        if (termination == Termination::QueueExhausted) {
            // Everything explored: the incumbent is optimal.
            set_lower_bound(incumbent_value_);
        }

        SolveResult out;
        out.best = incumbent_ ? *incumbent_ : std::vector<std::int64_t>{};
        out.objective = incumbent_value_;
        out.lower_bound = lower_bound_;
        out.gap = gap();
        out.termination = termination;
        out.bounds = bounds_;
        out.bounds.objective_min = lower_bound_;
        out.bounds.objective_max = std::min(bounds_.objective_max, incumbent_value_);
        out.stats = stats_;
        out.stats.wall_seconds = elapsed_seconds(start_);
        out.stats.data_seconds = engine_.data_seconds() + init_data_seconds_;
        out.stats.lp_pivots = surrogate_.lp().pivots();
        trace("final");
        out.trace = std::move(trace_);
        return out;
    }

  private:
    std::optional<std::size_t> r_max_hint() const {
        return spec_.size_cap() < spec_.dim() ? std::optional<std::size_t>(spec_.size_cap())
                                              : std::nullopt;
    }

    double upper_bound() const { return std::min(incumbent_value_, bounds_.objective_max); }

    double gap() const {
        if (!incumbent_ || incumbent_value_ <= 0.0) return 1.0;
        return std::max(0.0, 1.0 - lower_bound_ / incumbent_value_);
    }

    void set_lower_bound(double value) {
        value = std::min(value, upper_bound());
        if (value > lower_bound_) lower_bound_ = value;
    }

    void trace(const std::string& event) {
        if (!options_.record_trace) return;
        TraceRow row;
        row.wall_seconds = elapsed_seconds(start_);
        row.nodes = stats_.nodes;
        row.cuts = stats_.cuts;
        row.objective_min = lower_bound_;
        row.objective_max = incumbent_value_;
        row.gap = gap();
        row.event = event;
        trace_.push_back(std::move(row));
    }

    void run_initialization() {
        const InitializationResult init = initialize(spec_, options_);
        for (const Cut& cut : init.cuts) {
            if (surrogate_.add_cut(cut)) ++stats_.cuts;
        }
        bounds_ = init.bounds;
        init_data_seconds_ = init.data_seconds;
        if (init.incumbent) {
            incumbent_ = *init.incumbent;
            incumbent_value_ = init.incumbent_objective;
            ++stats_.incumbent_updates;
        }
        set_lower_bound(bounds_.objective_min);
    }

    // Tighten bounds after an upper/lower bound event and push them into the
    // LP. A crossing proves the incumbent optimal.
    void chain(const std::string& why) {
        bounds_.objective_max = std::min(bounds_.objective_max, incumbent_value_);
        bounds_.objective_min = std::max(bounds_.objective_min, lower_bound_);
        const double old_size_max = bounds_.size_max;
        if (!chained_updates(bounds_, spec_.c0())) {
            // Bounds crossed: nothing below the incumbent remains.
            set_lower_bound(upper_bound());
        }
        if (surrogate_built()) surrogate_.apply_bounds(bounds_);
        if (bounds_.size_max < old_size_max && options_.use_lookup_table &&
            spec_.data().integer_valued()) {
            engine_.enable_table(spec_.coefficients(),
                                 static_cast<std::size_t>(bounds_.size_max));
        }
        (void)why;
    }

    bool surrogate_built() const { return built_; }

    bool try_incumbent(const std::vector<std::int64_t>& candidate, const char* label) {
        const auto feas = is_feasible(candidate, spec_);
        if (!feas.feasible) return false;
        std::vector<double> real(candidate.begin(), candidate.end());
        const double value = engine_.value(real) +
                             spec_.c0() * static_cast<double>(spec_.support_size(candidate));
        if (!(value < incumbent_value_)) return false;
        incumbent_ = candidate;
        incumbent_value_ = value;
        ++stats_.incumbent_updates;
        queue_.prune(upper_bound());
        chain(label);
        trace("incumbent");
        return true;
    }

    void maybe_polish(const std::vector<std::int64_t>& candidate, double value) {
        if (!options_.polish) return;
        if (incumbent_ && value > incumbent_value_ * (1.0 + options_.polish_threshold)) return;
        auto polished = dcd_polish(candidate, spec_, engine_);
        if (polished != candidate) try_incumbent(polished, "polish");
    }

    void maybe_round(const std::vector<double>& lambda) {
        if (!options_.round_on_bound_improvement) return;
        if (lower_bound_ <= last_round_bound_ + 1e-12) return;
        last_round_bound_ = lower_bound_;
        const auto anchor = prepare_anchor(lambda, spec_, effective_cap());
        std::vector<std::int64_t> rounded;
        if (options_.subsample_fraction > 0.0 && options_.subsample_fraction < 1.0) {
            const std::size_t n = spec_.data().n();
            const std::size_t m = std::max<std::size_t>(
                1, static_cast<std::size_t>(options_.subsample_fraction * n));
            auto proposal = subsampled_round(anchor, spec_, engine_, m,
                                             options_.subsample_delta, upper_bound(), rng_);
            if (!proposal) return;
            rounded = std::move(*proposal);
        } else {
            rounded = sequential_round(anchor, spec_, engine_);
        }
        if (!is_feasible(rounded, spec_)) return;
        rounded = dcd_polish(std::move(rounded), spec_, engine_);
        try_incumbent(rounded, "rounding");
    }

    std::size_t effective_cap() const {
        return std::min<std::size_t>(spec_.size_cap(),
                                     static_cast<std::size_t>(std::max(0.0, bounds_.size_max)));
    }

    void process_node(const Node& node) {
        if (!surrogate_.apply_region(node.region)) return;  // crossed bounds
        while (true) {
            if (surrogate_.lp().solve() == LpStatus::Infeasible) return;
            const RelaxationPoint point = surrogate_.extract();
            const double lp_value = surrogate_.lp().objective();
            if (lp_value >= upper_bound()) return;  // dominated

            // Lazy pool pass: any stored cut violated here re-enters first.
            if (surrogate_.activate_violated(point.lambda, surrogate_.loss_value()) > 0) {
                continue;
            }

            if (!is_integral_point(point)) {
                for (auto& child : split_region(node.region, point)) {
                    queue_.push(std::move(child), lp_value);
                }
                update_lower_bound();
                maybe_round(point.lambda);
                return;
            }

            // Integral candidate.
            const std::vector<std::int64_t> candidate = round_point(point.lambda, node.region);
            const auto feas = is_feasible(candidate, spec_);
            if (!feas.feasible) {
                // The indicator relaxation padded alpha_j = 1 over a zero
                // coefficient; separate that coordinate and move on.
                std::size_t padded = 0;
                bool found = false;
                for (std::size_t j = 1; j <= spec_.dim(); ++j) {
                    if (candidate[j] == 0 && point.alpha[j - 1] > 0.5) {
                        padded = j;
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    throw SolverError("integral LP candidate is infeasible without padding");
                }
                for (auto& child : split_on_padding(node.region, padded)) {
                    queue_.push(std::move(child), lp_value);
                }
                return;
            }

            std::vector<double> real(candidate.begin(), candidate.end());
            const double true_loss = engine_.value(real);
            const Cut cut = engine_.cut(real);
            if (surrogate_.add_cut(cut)) ++stats_.cuts;

            if (surrogate_.loss_value() >= true_loss - 1e-9) {
                // The approximation is exact here; the LP value is the true
                // objective over this region.
                const double true_obj =
                    true_loss + spec_.c0() * static_cast<double>(spec_.support_size(candidate));
                try_incumbent(candidate, "candidate");
                maybe_polish(candidate, true_obj);
                return;
            }
            // Otherwise the fresh cut moved the surrogate; resolve this node.
        }
    }

    void update_lower_bound() {
        const double queue_min = queue_.empty() ? upper_bound() : queue_.min_bound();
        const double before = lower_bound_;
        set_lower_bound(std::max(queue_min, bounds_.objective_min));
        if (lower_bound_ > before + 1e-15) {
            chain("lower bound");
            trace("bound");
        }
    }

    const ProblemSpec& spec_;
    SolverOptions options_;
    CompiledConstraints compiled_;
    SurrogateLp surrogate_;
    LossEngine engine_;
    Rng rng_;
    NodeQueue queue_;
    SolverBounds bounds_;
    std::optional<std::vector<std::int64_t>> incumbent_;
    double incumbent_value_ = kInfD;
    double lower_bound_ = 0.0;
    double last_round_bound_ = -kInfD;
    double init_data_seconds_ = 0.0;
    bool built_ = false;
    SolveStats stats_;
    std::vector<TraceRow> trace_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

SolveResult lcpa_solve(const ProblemSpec& spec, const SolverOptions& options) {
    LcpaRun run(spec, options);
    return run.run();
}

// ---------------------------------------------------------------------------
// Classic cutting-plane algorithm

namespace {

struct MipSolveOutcome {
    enum class Status { Optimal, TimedOut, Infeasible } status = Status::Infeasible;
    std::vector<std::int64_t> point;
    double value = kInfD;
    std::uint64_t nodes = 0;
};

// Surrogate MIP with a fixed cut set, solved to optimality by plain
// branch-and-bound (no lazy cuts, no heuristics).
MipSolveOutcome solve_surrogate_mip(const ProblemSpec& spec, const CompiledConstraints& compiled,
                                    SurrogateLp& surrogate, const SolverBounds& bounds,
                                    double time_limit) {
    const auto start = std::chrono::steady_clock::now();
    MipSolveOutcome out;
    NodeQueue queue;
    queue.push(Region::full(spec.coefficients(), compiled.num_aux), bounds.objective_min);

    while (auto node = queue.pop_best()) {
        if (node->bound >= out.value) continue;
        if (elapsed_seconds(start) > time_limit) {
            out.status = MipSolveOutcome::Status::TimedOut;
            return out;
        }
        ++out.nodes;
        if (!surrogate.apply_region(node->region)) continue;
        if (surrogate.lp().solve() == LpStatus::Infeasible) continue;
        const double lp_value = surrogate.lp().objective();
        if (lp_value >= out.value) continue;
        const RelaxationPoint point = surrogate.extract();
        if (is_integral_point(point)) {
            const auto candidate = round_point(point.lambda, node->region);
            if (lp_value < out.value) {
                out.value = lp_value;
                out.point = candidate;
                out.status = MipSolveOutcome::Status::Optimal;
                queue.prune(out.value);
            }
            continue;
        }
        for (auto& child : split_region(node->region, point)) {
            queue.push(std::move(child), lp_value);
        }
    }
    return out;
}

}  // namespace

CpaResult cpa_solve(const ProblemSpec& spec, CpaMode mode, const CpaOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    CpaResult result;
    const CompiledConstraints compiled = compile_constraints(spec);
    SurrogateLp surrogate(spec, compiled);
    SolverBounds bounds = initial_bounds(spec);
    LossEngine engine(spec.data());
    if (options.use_lookup_table) {
        engine.enable_table(spec.coefficients(),
                            spec.size_cap() < spec.dim()
                                ? std::optional<std::size_t>(spec.size_cap())
                                : std::nullopt);
    }
    surrogate.build(bounds);

    double lower = bounds.objective_min;
    double upper = kInfD;
    std::vector<std::int64_t> best;
    std::vector<double> bound_history;

    const Region root = Region::full(spec.coefficients(), compiled.num_aux);

    for (std::size_t k = 0; k < options.iteration_cap; ++k) {
        if (elapsed_seconds(start) > options.time_limit) break;
        CpaIteration iter;
        const auto iter_start = std::chrono::steady_clock::now();

        std::vector<double> iterate;
        if (mode == CpaMode::LpRelaxation) {
            surrogate.apply_region(root);
            if (surrogate.lp().solve() == LpStatus::Infeasible) {
                throw InfeasibleError("relaxation infeasible");
            }
            lower = std::max(lower, surrogate.lp().objective());
            iterate = surrogate.extract().lambda;
        } else {
            const MipSolveOutcome mip = solve_surrogate_mip(
                spec, compiled, surrogate, bounds,
                std::min(options.per_iteration_time_limit,
                         options.time_limit - elapsed_seconds(start)));
            iter.nodes = mip.nodes;
            if (mip.status == MipSolveOutcome::Status::TimedOut) {
                result.stalled = true;
                iter.seconds = elapsed_seconds(iter_start);
                iter.lower_bound = lower;
                iter.upper_bound = upper;
                result.iterations.push_back(iter);
                break;
            }
            if (mip.status == MipSolveOutcome::Status::Infeasible) {
                throw InfeasibleError("surrogate MIP infeasible");
            }
            lower = std::max(lower, mip.value);
            iterate.assign(mip.point.begin(), mip.point.end());
        }

        result.iterates.push_back(iterate);
        const Cut cut = engine.cut(iterate);
        result.cuts.push_back(cut);
        surrogate.add_cut(cut);

        if (mode == CpaMode::Mip) {
            // True objective of the integer iterate updates the upper bound.
            std::vector<std::int64_t> integral(iterate.size());
            for (std::size_t j = 0; j < iterate.size(); ++j) {
                integral[j] = std::llround(iterate[j]);
            }
            const double true_obj =
                engine.value(iterate) +
                spec.c0() * static_cast<double>(spec.support_size(integral));
            if (true_obj < upper) {
                upper = true_obj;
                best = integral;
            }
        }

        iter.seconds = elapsed_seconds(iter_start);
        iter.lower_bound = lower;
        iter.upper_bound = upper;
        result.iterations.push_back(iter);

        if (mode == CpaMode::Mip && upper < kInfD) {
            const double gap = std::max(0.0, 1.0 - lower / upper);
            if (gap <= options.gap_tol) break;
        }
        if (mode == CpaMode::LpRelaxation) {
            bound_history.push_back(lower);
            const std::size_t w = options.stall_window;
            if (bound_history.size() > w) {
                const double old = bound_history[bound_history.size() - 1 - w];
                const double rel =
                    (lower - old) / std::max(1e-12, std::abs(lower));
                if (rel < options.stall_tolerance) break;
            }
        }
    }

    result.core.lower_bound = lower;
    result.core.objective = upper;
    result.core.best = best;
    result.core.gap = upper < kInfD ? std::max(0.0, 1.0 - lower / upper) : 1.0;
    result.core.stats.cuts = result.cuts.size();
    result.core.stats.wall_seconds = elapsed_seconds(start);
    result.core.stats.data_seconds = engine.data_seconds();
    for (const auto& iter : result.iterations) result.core.stats.nodes += iter.nodes;
    return result;
}

InitializationResult initialize(const ProblemSpec& spec, const SolverOptions& options) {
    InitializationResult out;
    CpaOptions copts;
    copts.iteration_cap = options.init_iteration_cap;
    copts.time_limit = options.init_time_limit;
    copts.use_lookup_table = options.use_lookup_table;
    const CpaResult relax = cpa_solve(spec, CpaMode::LpRelaxation, copts);

    out.cuts = relax.cuts;
    out.bounds = initial_bounds(spec);
    out.bounds.objective_min = std::max(out.bounds.objective_min, relax.core.lower_bound);

    LossEngine engine(spec.data());
    if (options.use_lookup_table) {
        engine.enable_table(spec.coefficients(),
                            spec.size_cap() < spec.dim()
                                ? std::optional<std::size_t>(spec.size_cap())
                                : std::nullopt);
    }
    for (const auto& iterate : relax.iterates) {
        const auto anchor = prepare_anchor(iterate, spec, spec.size_cap());
        std::vector<std::int64_t> rounded = sequential_round(anchor, spec, engine);
        if (!is_feasible(rounded, spec)) continue;
        rounded = dcd_polish(std::move(rounded), spec, engine);
        std::vector<double> real(rounded.begin(), rounded.end());
        const double value =
            engine.value(real) + spec.c0() * static_cast<double>(spec.support_size(rounded));
        if (value < out.incumbent_objective) {
            out.incumbent_objective = value;
            out.incumbent = std::move(rounded);
        }
    }
    if (out.incumbent) {
        out.bounds.objective_max = std::min(out.bounds.objective_max, out.incumbent_objective);
    }
    chained_updates(out.bounds, spec.c0());
    out.data_seconds = relax.core.stats.data_seconds + engine.data_seconds();
    return out;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& header) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write trace file '" + path + "'");
    for (const auto& [key, value] : header) out << "# " << key << ": " << value << "\n";
    out << "wall_time_s,nodes,cuts,V_min,V_max,gap,event\n";
    for (const auto& row : trace) {
        out << format_double(row.wall_seconds) << ',' << row.nodes << ',' << row.cuts << ','
            << format_double(row.objective_min) << ',' << format_double(row.objective_max) << ','
            << format_double(row.gap) << ',' << row.event << '\n';
    }
}

}  // namespace riskscore
