#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "riskscore/lp.hpp"

using namespace riskscore;

namespace {

LinearProgram box_lp(std::vector<double> lo, std::vector<double> hi, std::vector<double> c) {
    LinearProgram lp;
    lp.num_vars = lo.size();
    lp.lower = std::move(lo);
    lp.upper = std::move(hi);
    lp.objective = std::move(c);
    return lp;
}

LinearRow row(std::vector<std::pair<std::size_t, double>> terms, Relation rel, double rhs) {
    LinearRow r;
    r.terms = std::move(terms);
    r.relation = rel;
    r.rhs = rhs;
    return r;
}

LinearProgram random_lp(Rng& rng) {
    const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(0, 4));
    const std::size_t m = static_cast<std::size_t>(rng.uniform_int(0, 8));
    LinearProgram lp;
    lp.num_vars = n;
    for (std::size_t v = 0; v < n; ++v) {
        const double a = rng.normal(0.0, 3.0);
        const double b = a + std::abs(rng.normal(0.0, 3.0)) + 0.1;
        lp.lower.push_back(a);
        lp.upper.push_back(b);
        lp.objective.push_back(rng.normal(0.0, 1.0));
    }
    for (std::size_t r = 0; r < m; ++r) {
        LinearRow lr;
        for (std::size_t v = 0; v < n; ++v) {
            if (rng.uniform() < 0.7) lr.terms.emplace_back(v, rng.normal(0.0, 1.0));
        }
        lr.relation = rng.uniform() < 0.5 ? Relation::LessEqual : Relation::GreaterEqual;
        lr.rhs = rng.normal(0.0, 2.0);
        lp.rows.push_back(std::move(lr));
    }
    return lp;
}

}  // namespace

TEST_CASE("bounds-only minimization") {
    const LinearProgram lp = box_lp({2.0}, {5.0}, {1.0});
    const LpSolution sol = lp_solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(2.0));
    CHECK(sol.objective == doctest::Approx(2.0));
}

TEST_CASE("row makes the box infeasible") {
    LinearProgram lp = box_lp({2.0}, {5.0}, {1.0});
    lp.rows.push_back(row({{0, 1.0}}, Relation::LessEqual, 1.0));
    CHECK(lp_solve(lp).status == LpStatus::Infeasible);
}

TEST_CASE("small textbook LP") {
    // min -x - 2y st x + y <= 4, x - y >= -2, x,y in [0, 3]
    LinearProgram lp = box_lp({0.0, 0.0}, {3.0, 3.0}, {-1.0, -2.0});
    lp.rows.push_back(row({{0, 1.0}, {1, 1.0}}, Relation::LessEqual, 4.0));
    lp.rows.push_back(row({{0, 1.0}, {1, -1.0}}, Relation::GreaterEqual, -2.0));
    const LpSolution sol = lp_solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.x[1] == doctest::Approx(3.0));
    CHECK(sol.objective == doctest::Approx(-7.0));
}

TEST_CASE("random LPs match vertex enumeration") {
    Rng rng(31);
    int solved = 0;
    for (int trial = 0; trial < 120; ++trial) {
        const LinearProgram lp = random_lp(rng);
        const auto oracle = oracles::lp_vertex_enumeration(lp);
        const LpSolution sol = lp_solve(lp);
        if (oracle.feasible) {
            REQUIRE_MESSAGE(sol.status == LpStatus::Optimal, "trial ", trial);
            CHECK_MESSAGE(sol.objective == doctest::Approx(oracle.objective).epsilon(1e-8),
                          "trial ", trial);
            ++solved;
            // weak duality audit: reported objective equals recompute from x
            double recomputed = 0.0;
            for (std::size_t v = 0; v < lp.num_vars; ++v) {
                recomputed += lp.objective[v] * sol.x[v];
            }
            CHECK(std::abs(recomputed - sol.objective) < 1e-8);
            // rows satisfied within tolerance
            for (const auto& r : lp.rows) {
                double act = 0.0;
                for (const auto& [v, c] : r.terms) act += c * sol.x[v];
                if (r.relation == Relation::LessEqual) CHECK(act <= r.rhs + 1e-7);
                if (r.relation == Relation::GreaterEqual) CHECK(act >= r.rhs - 1e-7);
            }
        } else {
            CHECK_MESSAGE(sol.status == LpStatus::Infeasible, "trial ", trial);
        }
    }
    CHECK(solved > 30);  // the generator must exercise the solver
}

TEST_CASE("adding rows") {
    SUBCASE("satisfied row leaves the optimum unchanged") {
        LinearProgram lp = box_lp({0.0, 0.0}, {2.0, 2.0}, {1.0, 1.0});
        LpSolver solver(lp);
        REQUIRE(solver.solve() == LpStatus::Optimal);
        const double before = solver.objective();
        const LinearRow extra = row({{0, 1.0}, {1, 1.0}}, Relation::LessEqual, 10.0);
        solver.add_rows({&extra, 1});
        REQUIRE(solver.solve() == LpStatus::Optimal);
        CHECK(solver.objective() == doctest::Approx(before));
        CHECK(solver.x(0) == doctest::Approx(0.0));
    }
    SUBCASE("violated cut never decreases the objective") {
        Rng rng(32);
        for (int trial = 0; trial < 60; ++trial) {
            LinearProgram lp = random_lp(rng);
            const LpSolution sol = lp_solve(lp);
            if (sol.status != LpStatus::Optimal) continue;
            LpSolver solver(lp);
            REQUIRE(solver.solve() == LpStatus::Optimal);
            // cut off the current optimum: sum of x >= current + 0.5
            LinearRow cut;
            double act = 0.0;
            for (std::size_t v = 0; v < lp.num_vars; ++v) {
                cut.terms.emplace_back(v, 1.0);
                act += sol.x[v];
            }
            cut.relation = Relation::GreaterEqual;
            cut.rhs = act + 0.5;
            solver.add_rows({&cut, 1});
            const LpStatus status = solver.solve();
            if (status == LpStatus::Optimal) {
                CHECK(solver.objective() >= sol.objective - 1e-9);
                // warm re-solve equals cold solve
                LinearProgram cold = lp_add_rows(lp, {&cut, 1});
                const LpSolution cold_sol = lp_solve(cold);
                REQUIRE(cold_sol.status == LpStatus::Optimal);
                CHECK(solver.objective() == doctest::Approx(cold_sol.objective).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("bound tightening") {
    SUBCASE("tightening to the optimum keeps it") {
        LinearProgram lp = box_lp({0.0, -1.0}, {4.0, 4.0}, {1.0, 0.5});
        LpSolver solver(lp);
        REQUIRE(solver.solve() == LpStatus::Optimal);
        const double before = solver.objective();
        REQUIRE(solver.set_variable_bounds(0, solver.x(0), solver.x(0)));
        REQUIRE(solver.solve() == LpStatus::Optimal);
        CHECK(solver.objective() == doctest::Approx(before));
    }
    SUBCASE("crossed bounds signal infeasibility") {
        LinearProgram lp = box_lp({0.0}, {4.0}, {1.0});
        LpSolver solver(lp);
        CHECK_FALSE(solver.set_variable_bounds(0, 3.0, 2.0));
        CHECK_THROWS_AS(lp_tighten_bound(lp, 0, 3.0, 2.0), InfeasibleError);
    }
    SUBCASE("objective is monotone under 100 random tightenings") {
        Rng rng(33);
        int checks = 0;
        while (checks < 100) {
            LinearProgram lp = random_lp(rng);
            LpSolver solver(lp);
            if (solver.solve() != LpStatus::Optimal) continue;
            double prev = solver.objective();
            for (int step = 0; step < 4; ++step) {
                const std::size_t v =
                    static_cast<std::size_t>(rng.uniform_int(0, lp.num_vars - 1));
                double lo = solver.variable_lower(v);
                double hi = solver.variable_upper(v);
                if (hi - lo < 1e-9) continue;
                const double mid = lo + rng.uniform() * (hi - lo);
                if (rng.uniform() < 0.5) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (!solver.set_variable_bounds(v, lo, hi)) break;
                if (solver.solve() != LpStatus::Optimal) break;
                CHECK(solver.objective() >= prev - 1e-9);
                prev = solver.objective();
                ++checks;
            }
        }
    }
}

TEST_CASE("warm start determinism") {
    Rng rng(34);
    const LinearProgram lp = random_lp(rng);
    const LpSolution first = lp_solve(lp);
    if (first.status == LpStatus::Optimal) {
        const LpSolution warm = lp_solve(lp, &first.basis);
        REQUIRE(warm.status == LpStatus::Optimal);
        CHECK(warm.objective == first.objective);
        for (std::size_t v = 0; v < lp.num_vars; ++v) CHECK(warm.x[v] == first.x[v]);
    }
}

TEST_CASE("row removal keeps solutions valid") {
    LinearProgram lp = box_lp({0.0, 0.0}, {5.0, 5.0}, {-1.0, -1.0});
    lp.rows.push_back(row({{0, 1.0}, {1, 1.0}}, Relation::LessEqual, 6.0));
    lp.rows.push_back(row({{0, 1.0}}, Relation::LessEqual, 100.0));  // slack row
    LpSolver solver(lp);
    REQUIRE(solver.solve() == LpStatus::Optimal);
    const double before = solver.objective();
    const auto removed = solver.remove_rows({1});
    CHECK(removed.size() == 1);
    REQUIRE(solver.solve() == LpStatus::Optimal);
    CHECK(solver.objective() == doctest::Approx(before));
    CHECK(solver.num_rows() == 1);
}
