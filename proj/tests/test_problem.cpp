#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "riskscore/problem.hpp"

using namespace riskscore;

namespace {

Dataset tiny_data() {
    return Dataset::build({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {0.0, 0.0}}, {1, -1, 1, -1},
                          {"a", "b"});
}

// Check satisfiability of compiled rows at alpha = indicator(lambda), trying
// every assignment of the auxiliary selectors.
bool rows_satisfiable(const CompiledConstraints& compiled, const ProblemSpec& spec,
                      const std::vector<std::int64_t>& lambda) {
    const std::size_t d = spec.dim();
    std::vector<double> x(2 * d + 1 + compiled.num_aux, 0.0);
    for (std::size_t j = 0; j <= d; ++j) x[j] = static_cast<double>(lambda[j]);
    for (std::size_t j = 1; j <= d; ++j) x[d + j] = lambda[j] != 0 ? 1.0 : 0.0;

    const std::size_t combos = std::size_t{1} << compiled.num_aux;
    for (std::size_t mask = 0; mask < combos; ++mask) {
        for (std::size_t g = 0; g < compiled.num_aux; ++g) {
            x[2 * d + 1 + g] = (mask >> g) & 1 ? 1.0 : 0.0;
        }
        bool ok = true;
        for (const auto& row : compiled.rows) {
            double act = 0.0;
            for (const auto& [v, c] : row.terms) act += c * x[v];
            if (row.relation == Relation::LessEqual && act > row.rhs + 1e-9) ok = false;
            if (row.relation == Relation::GreaterEqual && act < row.rhs - 1e-9) ok = false;
            if (row.relation == Relation::Equal && std::abs(act - row.rhs) > 1e-9) ok = false;
            if (!ok) break;
        }
        if (ok) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("objective value") {
    const Dataset data = tiny_data();
    const ProblemSpec spec(data, CoefficientSet::uniform(2, -5, 5), 0.01);

    SUBCASE("zero vector gives log 2") {
        CHECK(objective_value({0, 0, 0}, spec) == doctest::Approx(std::log(2.0)));
    }
    SUBCASE("penalty counts non-intercept support") {
        const double with = objective_value({0, 1, 2}, spec);
        std::vector<double> real{0.0, 1.0, 2.0};
        CHECK(with == doctest::Approx(loss_value(real, data) + 0.02).epsilon(1e-12));
    }
    SUBCASE("intercept is exempt") {
        const double a = objective_value({3, 0, 0}, spec);
        std::vector<double> real{3.0, 0.0, 0.0};
        CHECK(a == doctest::Approx(loss_value(real, data)).epsilon(1e-15));
    }
    SUBCASE("points outside the box are rejected") {
        CHECK_THROWS_AS(objective_value({0, 7, 0}, spec), ArgumentError);
    }
}

TEST_CASE("is_feasible") {
    const Dataset data = tiny_data();

    SUBCASE("zero vector is feasible under every supported constraint kind") {
        std::vector<OperationalConstraint> cs{
            MaxModelSize{1}, SignConstraint{"a", +1}, AtMostKOf{1, {"a", "b"}},
            ExclusiveChoice{{"a"}, {"b"}}, Implies{"a", {"b"}}};
        const ProblemSpec spec(data, CoefficientSet::uniform(2, -5, 5), 1e-3, cs);
        CHECK(is_feasible({0, 0, 0}, spec).feasible);
    }
    SUBCASE("sign violation is reported by name") {
        const ProblemSpec spec(data, CoefficientSet::uniform(2, -5, 5), 1e-3,
                               {SignConstraint{"a", +1}});
        const auto r = is_feasible({0, -2, 0}, spec);
        CHECK_FALSE(r.feasible);
        REQUIRE(r.violations.size() == 1);
        CHECK(r.violations[0] == "sign a +");
    }
    SUBCASE("at_most_k violation") {
        const Dataset d3 = Dataset::build({{1, 1, 1}, {0, 0, 0}}, {1, -1}, {"a", "b", "c"});
        const ProblemSpec spec(d3, CoefficientSet::uniform(3, -5, 5), 1e-3,
                               {AtMostKOf{2, {"a", "b", "c"}}});
        CHECK_FALSE(is_feasible({0, 1, 1, 1}, spec).feasible);
        CHECK(is_feasible({0, 1, 1, 0}, spec).feasible);
    }
    SUBCASE("exclusive choice and implies semantics") {
        const ProblemSpec spec(data, CoefficientSet::uniform(2, -5, 5), 1e-3,
                               {ExclusiveChoice{{"a"}, {"b"}}});
        CHECK(is_feasible({0, 1, 0}, spec).feasible);
        CHECK(is_feasible({0, 0, -2}, spec).feasible);
        CHECK_FALSE(is_feasible({0, 1, -2}, spec).feasible);

        const ProblemSpec imp(data, CoefficientSet::uniform(2, -5, 5), 1e-3,
                              {Implies{"a", {"b"}}});
        CHECK(is_feasible({0, 0, 0}, imp).feasible);
        CHECK_FALSE(is_feasible({0, 1, 0}, imp).feasible);
        CHECK(is_feasible({0, 1, 3}, imp).feasible);
    }
}

TEST_CASE("compile_constraints") {
    const Dataset data = tiny_data();

    SUBCASE("indicator rows only, two per feature") {
        const ProblemSpec spec(data, CoefficientSet::uniform(2, -5, 5), 1e-3);
        const CompiledConstraints compiled = compile_constraints(spec);
        CHECK(compiled.rows.size() == 4);
        CHECK(compiled.num_aux == 0);
    }
    SUBCASE("max size compiles to a single indicator sum") {
        const ProblemSpec spec(data, CoefficientSet::uniform(2, -5, 5), 1e-3, {MaxModelSize{5}});
        const CompiledConstraints compiled = compile_constraints(spec);
        CHECK(compiled.rows.size() == 5);
        const LinearRow& row = compiled.rows.back();
        CHECK(row.relation == Relation::LessEqual);
        CHECK(row.rhs == 5.0);
        CHECK(row.terms.size() == 2);
    }
    SUBCASE("exclusive choice forces alpha_a + alpha_b <= 1 over integral selectors") {
        const ProblemSpec spec(data, CoefficientSet::uniform(2, -5, 5), 1e-3,
                               {ExclusiveChoice{{"a"}, {"b"}}});
        const CompiledConstraints compiled = compile_constraints(spec);
        CHECK(compiled.num_aux == 1);
        CHECK(rows_satisfiable(compiled, spec, {0, 1, 0}));
        CHECK(rows_satisfiable(compiled, spec, {0, 0, 1}));
        CHECK_FALSE(rows_satisfiable(compiled, spec, {0, 1, 1}));
    }
    SUBCASE("unknown feature name fails") {
        CHECK_THROWS_AS(ProblemSpec(data, CoefficientSet::uniform(2, -5, 5), 1e-3,
                                    {SignConstraint{"nope", +1}}),
                        ArgumentError);
    }

    SUBCASE("compilation soundness by enumeration") {
        Rng rng(20);
        const Dataset d3 =
            Dataset::build({{1, 0, 2}, {0, 1, 1}, {2, 2, 0}, {0, 0, 0}}, {1, -1, 1, -1},
                           {"a", "b", "c"});
        const std::vector<std::vector<OperationalConstraint>> suites{
            {MaxModelSize{1}},
            {SignConstraint{"b", -1}},
            {AtMostKOf{1, {"a", "c"}}},
            {ExclusiveChoice{{"a", "b"}, {"c"}}},
            {Implies{"a", {"b", "c"}}},
            {MaxModelSize{2}, SignConstraint{"a", +1}, Implies{"c", {"a"}}},
        };
        for (const auto& cs : suites) {
            const ProblemSpec spec(d3, CoefficientSet::uniform(3, -1, 1), 1e-3, cs);
            const CompiledConstraints compiled = compile_constraints(spec);
            std::vector<std::int64_t> lambda(4);
            for (lambda[0] = -1; lambda[0] <= 1; ++lambda[0]) {
                for (lambda[1] = -1; lambda[1] <= 1; ++lambda[1]) {
                    for (lambda[2] = -1; lambda[2] <= 1; ++lambda[2]) {
                        for (lambda[3] = -1; lambda[3] <= 1; ++lambda[3]) {
                            CHECK(is_feasible(lambda, spec).feasible ==
                                  rows_satisfiable(compiled, spec, lambda));
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("enumerate_feasible") {
    const Dataset data = tiny_data();
    CoefficientSet box = CoefficientSet::uniform(2, -1, 1);
    box.lb[0] = 0;
    box.ub[0] = 0;

    SUBCASE("unconstrained 3x3 lattice") {
        const ProblemSpec spec(data, box, 1e-3);
        CHECK(enumerate_feasible(spec).size() == 9);
    }
    SUBCASE("max size 1 keeps five points") {
        const ProblemSpec spec(data, box, 1e-3, {MaxModelSize{1}});
        CHECK(enumerate_feasible(spec).size() == 5);
    }
    SUBCASE("sign constraint halves a coordinate") {
        const ProblemSpec spec(data, box, 1e-3, {SignConstraint{"a", +1}});
        const auto points = enumerate_feasible(spec);
        CHECK(points.size() == 6);
        for (const auto& p : points) CHECK(p[1] >= 0);
    }
    SUBCASE("lexicographic order") {
        const ProblemSpec spec(data, box, 1e-3);
        const auto points = enumerate_feasible(spec);
        for (std::size_t i = 1; i < points.size(); ++i) {
            CHECK(points[i - 1] < points[i]);
        }
    }
    SUBCASE("cap refuses huge lattices with an estimate") {
        const ProblemSpec spec(data, CoefficientSet::uniform(2, -1000000, 1000000), 1e-3);
        CHECK_THROWS_AS(enumerate_feasible(spec, 1e6), ArgumentError);
    }
}

TEST_CASE("constraint file parsing") {
    const auto path = (std::filesystem::temp_directory_path() / "rs_constraints.txt").string();
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "max_size 3\n";
        out << "sign a +\n";
        out << "at_most_k 2 a b\n";
        out << "exclusive a | b\n";
        out << "implies a -> b\n";
    }
    const auto cs = parse_constraint_file(path);
    REQUIRE(cs.size() == 5);
    CHECK(std::get<MaxModelSize>(cs[0]).k == 3);
    CHECK(std::get<SignConstraint>(cs[1]).sign == +1);
    CHECK(std::get<AtMostKOf>(cs[2]).k == 2);
    CHECK(std::get<ExclusiveChoice>(cs[3]).group_b == std::vector<std::string>{"b"});
    CHECK(std::get<Implies>(cs[4]).antecedent == "a");

    {
        std::ofstream out(path);
        out << "bogus line here\n";
    }
    CHECK_THROWS_AS(parse_constraint_file(path), ParseError);
}

TEST_CASE("penalty exemption invariant") {
    Rng rng(21);
    const Dataset data = oracles::random_dataset(rng, 25, 2);
    const ProblemSpec spec(data, CoefficientSet::uniform(2, -3, 3), 0.125);
    // changing only the intercept never changes the penalty term
    const double base = objective_value({0, 1, -1}, spec);
    const double moved = objective_value({2, 1, -1}, spec);
    std::vector<double> r0{0, 1, -1}, r2{2, 1, -1};
    CHECK(base - loss_value(r0, data) == doctest::Approx(moved - loss_value(r2, data)));
}
