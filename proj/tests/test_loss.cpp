#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "riskscore/loss.hpp"

using namespace riskscore;

TEST_CASE("loss at zero is log 2") {
    Rng rng(1);
    const Dataset data = oracles::random_dataset(rng, 40, 3);
    std::vector<double> zero(4, 0.0);
    CHECK(loss_value(zero, data) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("margin 700 stays finite and tiny") {
    const Dataset data = Dataset::build({{700.0}, {0.0}}, {1, -1});
    std::vector<double> coef{0.0, 1.0};
    // first example contributes log(1+e^-700), second log(2)
    const double v = loss_value(coef, data);
    CHECK(std::isfinite(v));
    const double first_term = 2.0 * v - std::log(2.0);
    CHECK(first_term < 1e-300);
    CHECK(first_term >= 0.0);

    const Dataset hard = Dataset::build({{800.0}}, {-1});
    std::vector<double> one{0.0, 1.0};
    CHECK(std::isfinite(loss_value(one, hard)));
    CHECK(loss_value(one, hard) == doctest::Approx(800.0).epsilon(1e-12));
}

TEST_CASE("loss matches extended-precision oracle within 1e-12") {
    Rng rng(2);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(rng.uniform_int(0, 45));
        const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_int(0, 4));
        const Dataset data = oracles::random_dataset(rng, n, d, trial % 2 == 0);
        std::vector<double> coef(d + 1);
        for (auto& c : coef) c = rng.normal(0.0, 2.0);
        const double mine = loss_value(coef, data);
        const double oracle = oracles::loss_extended(coef, data);
        CHECK(mine == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("loss is deterministic bit for bit") {
    Rng rng(3);
    const Dataset data = oracles::random_dataset(rng, 200, 4, false);
    std::vector<double> coef{0.3, -1.7, 2.9, 0.01, -4.0};
    const double a = loss_value(coef, data);
    const double b = loss_value(coef, data);
    CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
}

TEST_CASE("dimension and finiteness errors") {
    Rng rng(4);
    const Dataset data = oracles::random_dataset(rng, 10, 2);
    std::vector<double> wrong{1.0, 2.0};
    CHECK_THROWS_AS(loss_value(wrong, data), ArgumentError);
    std::vector<double> nan{0.0, std::nan(""), 0.0};
    CHECK_THROWS_AS(loss_value(nan, data), ArgumentError);
}

TEST_CASE("cut gradient at zero is the label-feature correlation") {
    Rng rng(5);
    const Dataset data = oracles::random_dataset(rng, 60, 3);
    std::vector<double> zero(4, 0.0);
    const Cut cut = loss_cut(zero, data);
    for (std::size_t j = 0; j < 4; ++j) {
        double expect = 0.0;
        for (std::size_t i = 0; i < data.n(); ++i) {
            expect -= data.label(i) * data.x(i, j);
        }
        expect /= 2.0 * static_cast<double>(data.n());
        CHECK(cut.gradient[j] == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(cut.value == loss_value(zero, data));
}

TEST_CASE("gradient matches central differences") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const Dataset data = oracles::random_dataset(rng, 30, 3, trial % 2 == 0);
        std::vector<double> coef(4);
        for (auto& c : coef) c = rng.normal(0.0, 1.5);
        const Cut cut = loss_cut(coef, data);
        const auto fd = oracles::gradient_fd(coef, data);
        for (std::size_t j = 0; j < coef.size(); ++j) {
            const double scale = std::max(1.0, std::abs(fd[j]));
            CHECK(std::abs(cut.gradient[j] - fd[j]) / scale < 1e-6);
        }
    }
}

TEST_CASE("cuts under-approximate the loss (convexity support)") {
    Rng rng(7);
    const Dataset data = oracles::random_dataset(rng, 50, 3);
    const CoefficientSet box = CoefficientSet::uniform(3, -5, 5);
    for (int anchor_trial = 0; anchor_trial < 5; ++anchor_trial) {
        std::vector<double> anchor(4);
        for (auto& c : anchor) c = static_cast<double>(rng.uniform_int(-5, 5));
        const Cut cut = loss_cut(anchor, data);
        for (int pt = 0; pt < 1000; ++pt) {
            std::vector<double> point(4);
            for (std::size_t j = 0; j < 4; ++j) {
                point[j] = static_cast<double>(rng.uniform_int(box.lb[j], box.ub[j]));
            }
            CHECK(cut.evaluate(point) <= loss_value(point, data) + 1e-9);
        }
    }
}

TEST_CASE("score extremes") {
    SUBCASE("single positive feature") {
        const Dataset data = Dataset::build({{1.0}}, {1});
        CoefficientSet box = CoefficientSet::uniform(1, -5, 5);
        box.lb[0] = 0;
        box.ub[0] = 0;  // pin the intercept for the example
        const ScoreBounds b = score_extremes(data, box);
        CHECK(b.per_example_min[0] == -5.0);
        CHECK(b.per_example_max[0] == 5.0);
    }
    SUBCASE("negative feature values flip which bound applies") {
        const Dataset data = Dataset::build({{-2.0}}, {1});
        CoefficientSet box = CoefficientSet::uniform(1, -5, 5);
        box.lb[0] = 0;
        box.ub[0] = 0;
        const ScoreBounds b = score_extremes(data, box);
        CHECK(b.per_example_min[0] == -10.0);
        CHECK(b.per_example_max[0] == 10.0);
    }
    SUBCASE("r_max keeps only the most extreme contributions") {
        const Dataset data = Dataset::build({{1.0, 1.0}}, {1});
        CoefficientSet box = CoefficientSet::uniform(2, -5, 5);
        box.lb[0] = 0;
        box.ub[0] = 0;
        const ScoreBounds b = score_extremes(data, box, 1);
        CHECK(b.per_example_min[0] == -5.0);
        CHECK(b.per_example_max[0] == 5.0);
    }
    SUBCASE("global extremes are the extrema of per-example values") {
        Rng rng(8);
        const Dataset data = oracles::random_dataset(rng, 30, 4);
        const CoefficientSet box = CoefficientSet::uniform(4, -3, 2);
        const ScoreBounds b = score_extremes(data, box);
        CHECK(b.global_min ==
              *std::min_element(b.per_example_min.begin(), b.per_example_min.end()));
        CHECK(b.global_max ==
              *std::max_element(b.per_example_max.begin(), b.per_example_max.end()));
        for (std::size_t i = 0; i < data.n(); ++i) {
            CHECK(b.per_example_min[i] <= b.per_example_max[i]);
        }
    }
}

TEST_CASE("loss range") {
    SUBCASE("one-point instance, direct substitution") {
        const Dataset data = Dataset::build({{1.0}}, {1});
        CoefficientSet box = CoefficientSet::uniform(1, -1, 1);
        box.lb[0] = 0;
        box.ub[0] = 0;
        const auto [lo, hi] = loss_range(data, box);
        CHECK(lo == doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-12));
        CHECK(hi == doctest::Approx(std::log1p(std::exp(1.0))).epsilon(1e-12));
    }
    SUBCASE("random coefficients in the box stay inside the range") {
        Rng rng(9);
        const Dataset data = oracles::random_dataset(rng, 40, 3);
        const CoefficientSet box = CoefficientSet::uniform(3, -4, 4);
        const auto [lo, hi] = loss_range(data, box);
        for (int t = 0; t < 1000; ++t) {
            std::vector<double> coef(4);
            for (std::size_t j = 0; j < 4; ++j) {
                coef[j] = static_cast<double>(box.lb[j]) +
                          rng.uniform() * static_cast<double>(box.ub[j] - box.lb[j]);
            }
            const double v = loss_value(coef, data);
            CHECK(v >= lo - 1e-12);
            CHECK(v <= hi + 1e-12);
        }
    }
    SUBCASE("full lattice enumeration confirms the bounds") {
        Rng rng(10);
        const Dataset data = oracles::random_dataset(rng, 20, 2);
        const CoefficientSet box = CoefficientSet::uniform(2, -2, 2);
        const auto [lo, hi] = loss_range(data, box);
        double min_seen = 1e300, max_seen = -1e300;
        for (std::int64_t a = -2; a <= 2; ++a) {
            for (std::int64_t b = -2; b <= 2; ++b) {
                for (std::int64_t c = -2; c <= 2; ++c) {
                    std::vector<double> coef{static_cast<double>(a), static_cast<double>(b),
                                             static_cast<double>(c)};
                    const double v = loss_value(coef, data);
                    min_seen = std::min(min_seen, v);
                    max_seen = std::max(max_seen, v);
                }
            }
        }
        CHECK(lo <= min_seen + 1e-12);
        CHECK(hi >= max_seen - 1e-12);
    }
}

TEST_CASE("lookup table") {
    Rng rng(11);
    const Dataset data = oracles::random_dataset(rng, 30, 3);
    const CoefficientSet box = CoefficientSet::uniform(3, -3, 3);

    SUBCASE("row count formula") {
        const LossTable table = build_lookup(data, box);
        // covers [score_min, score_max] inclusive
        CHECK(table.rows() >= 1);
        const ScoreBounds b = score_extremes(data, box);
        // margins are label-adjusted; just check coverage of every reachable
        // integer margin of a few random lattice points
        for (int t = 0; t < 50; ++t) {
            std::vector<double> coef(4);
            for (std::size_t j = 0; j < 4; ++j) {
                coef[j] = static_cast<double>(rng.uniform_int(box.lb[j], box.ub[j]));
            }
            for (std::size_t i = 0; i < data.n(); ++i) {
                const double margin = data.label(i) * data.score(coef, i);
                CHECK(table.covers(std::llround(margin)));
            }
        }
        (void)b;
    }
    SUBCASE("fourteen rows for [-8, 5]") {
        // construct data/box reaching exactly smin=-8, smax=5
        const Dataset tiny = Dataset::build({{1.0}}, {1});
        CoefficientSet b1 = CoefficientSet::uniform(1, -8, 5);
        b1.lb[0] = 0;
        b1.ub[0] = 0;
        const LossTable table = build_lookup(tiny, b1);
        CHECK(table.rows() == 14);
        CHECK(table.score_min == -8);
    }
    SUBCASE("table values equal direct evaluation to 1e-12") {
        const LossTable table = build_lookup(data, box);
        for (std::size_t r = 0; r < table.rows(); ++r) {
            const std::int64_t s = table.score_min + static_cast<std::int64_t>(r);
            CHECK(table.at(s) == doctest::Approx(log1p_exp_neg(static_cast<double>(s)))
                                     .epsilon(1e-12));
        }
    }
    SUBCASE("engine with table equals engine without, bit for bit") {
        LossEngine with(data), without(data);
        with.enable_table(box);
        REQUIRE(with.table_enabled());
        for (int t = 0; t < 100; ++t) {
            std::vector<double> coef(4);
            for (std::size_t j = 0; j < 4; ++j) {
                coef[j] = static_cast<double>(rng.uniform_int(box.lb[j], box.ub[j]));
            }
            CHECK(with.value(coef) == without.value(coef));
        }
    }
    SUBCASE("tighter r_max never grows the table") {
        const LossTable full = build_lookup(data, box);
        const LossTable tight = build_lookup(data, box, 2);
        CHECK(tight.rows() <= full.rows());
    }
    SUBCASE("real-valued data is rejected") {
        Rng r2(12);
        const Dataset real_data = oracles::random_dataset(r2, 10, 2, false);
        const CoefficientSet b2 = CoefficientSet::uniform(2, -2, 2);
        CHECK_THROWS_AS(build_lookup(real_data, b2), UnsupportedError);
        LossEngine engine(real_data);
        engine.enable_table(b2);
        CHECK_FALSE(engine.table_enabled());  // silent fallback
    }
}
