#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "riskscore/bnb.hpp"

using namespace riskscore;

namespace {

Region box_region(std::int64_t lo, std::int64_t hi, std::size_t d) {
    return Region::full(CoefficientSet::uniform(d, lo, hi), 0);
}

std::vector<std::vector<std::int64_t>> region_points(const Region& region) {
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> point(region.lb.begin(), region.lb.end());
    while (true) {
        if (region.contains(point)) out.push_back(point);
        std::size_t j = point.size();
        bool done = false;
        while (j > 0) {
            --j;
            if (point[j] < region.ub[j]) {
                ++point[j];
                for (std::size_t l = j + 1; l < point.size(); ++l) point[l] = region.lb[l];
                break;
            }
            if (j == 0) done = true;
        }
        if (done) break;
    }
    return out;
}

}  // namespace

TEST_CASE("node queue best-bound with FIFO ties") {
    NodeQueue queue;
    queue.push(box_region(-1, 1, 1), 0.3);
    queue.push(box_region(-1, 1, 1), 0.1);
    queue.push(box_region(-1, 1, 1), 0.2);
    auto best = queue.pop_best();
    REQUIRE(best);
    CHECK(best->bound == 0.1);

    NodeQueue ties;
    ties.push(box_region(-1, 1, 1), 0.5);
    ties.push(box_region(-2, 2, 1), 0.5);
    auto first = ties.pop_best();
    REQUIRE(first);
    CHECK(first->region.lb[0] == -1);  // earlier insertion wins

    NodeQueue empty;
    CHECK_FALSE(empty.pop_best().has_value());
    CHECK(empty.min_bound() == std::numeric_limits<double>::infinity());
}

TEST_CASE("prune removes exactly the dominated nodes") {
    NodeQueue queue;
    queue.push(box_region(-1, 1, 1), 0.3);
    queue.push(box_region(-1, 1, 1), 0.2);
    CHECK(queue.prune(0.25) == 1);
    CHECK(queue.size() == 1);
    CHECK(queue.min_bound() == 0.2);
    CHECK(queue.prune(std::numeric_limits<double>::infinity()) == 0);

    NodeQueue q2;
    q2.push(box_region(-1, 1, 1), 0.4);
    q2.push(box_region(-1, 1, 1), 0.1);
    const double before = q2.min_bound();
    q2.prune(0.35);
    CHECK(q2.min_bound() >= before);
}

TEST_CASE("split on a fractional coefficient") {
    const Region region = box_region(-3, 3, 2);
    RelaxationPoint point;
    point.lambda = {0.0, 1.4, 0.0};
    point.alpha = {1.0, 0.0};
    const auto children = split_region(region, point);
    REQUIRE(children.size() == 2);
    CHECK(children[0].ub[1] == 1);
    CHECK(children[1].lb[1] == 2);
    // no lattice point in both children
    for (const auto& p : region_points(children[0])) {
        CHECK_FALSE(children[1].contains(p));
    }
}

TEST_CASE("split on a fractional indicator") {
    const Region region = box_region(-3, 3, 2);
    RelaxationPoint point;
    point.lambda = {0.0, 1.0, 2.0};
    point.alpha = {0.3, 1.0};
    const auto children = split_region(region, point);
    REQUIRE(children.size() == 2);
    CHECK(children[0].alpha_fix[0] == 0);
    CHECK(children[0].lb[1] == 0);
    CHECK(children[0].ub[1] == 0);
    CHECK(children[1].alpha_fix[0] == 1);
}

TEST_CASE("alpha is branched before lambda") {
    const Region region = box_region(-3, 3, 2);
    RelaxationPoint point;
    point.lambda = {0.0, 1.5, 0.0};  // fractional lambda too
    point.alpha = {0.5, 0.0};
    const auto children = split_region(region, point);
    REQUIRE(children.size() == 2);
    CHECK(children[0].alpha_fix[0] == 0);  // alpha split happened
    CHECK(children[0].ub[1] == 0);
}

TEST_CASE("children partition the parent lattice") {
    const Region region = box_region(-2, 2, 2);
    RelaxationPoint point;
    point.lambda = {0.3, -0.7, 1.2};
    point.alpha = {0.4, 0.9};
    const auto children = split_region(region, point);
    const auto parent_points = region_points(region);
    std::size_t covered = 0;
    for (const auto& p : parent_points) {
        std::size_t hits = 0;
        for (const auto& child : children) hits += child.contains(p);
        CHECK(hits <= 1);  // disjoint
        covered += hits;
    }
    CHECK(covered == parent_points.size());  // exhaustive
}

TEST_CASE("split on an integral point is a logic error") {
    const Region region = box_region(-2, 2, 1);
    RelaxationPoint point;
    point.lambda = {1.0, -2.0};
    point.alpha = {1.0};
    CHECK(is_integral_point(point));
    CHECK_THROWS_AS(split_region(region, point), SolverError);
}

TEST_CASE("padding split covers the parent exactly") {
    Region region = box_region(-2, 2, 2);
    const auto children = split_on_padding(region, 1);
    REQUIRE(children.size() == 3);
    const auto parent_points = region_points(region);
    for (const auto& p : parent_points) {
        std::size_t hits = 0;
        for (const auto& child : children) hits += child.contains(p);
        CHECK(hits == 1);
    }
    // one-sided box drops the empty side
    Region pos = box_region(-2, 2, 2);
    pos.lb[1] = 0;
    const auto two = split_on_padding(pos, 1);
    CHECK(two.size() == 2);
}
