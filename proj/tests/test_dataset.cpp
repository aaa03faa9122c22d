#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "riskscore/dataset.hpp"
#include "riskscore/rng.hpp"

using namespace riskscore;

namespace {

std::string data_file(const std::string& name) {
    return std::string(RISKSCORE_DATA_DIR) + "/" + name;
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("mammo loads with the published shape") {
    const Dataset data = load_csv(data_file("mammo_data.csv"));
    CHECK(data.n() == 961);
    CHECK(data.dim() == 14);
    CHECK(data.names()[0] == "(Intercept)");
    CHECK(data.integer_valued());
    std::size_t pos = data.positives();
    CHECK(pos == 445);  // 46.3% positive
}

TEST_CASE("breastcancer loads with the published shape") {
    const Dataset data = load_csv(data_file("breastcancer_data.csv"));
    CHECK(data.n() == 683);
    CHECK(data.dim() == 9);
}

TEST_CASE("labels in {0,1} map to {-1,+1} with proportions preserved") {
    const std::string path = temp_file("rs_labels.csv");
    write_file(path, "y,a\n0,1\n1,2\n1,3\n0,4\n");
    const Dataset data = load_csv(path);
    CHECK(data.n() == 4);
    CHECK(data.label(0) == -1);
    CHECK(data.label(1) == +1);
    CHECK(data.positives() == 2);
}

TEST_CASE("intercept column is prepended and identically one") {
    const std::string path = temp_file("rs_intercept.csv");
    write_file(path, "y,a,b\n1,2,3\n0,4,5\n");
    const Dataset data = load_csv(path);
    CHECK(data.dim() == 2);
    for (std::size_t i = 0; i < data.n(); ++i) CHECK(data.x(i, 0) == 1.0);
    CHECK(data.x(0, 1) == 2.0);
    CHECK(data.x(0, 2) == 3.0);
}

TEST_CASE("outcome column selected by name") {
    const std::string path = temp_file("rs_outcome.csv");
    write_file(path, "a,target,b\n7,1,3\n8,0,5\n");
    const Dataset data = load_csv(path, "target");
    CHECK(data.dim() == 2);
    CHECK(data.names()[1] == "a");
    CHECK(data.names()[2] == "b");
    CHECK(data.label(0) == +1);
    CHECK(data.x(1, 1) == 8.0);
}

TEST_CASE("parse errors name the offending cell") {
    const std::string path = temp_file("rs_bad.csv");
    write_file(path, "y,a\n1,xyz\n");
    CHECK_THROWS_AS(load_csv(path), ParseError);
    write_file(path, "y,a\n1,\n");
    CHECK_THROWS_AS(load_csv(path), ParseError);
    write_file(path, "y,a\n3,1\n");
    CHECK_THROWS_AS(load_csv(path), ValidationError);
    write_file(path, "");
    CHECK_THROWS_AS(load_csv(path), ParseError);
    CHECK_THROWS_AS(load_csv(temp_file("rs_does_not_exist.csv")), ParseError);
    write_file(path, "y,a\n1,2\n");
    CHECK_THROWS_AS(load_csv(path, "missing_column"), ParseError);
}

TEST_CASE("round trip through save_csv is bit exact") {
    Rng rng(7);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 25; ++i) {
        rows.push_back({rng.normal(), rng.normal() * 1e-7, rng.normal() * 1e9});
        labels.push_back(i % 3 == 0 ? 1 : -1);
    }
    const Dataset original = Dataset::build(rows, labels, {"u", "v", "w"});
    const std::string path = temp_file("rs_roundtrip.csv");
    save_csv(original, path);
    const Dataset reloaded = load_csv(path);
    REQUIRE(reloaded.n() == original.n());
    REQUIRE(reloaded.dim() == original.dim());
    for (std::size_t i = 0; i < original.n(); ++i) {
        CHECK(reloaded.label(i) == original.label(i));
        for (std::size_t j = 0; j <= original.dim(); ++j) {
            CHECK(reloaded.x(i, j) == original.x(i, j));  // bit exact
        }
    }
}

TEST_CASE("split_folds: sizes, stratification, determinism") {
    SUBCASE("n=10 k=5 gives folds of size 2") {
        std::vector<std::vector<double>> rows(10, {1.0});
        std::vector<int> labels(10, -1);
        for (int i = 0; i < 5; ++i) labels[i] = +1;
        const Dataset data = Dataset::build(rows, labels);
        const FoldAssignment folds = split_folds(data, 5, 3);
        for (int f = 1; f <= 5; ++f) {
            CHECK(folds.test_rows(f).size() == 2);
        }
    }
    SUBCASE("40 positives over 5 folds gives exactly 8 per fold") {
        std::vector<std::vector<double>> rows(100, {1.0});
        std::vector<int> labels(100, -1);
        for (int i = 0; i < 40; ++i) labels[i] = +1;
        const Dataset data = Dataset::build(rows, labels);
        const FoldAssignment folds = split_folds(data, 5, 11);
        for (int f = 1; f <= 5; ++f) {
            std::size_t pos = 0;
            for (std::size_t i : folds.test_rows(f)) pos += data.label(i) == +1;
            CHECK(pos == 8);
        }
    }
    SUBCASE("same seed twice gives identical folds") {
        Rng rng(5);
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (int i = 0; i < 53; ++i) {
            rows.push_back({static_cast<double>(rng.uniform_int(0, 3))});
            labels.push_back(i % 4 == 0 ? 1 : -1);
        }
        const Dataset data = Dataset::build(rows, labels);
        const FoldAssignment a = split_folds(data, 5, 42);
        const FoldAssignment b = split_folds(data, 5, 42);
        CHECK(a.fold == b.fold);
        const FoldAssignment c = split_folds(data, 5, 43);
        CHECK(a.fold != c.fold);
    }
    SUBCASE("fold counts differ by at most one per class") {
        std::vector<std::vector<double>> rows(37, {1.0});
        std::vector<int> labels(37, -1);
        for (int i = 0; i < 17; ++i) labels[i] = +1;
        const Dataset data = Dataset::build(rows, labels);
        const FoldAssignment folds = split_folds(data, 4, 9);
        std::vector<std::size_t> pos(5, 0);
        for (std::size_t i = 0; i < data.n(); ++i) {
            if (data.label(i) == +1) ++pos[folds.fold[i]];
        }
        const auto [lo, hi] = std::minmax_element(pos.begin() + 1, pos.end());
        CHECK(*hi - *lo <= 1);
    }
    SUBCASE("k outside [2, n] is rejected") {
        std::vector<std::vector<double>> rows(4, {1.0});
        const Dataset data = Dataset::build(rows, {1, -1, 1, -1});
        CHECK_THROWS_AS(split_folds(data, 5, 1), ArgumentError);
        CHECK_THROWS_AS(split_folds(data, 1, 1), ArgumentError);
    }
}

TEST_CASE("simulate_nested") {
    const Dataset original = load_csv(data_file("breastcancer_data.csv"));

    SUBCASE("nested block property and value range") {
        const SyntheticCollection c = simulate_nested(original, {5, 12}, {50, 200}, 99);
        const Dataset& small = c.at(0, 0);
        const Dataset& big = c.at(1, 1);
        CHECK(small.n() == 50);
        CHECK(small.dim() == 5);
        CHECK(big.n() == 200);
        CHECK(big.dim() == 12);
        for (std::size_t i = 0; i < small.n(); ++i) {
            CHECK(small.label(i) == big.label(i));
            for (std::size_t j = 1; j <= small.dim(); ++j) {
                CHECK(small.x(i, j) == big.x(i, j));
            }
        }
        for (std::size_t i = 0; i < big.n(); ++i) {
            for (std::size_t j = 1; j <= big.dim(); ++j) {
                const double v = big.x(i, j);
                CHECK(v == std::floor(v));
                CHECK(v >= 0.0);
                CHECK(v <= 10.0);
            }
        }
    }
    SUBCASE("deterministic given the seed") {
        const SyntheticCollection a = simulate_nested(original, {7}, {64}, 1234);
        const SyntheticCollection b = simulate_nested(original, {7}, {64}, 1234);
        for (std::size_t i = 0; i < 64; ++i) {
            for (std::size_t j = 1; j <= 7; ++j) {
                CHECK(a.at(0, 0).x(i, j) == b.at(0, 0).x(i, j));
            }
        }
    }
    SUBCASE("non-integer original features rejected") {
        const Dataset bad = Dataset::build({{0.5}, {1.0}}, {1, -1});
        CHECK_THROWS_AS(simulate_nested(bad, {1}, {2}, 1), ValidationError);
    }
}
