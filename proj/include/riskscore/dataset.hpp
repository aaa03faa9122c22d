#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskscore/common.hpp"

namespace riskscore {

/// Immutable classification dataset in the shape the solver expects:
/// an n x (d+1) design matrix whose column 0 is identically 1 (intercept),
/// labels in {-1,+1}, and unique feature names with names[0] == "(Intercept)".
/// Datasets are never mutated after construction and are safe to share
/// across threads.
class Dataset {
  public:
    Dataset() = default;

    /// Builds a dataset from feature rows *without* the intercept column;
    /// the intercept is prepended here. Labels may be {0,1} or {-1,+1}.
    static Dataset build(const std::vector<std::vector<double>>& feature_rows,
                         const std::vector<int>& labels,
                         std::vector<std::string> feature_names = {},
                         std::string outcome_name = "y");

    std::size_t n() const { return labels_.size(); }
    std::size_t dim() const { return names_.empty() ? 0 : names_.size() - 1; }

    double x(std::size_t i, std::size_t j) const {
        return values_[i * (dim() + 1) + j];
    }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * (dim() + 1), dim() + 1};
    }
    int label(std::size_t i) const { return labels_[i]; }

    const std::vector<std::string>& names() const { return names_; }
    const std::string& outcome_name() const { return outcome_name_; }
    bool integer_valued() const { return integer_valued_; }

    /// <coef, x_i> including the intercept term.
    double score(std::span<const double> coef, std::size_t i) const;

    std::size_t positives() const;

    /// Row subset in the given order (used by folds and subsampling).
    Dataset subset(const std::vector<std::size_t>& rows) const;

    /// Index of a feature by name; throws ArgumentError when absent.
    std::size_t feature_index(const std::string& name) const;

  private:
    std::vector<double> values_;  // row-major, n x (d+1)
    std::vector<int> labels_;     // entries in {-1,+1}
    std::vector<std::string> names_;
    std::string outcome_name_ = "y";
    bool integer_valued_ = false;

    void validate() const;
    friend Dataset load_csv(const std::string&, const std::string&);
};

/// Loads a CSV with a header row. The outcome column is selected by name;
/// an empty name means the first column. Outcome values in {0,1} are mapped
/// to {-1,+1}. Missing (empty) cells are rejected.
Dataset load_csv(const std::string& path, const std::string& outcome_column = "");

/// Writes outcome (as -1/+1) plus the non-intercept features. Reals are
/// printed in shortest round-trip form so reloading is bit-exact.
void save_csv(const Dataset& data, const std::string& path);

/// Stratified fold assignment, 1..k per example, deterministic given seed.
struct FoldAssignment {
    std::vector<int> fold;
    int k = 0;
    std::uint64_t seed = 0;

    std::vector<std::size_t> train_rows(int f) const;
    std::vector<std::size_t> test_rows(int f) const;
};

FoldAssignment split_folds(const Dataset& data, int k, std::uint64_t seed);

/// Nested synthetic datasets grown from an integer-featured original with
/// values in [0,10]. The largest set replicates permuted original features,
/// adds Normal(0, 0.5) noise, rounds, and clips back to [0,10]; every
/// smaller dataset is the leading (n, d) block of the largest.
struct SyntheticCollection {
    std::vector<std::size_t> dims;   // increasing
    std::vector<std::size_t> sizes;  // increasing
    std::vector<Dataset> datasets;   // dims-major: [d0: n0..nK, d1: n0..nK, ...]

    const Dataset& at(std::size_t dim_idx, std::size_t size_idx) const {
        return datasets[dim_idx * sizes.size() + size_idx];
    }
};

SyntheticCollection simulate_nested(const Dataset& original,
                                    std::vector<std::size_t> dims,
                                    std::vector<std::size_t> sizes,
                                    std::uint64_t seed);

}  // namespace riskscore
