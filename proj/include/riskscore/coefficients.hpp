#pragma once

#include <cstdint>
#include <vector>

#include "riskscore/common.hpp"

namespace riskscore {

/// Integer coefficient lattice: per-dimension bounds for j = 0..d with
/// Lmin_j <= 0 <= Lmax_j, so the zero vector is always feasible.
struct CoefficientSet {
    std::vector<std::int64_t> lb;
    std::vector<std::int64_t> ub;

    static CoefficientSet uniform(std::size_t d, std::int64_t lo, std::int64_t hi) {
        CoefficientSet out;
        out.lb.assign(d + 1, lo);
        out.ub.assign(d + 1, hi);
        out.validate();
        return out;
    }

    static CoefficientSet with_intercept(std::size_t d, std::int64_t lo, std::int64_t hi,
                                         std::int64_t intercept_lo, std::int64_t intercept_hi) {
        CoefficientSet out = uniform(d, lo, hi);
        out.lb[0] = intercept_lo;
        out.ub[0] = intercept_hi;
        out.validate();
        return out;
    }

    std::size_t dim() const { return lb.empty() ? 0 : lb.size() - 1; }

    void validate() const {
        if (lb.size() != ub.size() || lb.empty()) {
            throw ArgumentError("coefficient bounds are inconsistent");
        }
        for (std::size_t j = 0; j < lb.size(); ++j) {
            if (lb[j] > 0 || ub[j] < 0) {
                throw ArgumentError("coefficient set must contain the zero vector (dimension " +
                                    std::to_string(j) + ")");
            }
        }
    }

    /// Number of lattice points, saturating at infinity for huge boxes.
    double lattice_size() const {
        double total = 1.0;
        for (std::size_t j = 0; j < lb.size(); ++j) {
            total *= static_cast<double>(ub[j] - lb[j] + 1);
            if (total > 1e300) return total;
        }
        return total;
    }

    bool contains(const std::vector<std::int64_t>& coef) const {
        if (coef.size() != lb.size()) return false;
        for (std::size_t j = 0; j < coef.size(); ++j) {
            if (coef[j] < lb[j] || coef[j] > ub[j]) return false;
        }
        return true;
    }
};

}  // namespace riskscore
