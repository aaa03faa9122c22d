// Test-only oracles, independent of the implementation paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "riskscore/dataset.hpp"
#include "riskscore/lp.hpp"
#include "riskscore/problem.hpp"
#include "riskscore/rng.hpp"

namespace oracles {

// Extended-precision normalized logistic loss (80-bit long double end to end).
inline double loss_extended(const std::vector<double>& coef, const riskscore::Dataset& data) {
    long double total = 0.0L;
    for (std::size_t i = 0; i < data.n(); ++i) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < coef.size(); ++j) {
            s += static_cast<long double>(coef[j]) * static_cast<long double>(data.x(i, j));
        }
        const long double margin = static_cast<long double>(data.label(i)) * s;
        long double term;
        if (margin >= 0.0L) {
            term = std::log1p(std::exp(-margin));
        } else {
            term = -margin + std::log1p(std::exp(margin));
        }
        total += term;
    }
    return static_cast<double>(total / static_cast<long double>(data.n()));
}

// Central finite differences of the loss.
inline std::vector<double> gradient_fd(const std::vector<double>& coef,
                                       const riskscore::Dataset& data, double h = 1e-5) {
    std::vector<double> grad(coef.size());
    for (std::size_t j = 0; j < coef.size(); ++j) {
        std::vector<double> up = coef, down = coef;
        up[j] += h;
        down[j] -= h;
        grad[j] = (riskscore::loss_value(up, data) - riskscore::loss_value(down, data)) /
                  (2.0 * h);
    }
    return grad;
}

// Brute-force LP oracle: enumerate all candidate vertices (every size-n
// subset of tight rows/bounds), keep the best feasible one.
struct LpOracle {
    bool feasible = false;
    double objective = std::numeric_limits<double>::infinity();
};

inline bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (std::abs(a[piv][col]) < 1e-10) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

inline LpOracle lp_vertex_enumeration(const riskscore::LinearProgram& lp) {
    using riskscore::Relation;
    const std::size_t n = lp.num_vars;

    // Equality system candidates: each row and each bound as a hyperplane.
    struct Plane {
        std::vector<double> a;
        double rhs;
    };
    std::vector<Plane> planes;
    for (const auto& row : lp.rows) {
        Plane p{std::vector<double>(n, 0.0), row.rhs};
        for (const auto& [v, c] : row.terms) p.a[v] += c;
        planes.push_back(std::move(p));
    }
    for (std::size_t v = 0; v < n; ++v) {
        Plane lo{std::vector<double>(n, 0.0), lp.lower[v]};
        lo.a[v] = 1.0;
        planes.push_back(std::move(lo));
        Plane hi{std::vector<double>(n, 0.0), lp.upper[v]};
        hi.a[v] = 1.0;
        planes.push_back(std::move(hi));
    }

    LpOracle out;
    std::vector<std::size_t> pick(n, 0);
    // Iterate over all n-subsets of planes.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    auto feasible_point = [&](const std::vector<double>& x) {
        for (std::size_t v = 0; v < n; ++v) {
            if (x[v] < lp.lower[v] - 1e-7 || x[v] > lp.upper[v] + 1e-7) return false;
        }
        for (const auto& row : lp.rows) {
            double act = 0.0;
            for (const auto& [v, c] : row.terms) act += c * x[v];
            if (row.relation == Relation::LessEqual && act > row.rhs + 1e-7) return false;
            if (row.relation == Relation::GreaterEqual && act < row.rhs - 1e-7) return false;
            if (row.relation == Relation::Equal && std::abs(act - row.rhs) > 1e-7) return false;
        }
        return true;
    };

    const std::size_t total = planes.size();
    if (n == 0) return out;
    // Incrementing combination indices.
    while (true) {
        std::vector<std::vector<double>> a(n);
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = planes[idx[i]].a;
            b[i] = planes[idx[i]].rhs;
        }
        std::vector<double> x;
        if (solve_square(a, b, x) && feasible_point(x)) {
            double obj = 0.0;
            for (std::size_t v = 0; v < n; ++v) obj += lp.objective[v] * x[v];
            out.feasible = true;
            out.objective = std::min(out.objective, obj);
        }
        // Next combination.
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (idx[pos] + (n - pos) < total) {
                ++idx[pos];
                for (std::size_t t = pos + 1; t < n; ++t) idx[t] = idx[t - 1] + 1;
                break;
            }
            if (pos == 0) return out;
        }
    }
    (void)pick;
    return out;
}

// Random small datasets for property tests. Labels follow a planted noisy
// linear signal so optimal models are usually non-trivial.
inline riskscore::Dataset random_dataset(riskscore::Rng& rng, std::size_t n, std::size_t d,
                                         bool integer_features = true) {
    std::vector<double> planted(d);
    for (auto& w : planted) w = rng.normal(0.0, 1.0);
    const double shift = rng.normal(0.0, 1.0);
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    std::vector<int> labels(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        double signal = shift;
        for (std::size_t j = 0; j < d; ++j) {
            rows[i][j] = integer_features
                             ? static_cast<double>(rng.uniform_int(0, 4))
                             : rng.normal(0.0, 1.0);
            signal += planted[j] * (rows[i][j] - (integer_features ? 2.0 : 0.0));
        }
        const double p = 1.0 / (1.0 + std::exp(-signal));
        labels[i] = rng.uniform() < p ? +1 : -1;
        has_pos = has_pos || labels[i] == +1;
        has_neg = has_neg || labels[i] == -1;
    }
    if (!has_pos) labels[0] = +1;
    if (!has_neg) labels[n - 1] = -1;
    return riskscore::Dataset::build(rows, labels);
}

// Exhaustive optimum over the feasible lattice.
struct LatticeOptimum {
    std::vector<std::int64_t> best;
    double objective = std::numeric_limits<double>::infinity();
};

inline LatticeOptimum lattice_optimum(const riskscore::ProblemSpec& spec, double cap = 1e7) {
    LatticeOptimum out;
    for (const auto& point : riskscore::enumerate_feasible(spec, cap)) {
        const double v = riskscore::objective_value(point, spec);
        if (v < out.objective) {
            out.objective = v;
            out.best = point;
        }
    }
    return out;
}

}  // namespace oracles
