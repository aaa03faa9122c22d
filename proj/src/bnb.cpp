#include "riskscore/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskscore {

Region Region::full(const CoefficientSet& box, std::size_t num_aux) {
    Region out;
    out.lb = box.lb;
    out.ub = box.ub;
    out.alpha_fix.assign(box.dim(), -1);
    out.aux_fix.assign(num_aux, -1);
    return out;
}

bool Region::contains(const std::vector<std::int64_t>& point) const {
    if (point.size() != lb.size()) return false;
    for (std::size_t j = 0; j < point.size(); ++j) {
        if (point[j] < lb[j] || point[j] > ub[j]) return false;
    }
    for (std::size_t j = 1; j < point.size(); ++j) {
        const std::int8_t fix = alpha_fix[j - 1];
        if (fix == 0 && point[j] != 0) return false;
        if (fix == 1 && point[j] == 0) return false;
    }
    return true;
}

bool Region::empty() const {
    for (std::size_t j = 0; j < lb.size(); ++j) {
        if (lb[j] > ub[j]) return true;
    }
    for (std::size_t j = 1; j < lb.size(); ++j) {
        // alpha_j = 1 with only zero available is a contradiction
        if (alpha_fix[j - 1] == 1 && lb[j] == 0 && ub[j] == 0) return true;
        if (alpha_fix[j - 1] == 0 && (lb[j] > 0 || ub[j] < 0)) return true;
    }
    return false;
}

void NodeQueue::push(Region region, double bound) {
    nodes_.insert(Node{std::move(region), bound, next_seq_++});
}

std::optional<Node> NodeQueue::pop_best() {
    if (nodes_.empty()) return std::nullopt;
    auto it = nodes_.begin();
    Node out = *it;
    nodes_.erase(it);
    return out;
}

std::size_t NodeQueue::prune(double cutoff) {
    std::size_t removed = 0;
    for (auto it = nodes_.begin(); it != nodes_.end();) {
        if (it->bound >= cutoff) {
            it = nodes_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

double NodeQueue::min_bound() const {
    if (nodes_.empty()) return std::numeric_limits<double>::infinity();
    return nodes_.begin()->bound;
}

namespace {

double fractionality(double x) { return std::abs(x - std::round(x)); }

}  // namespace

bool is_integral_point(const RelaxationPoint& point, double tol) {
    for (double v : point.lambda) {
        if (fractionality(v) > tol) return false;
    }
    for (double v : point.alpha) {
        if (fractionality(v) > tol) return false;
    }
    for (double v : point.aux) {
        if (fractionality(v) > tol) return false;
    }
    return true;
}

std::vector<Region> split_region(const Region& region, const RelaxationPoint& point,
                                 double tol) {
    const std::size_t d = point.alpha.size();

    // Most-fractional alpha first, ties to the smallest index.
    std::size_t best = 0;
    double best_frac = tol;
    int kind = -1;  // 0 alpha, 1 lambda, 2 aux
    for (std::size_t j = 0; j < d; ++j) {
        const double f = fractionality(point.alpha[j]);
        if (f > best_frac) {
            best_frac = f;
            best = j + 1;
            kind = 0;
        }
    }
    if (kind < 0) {
        best_frac = tol;
        for (std::size_t j = 0; j < point.lambda.size(); ++j) {
            const double f = fractionality(point.lambda[j]);
            if (f > best_frac) {
                best_frac = f;
                best = j;
                kind = 1;
            }
        }
    }
    if (kind < 0) {
        best_frac = tol;
        for (std::size_t g = 0; g < point.aux.size(); ++g) {
            const double f = fractionality(point.aux[g]);
            if (f > best_frac) {
                best_frac = f;
                best = g;
                kind = 2;
            }
        }
    }
    if (kind < 0) {
        throw SolverError("split_region called on an integral solution");
    }

    std::vector<Region> children;
    if (kind == 0) {
        const std::size_t j = best;  // feature dimension
        Region off = region;
        off.alpha_fix[j - 1] = 0;
        off.lb[j] = 0;
        off.ub[j] = 0;
        Region on = region;
        on.alpha_fix[j - 1] = 1;
        if (!off.empty()) children.push_back(std::move(off));
        if (!on.empty()) children.push_back(std::move(on));
    } else if (kind == 1) {
        const std::size_t j = best;
        const double v = point.lambda[j];
        Region down = region;
        down.ub[j] = static_cast<std::int64_t>(std::floor(v));
        Region up = region;
        up.lb[j] = static_cast<std::int64_t>(std::ceil(v));
        if (!down.empty()) children.push_back(std::move(down));
        if (!up.empty()) children.push_back(std::move(up));
    } else {
        Region off = region;
        off.aux_fix[best] = 0;
        Region on = region;
        on.aux_fix[best] = 1;
        children.push_back(std::move(off));
        children.push_back(std::move(on));
    }
    return children;
}

std::vector<Region> split_on_padding(const Region& region, std::size_t j) {
    std::vector<Region> children;
    // Models with lambda_j = 0 belong here only when the region does not
    // already insist on alpha_j = 1.
    if (region.alpha_fix[j - 1] != 1 && region.lb[j] <= 0 && region.ub[j] >= 0) {
        Region zero = region;
        zero.alpha_fix[j - 1] = 0;
        zero.lb[j] = 0;
        zero.ub[j] = 0;
        if (!zero.empty()) children.push_back(std::move(zero));
    }
    Region pos = region;
    pos.lb[j] = std::max<std::int64_t>(pos.lb[j], 1);
    pos.alpha_fix[j - 1] = 1;
    if (!pos.empty() && pos.lb[j] <= pos.ub[j]) children.push_back(std::move(pos));
    Region neg = region;
    neg.ub[j] = std::min<std::int64_t>(neg.ub[j], -1);
    neg.alpha_fix[j - 1] = 1;
    if (!neg.empty() && neg.lb[j] <= neg.ub[j]) children.push_back(std::move(neg));
    return children;
}

}  // namespace riskscore
