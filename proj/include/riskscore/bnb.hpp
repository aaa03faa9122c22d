#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "riskscore/coefficients.hpp"

namespace riskscore {

/// Box region of the lattice plus indicator fixings. alpha_fix / aux_fix
/// entries are -1 (free), 0, or 1; fixing alpha_j = 0 collapses the
/// coefficient bounds of dimension j to [0, 0].
struct Region {
    std::vector<std::int64_t> lb, ub;  // size d+1
    std::vector<std::int8_t> alpha_fix;  // size d, entry j-1 for feature j
    std::vector<std::int8_t> aux_fix;    // one per auxiliary selector

    static Region full(const CoefficientSet& box, std::size_t num_aux);

    bool contains(const std::vector<std::int64_t>& point) const;
    bool empty() const;
};

struct Node {
    Region region;
    double bound = 0.0;      // inherited lower bound on the surrogate objective
    std::uint64_t seq = 0;   // insertion order, breaks bound ties FIFO
};

/// Best-bound node set: remove_node returns the node with the smallest
/// bound, FIFO among ties.
class NodeQueue {
  public:
    void push(Region region, double bound);
    std::optional<Node> pop_best();
    /// Removes every node whose bound is >= cutoff; returns the count.
    std::size_t prune(double cutoff);
    double min_bound() const;  // +inf when empty
    bool empty() const { return nodes_.empty(); }
    std::size_t size() const { return nodes_.size(); }

  private:
    struct Order {
        bool operator()(const Node& a, const Node& b) const {
            if (a.bound != b.bound) return a.bound < b.bound;
            return a.seq < b.seq;
        }
    };
    std::multiset<Node, Order> nodes_;
    std::uint64_t next_seq_ = 0;
};

/// Fractional LP point in region coordinates.
struct RelaxationPoint {
    std::vector<double> lambda;  // size d+1
    std::vector<double> alpha;   // size d
    std::vector<double> aux;     // per auxiliary selector
};

/// True when every coefficient, indicator, and selector is within tol of an
/// integer.
bool is_integral_point(const RelaxationPoint& point, double tol = 1e-6);

/// Splits on the most-fractional alpha_j; if all alpha are integral, on the
/// most-fractional lambda_j; auxiliary selectors last. Children are disjoint
/// and cover every lattice point of the parent. Throws on integral input.
std::vector<Region> split_region(const Region& region, const RelaxationPoint& point,
                                 double tol = 1e-6);

/// Separates an integral candidate whose indicator alpha_j = 1 pads a zero
/// coefficient: children { lambda_j = 0 & alpha_j = 0 }, { lambda_j >= 1 },
/// { lambda_j <= -1 } (empty sides dropped).
std::vector<Region> split_on_padding(const Region& region, std::size_t j);

}  // namespace riskscore
