#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskscore {

// Error taxonomy. Parse/validation errors carry enough context to name the
// offending row or column in the message.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct CompileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// log(1 + exp(-s)) without overflow for |s| beyond +-700.
inline double log1p_exp_neg(double s) {
    if (s >= 0.0) return std::log1p(std::exp(-s));
    return -s + std::log1p(std::exp(s));
}

// Logistic function, saturates cleanly at the extremes.
inline double sigmoid(double s) {
    if (s >= 0.0) {
        const double z = std::exp(-s);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(s);
    return z / (1.0 + z);
}

// Kahan-compensated accumulator. Loss sums run in a fixed index order so
// repeated evaluations are bit-identical.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline bool is_integral(double x, double tol = 1e-6) {
    return std::abs(x - std::round(x)) <= tol;
}

// Shortest decimal form that round-trips to the same double.
std::string format_double(double x);

}  // namespace riskscore
