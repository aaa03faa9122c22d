#pragma once

#include <cstdint>
#include <random>

namespace riskscore {

// Seedable generator with a pinned algorithm (mt19937-64, canonical 53-bit
// uniforms, Box-Muller normals) so that any implementation of the same
// recipe reproduces the streams bit for bit. std::*_distribution is not
// portable across standard libraries, so the transforms live here.
class Rng {
  public:
    static constexpr const char* kAlgorithm = "mt19937-64/canonical53/box-muller";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi] by rejection, bias-free.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(engine_());  // full span
        const std::uint64_t limit = std::uint64_t(-1) - (std::uint64_t(-1) % range);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return lo + static_cast<std::int64_t>(v % range);
    }

    // Normal(mean, sd) via Box-Muller; caches the second variate.
    double normal(double mean = 0.0, double sd = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return mean + sd * (r * std::cos(theta));
    }

    // Fisher-Yates shuffle, deterministic given the seed.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(
                uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace riskscore
