#pragma once

#include <cmath>
#include <cstdint>

namespace rrlevy {

/// Counter-based stream generator: every path owns an independent stream
/// derived from (seed, path index), so results do not depend on scheduling
/// or worker count. The state is an affine counter fed through a 64-bit
/// finalizer; distinct odd increments keep streams from sharing runs.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t path) {
        key_ = mix(seed ^ mix(2 * path + 0x9E3779B97F4A7C15ULL));
        gamma_ = mix(seed ^ mix(2 * path + 1)) | 1ULL;
    }

    std::uint64_t next_u64() {
        counter_ += gamma_;
        return mix(key_ + counter_);
    }

    /// Uniform in (0, 1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Sequential-search Poisson; intended for small means (per-step jump
    /// counts), where it takes one uniform draw almost always.
    int poisson(double mean, double exp_neg_mean) {
        double u = uniform();
        int k = 0;
        double p = exp_neg_mean;
        double cum = p;
        while (u > cum && k < 1024) {
            ++k;
            p *= mean / k;
            cum += p;
        }
        return k;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 33;
        z *= 0xFF51AFD7ED558CCDULL;
        z ^= z >> 33;
        z *= 0xC4CEB9FE1A85EC53ULL;
        z ^= z >> 33;
        return z;
    }

    std::uint64_t key_ = 0;
    std::uint64_t gamma_ = 1;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rrlevy
