#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qpath {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t s = (state += 0x9e3779b97f4a7c15ULL);
    s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ULL;
    s = (s ^ (s >> 27)) * 0x94d049bb133111ebULL;
    return s ^ (s >> 31);
}
}  // namespace detail

/// Deterministic random stream. Substreams are derived from
/// (master_seed, index) by hashing, so ensemble results do not depend on
/// which worker runs which trajectory. Gaussian draws use explicit
/// Box-Muller to keep the byte-level output under our control.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    static RngStream substream(std::uint64_t master_seed, std::uint64_t index) {
        std::uint64_t s = master_seed;
        detail::splitmix64(s);
        s ^= index * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL;
        std::uint64_t seed = detail::splitmix64(s);
        return RngStream(seed);
    }

    /// Uniform in [0, 1).
    double uniform() {
        // 53-bit mantissa from the top bits of the engine output.
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; the second value is cached.
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * M_PI * u2;
        cached_ = rad * std::sin(ang);
        have_cached_ = true;
        return rad * std::cos(ang);
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace qpath
