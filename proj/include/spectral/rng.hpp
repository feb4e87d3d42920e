#pragma once

#include <cmath>
#include <cstdint>

namespace spectral {

/// PCG64: 128-bit LCG state with XSL-RR output. One multiply per draw,
/// and distinct odd increments give provably non-overlapping sequences,
/// which is what makes per-trial substreams reproducible regardless of
/// how trials are scheduled across workers.
class Pcg64 {
public:
    explicit Pcg64(std::uint64_t seed, std::uint64_t stream = 0) {
        inc_ = (static_cast<state_t>(mix(stream)) << 1u) | 1u;
        state_ = 0;
        (void)next();
        state_ += (static_cast<state_t>(mix(seed ^ 0x9E3779B97F4A7C15ull)) << 64) |
                  mix(seed + 0x243F6A8885A308D3ull);
        (void)next();
    }

    std::uint64_t next() {
        state_ = state_ * kMultiplier + inc_;
        const std::uint64_t xored =
            static_cast<std::uint64_t>(state_ >> 64) ^ static_cast<std::uint64_t>(state_);
        const unsigned rot = static_cast<unsigned>(state_ >> 122);
        return (xored >> rot) | (xored << ((-rot) & 63u));
    }

    /// Uniform double in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift rejection-free mapping; bias < 2^-64, irrelevant here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// Standard normal via Box-Muller (no cached spare: keeps streams stateless).
    double normal() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
    }

private:
    using state_t = unsigned __int128;
    static constexpr state_t kMultiplier =
        (static_cast<state_t>(2549297995355413924ull) << 64) | 4865540595714422341ull;

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    state_t state_ = 0;
    state_t inc_ = 1;
};

/// Substream for one Monte-Carlo trial: same (seed, trial) always yields the
/// same stream no matter which worker runs it.
inline Pcg64 trial_stream(std::uint64_t seed, std::uint64_t trial) {
    return Pcg64(seed, /*stream=*/trial + 1);
}

}  // namespace spectral
