#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gazemetric {

// Seed derivation for independent per-run / per-participant streams.
// Two splitmix64 rounds over (master, stream) so that nearby stream
// indices land far apart. Pure integer math, stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (stream * 0x632BE59BD9B4E019ull + 0xD1B54A32D192ED03ull);
    splitmix64(s);
    return splitmix64(s);
}

// mt19937_64 has a standard-pinned output sequence; the distributions in
// <random> do not. All draws below are implemented here so a seed pins the
// exact sample sequence regardless of the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); multiply-shift bound (bias < n / 2^64)
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(u64()) * n) >> 64);
    }

    // standard normal, Marsaglia polar method with one cached spare
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // gamma(shape k >= 0.1, scale theta), Marsaglia-Tsang
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gazemetric
