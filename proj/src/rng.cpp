#include "cvqkd/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cvqkd {

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer: bijective 64-bit mix.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(uint64_t seed, uint64_t stream)
    : key_(mix64(seed * kGolden + 0x6A09E667F3BCC909ull) ^
           mix64(stream * 0xC2B2AE3D27D4EB4Full + 0xBB67AE8584CAA73Bull)) {}

CounterRng CounterRng::derive(uint64_t seed, uint64_t frame_id, uint64_t purpose) {
    return CounterRng(seed, mix64(frame_id * kGolden + purpose));
}

uint64_t CounterRng::next_u64() {
    return mix64(key_ + (++counter_) * kGolden);
}

double CounterRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::next_open() {
    // (word + 0.5) / 2^64: strictly inside (0,1).
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_double() - 1.0;
        v = 2.0 * next_double() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p outside (0,1)");
    }
    // Solve Phi(x) = p by Newton on the half-line, working with the smaller
    // tail for numerical headroom. erfc is accurate far into the tail, so no
    // rational approximation table is needed.
    const bool upper = p > 0.5;
    const double q = upper ? 1.0 - p : p;  // q <= 0.5, target: Phi(-x) = q
    // Tail asymptotic start; exact enough as a seed everywhere q <= 0.5.
    double x = (q < 0.2) ? std::sqrt(-2.0 * std::log(2.0 * q)) : 0.0;
    for (int it = 0; it < 60; ++it) {
        const double cdf = 0.5 * std::erfc(x * M_SQRT1_2);  // P(X > x) for x>=0
        const double pdf = std::exp(-0.5 * x * x) * 0.39894228040143267794;
        if (pdf <= 0.0) break;
        const double dx = (cdf - q) / pdf;
        x += dx;
        if (std::abs(dx) < 1e-14 * (1.0 + std::abs(x))) break;
    }
    return upper ? x : -x;
}

std::vector<double> gaussian_from_uniform(const std::vector<uint64_t>& words,
                                          double variance) {
    if (variance <= 0.0) {
        throw std::domain_error("gaussian_from_uniform: variance must be > 0");
    }
    const double sigma = std::sqrt(variance);
    std::vector<double> out(words.size());
    for (size_t i = 0; i < words.size(); ++i) {
        const double u = (static_cast<double>(words[i] >> 11) + 0.5) * 0x1.0p-53;
        out[i] = sigma * normal_quantile(u);
    }
    return out;
}

}  // namespace cvqkd
