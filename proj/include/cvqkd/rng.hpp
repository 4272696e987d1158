#pragma once

#include <cstdint>
#include <vector>

namespace cvqkd {

/// Counter-based PRNG standing in for the vacuum-fluctuation QRNG of the real
/// system. Each draw is a pure function of (key, counter), so independent
/// streams can be derived per frame / per purpose and replayed exactly.
class CounterRng {
public:
    explicit CounterRng(uint64_t seed, uint64_t stream = 0);

    uint64_t next_u64();

    /// Uniform in [0,1) with 53-bit resolution.
    double next_double();

    /// Uniform in [0,1), never returning exactly 0 (safe for quantile maps).
    double next_open();

    /// Standard normal via the polar method (fast path for channel noise).
    double next_normal();

    /// Derive an independent stream for (frame_id, purpose).
    static CounterRng derive(uint64_t seed, uint64_t frame_id, uint64_t purpose);

private:
    uint64_t key_;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Inverse standard normal CDF, accurate to full double precision across the
/// whole open interval (0,1), including far tails (p ~ 1e-300).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// Map uniformly distributed raw words onto a zero-mean Gaussian sequence of
/// the given variance using the inverse-CDF transform. The mapping is
/// monotone in the raw word value and bit-reproducible for a fixed input.
std::vector<double> gaussian_from_uniform(const std::vector<uint64_t>& words,
                                          double variance);

}  // namespace cvqkd
