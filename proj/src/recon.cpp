#include "cvqkd/recon.hpp"

#include <cmath>
#include <stdexcept>

#include "cvqkd/mdrecon.hpp"
#include "cvqkd/rng.hpp"

namespace cvqkd {

namespace {

struct DimStreams {
    std::vector<double> a;  // Alice
    std::vector<double> b;  // Bob
};

DimStreams to_dims(const SymbolFrame& alice, const SymbolFrame& bob) {
    const size_t n = std::min(alice.symbols.size(), bob.symbols.size());
    DimStreams s;
    s.a.reserve(2 * n);
    s.b.reserve(2 * n);
    for (size_t i = 0; i < n; ++i) {
        s.a.push_back(alice.symbols[i].real());
        s.a.push_back(alice.symbols[i].imag());
        s.b.push_back(bob.symbols[i].real());
        s.b.push_back(bob.symbols[i].imag());
    }
    return s;
}

ReconResult run_on_dims(const std::vector<double>& xa, const std::vector<double>& yb,
                        const LdpcCode& code, const ReconConfig& cfg) {
    const int d = cfg.dimension;
    if (d != 1 && d != 2 && d != 4 && d != 8) {
        throw std::invalid_argument("reconcile: dimension must be 1, 2, 4 or 8");
    }

    // Reconciliation-channel statistics: regression of Alice's data on Bob's
    // (reverse reconciliation), x = alpha y + e.
    const size_t nd = std::min(xa.size(), yb.size());
    if (nd < 64) throw std::invalid_argument("reconcile: streams too short");
    double sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < nd; ++i) {
        sxy += xa[i] * yb[i];
        syy += yb[i] * yb[i];
    }
    const double alpha = sxy / syy;
    double se = 0.0;
    for (size_t i = 0; i < nd; ++i) {
        const double e = xa[i] - alpha * yb[i];
        se += e * e;
    }
    const double noise_var = se / static_cast<double>(nd);
    const double snr = alpha * alpha * (syy / static_cast<double>(nd)) / noise_var;

    // Non-punctured codeword positions packed into d-wide rotation groups;
    // punctured positions (and a trailing partial group) carry zero LLR and
    // consume no channel dimensions.
    std::vector<int32_t> data_pos;
    data_pos.reserve(static_cast<size_t>(code.n));
    for (int i = 0; i < code.n; ++i) {
        if (!code.punctured[static_cast<size_t>(i)]) data_pos.push_back(i);
    }
    const int n_groups = static_cast<int>(data_pos.size()) / d;
    const size_t dims_per_block = static_cast<size_t>(n_groups) * static_cast<size_t>(d);
    if (dims_per_block == 0) throw std::invalid_argument("reconcile: nothing to map");
    const int n_blocks = static_cast<int>(nd / dims_per_block);

    ReconResult res;
    res.snr_hat = snr;
    const double shannon = 0.5 * std::log2(1.0 + snr);
    res.beta = shannon > 0.0 ? code.effective_rate() / shannon : 0.0;

    auto rng = CounterRng(cfg.seed, 0x5EC5);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    std::vector<uint8_t> bob_bits(static_cast<size_t>(code.n));
    std::vector<double> llrs(static_cast<size_t>(code.n));
    std::vector<double> yblk(static_cast<size_t>(d)), xblk(static_cast<size_t>(d)),
        sblk(static_cast<size_t>(d));

    size_t dim_base = 0;
    for (int blk = 0; blk < n_blocks; ++blk) {
        for (int i = 0; i < code.n; ++i) {
            bob_bits[static_cast<size_t>(i)] = static_cast<uint8_t>(rng.next_u64() & 1);
        }
        std::fill(llrs.begin(), llrs.end(), 0.0);
        for (int g = 0; g < n_groups; ++g) {
            const size_t pos = dim_base + static_cast<size_t>(g) * static_cast<size_t>(d);
            for (int j = 0; j < d; ++j) {
                const int32_t cw = data_pos[static_cast<size_t>(g * d + j)];
                yblk[static_cast<size_t>(j)] = yb[pos + static_cast<size_t>(j)];
                xblk[static_cast<size_t>(j)] = xa[pos + static_cast<size_t>(j)];
                sblk[static_cast<size_t>(j)] =
                    bob_bits[static_cast<size_t>(cw)] ? -inv_sqrt_d : inv_sqrt_d;
            }
            const auto m = md_map(yblk, sblk);
            const auto l = md_demap(xblk, m, noise_var);
            for (int j = 0; j < d; ++j) {
                llrs[static_cast<size_t>(data_pos[static_cast<size_t>(g * d + j)])] =
                    l[static_cast<size_t>(j)];
            }
        }
        dim_base += dims_per_block;

        const auto syn = syndrome_of(code, bob_bits);
        const auto dec = bp_decode(code, llrs, syn, cfg.max_bp_iters);
        res.iters_per_block.push_back(dec.iterations);
        ++res.blocks;
        if (!dec.converged) {
            ++res.failures;
            continue;
        }
        if (dec.bits != bob_bits) res.agreement_ok = false;
        res.key_bits.insert(res.key_bits.end(), dec.bits.begin(), dec.bits.end());
    }
    res.fer = res.blocks > 0
                  ? static_cast<double>(res.failures) / static_cast<double>(res.blocks)
                  : 0.0;
    return res;
}

}  // namespace

ReconResult reconcile_streams(const SymbolFrame& alice, const SymbolFrame& bob,
                              const LdpcCode& code, const ReconConfig& cfg) {
    const auto dims = to_dims(alice, bob);
    if (dims.a.empty()) throw std::invalid_argument("reconcile_streams: empty streams");
    return run_on_dims(dims.a, dims.b, code, cfg);
}

ReconResult run_recon_blocks(const LdpcCode& code, double snr, int n_blocks,
                             const ReconConfig& cfg) {
    if (snr <= 0.0) throw std::invalid_argument("run_recon_blocks: snr must be > 0");
    const int p = code.n_punctured();
    const size_t per_block = static_cast<size_t>(((code.n - p) / cfg.dimension)) *
                             static_cast<size_t>(cfg.dimension);
    const size_t nd = per_block * static_cast<size_t>(n_blocks);
    std::vector<double> x(nd), y(nd);
    auto rng = CounterRng(cfg.seed, 0xC4A0);
    const double g = std::sqrt(snr);
    for (size_t i = 0; i < nd; ++i) {
        const double xi = rng.next_normal();
        x[i] = xi;
        y[i] = g * xi + rng.next_normal();
    }
    // Reverse direction: Bob's y is the noisy-but-reference side.
    return run_on_dims(x, y, code, cfg);
}

double measure_threshold_snr(const LdpcCode& code, const ReconConfig& cfg,
                             double snr_lo, double snr_hi, int n_blocks,
                             double db_tol) {
    auto fer_at = [&](double snr) {
        ReconConfig c = cfg;
        c.seed = cfg.seed + static_cast<uint64_t>(snr * 1e6);
        return run_recon_blocks(code, snr, n_blocks, c).fer;
    };
    double lo = 10.0 * std::log10(snr_lo), hi = 10.0 * std::log10(snr_hi);
    while (hi - lo > db_tol) {
        const double mid = 0.5 * (lo + hi);
        if (fer_at(std::pow(10.0, mid / 10.0)) > 0.5) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::pow(10.0, 0.5 * (lo + hi) / 10.0);
}

}  // namespace cvqkd
