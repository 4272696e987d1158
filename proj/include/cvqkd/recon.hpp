#pragma once

#include <cstdint>
#include <vector>

#include "cvqkd/frame.hpp"
#include "cvqkd/ldpc.hpp"

namespace cvqkd {

/// One reverse-reconciliation session: Bob's measurements are the reference;
/// Alice decodes. Bits ride d-dimensional rotations; punctured codeword
/// positions carry no channel dimension and enter with zero LLR.
struct ReconConfig {
    int dimension = 8;
    int max_bp_iters = 500;
    uint64_t seed = 1;
};

struct ReconResult {
    double beta = 0.0;        // effective rate / Shannon capacity at snr_hat
    double fer = 0.0;
    double snr_hat = 0.0;     // per-dimension SNR of the reconciliation channel
    int blocks = 0;
    int failures = 0;
    bool agreement_ok = true;          // corrected keys bit-exact on converged blocks
    std::vector<uint8_t> key_bits;     // concatenation over converged blocks
    std::vector<int> iters_per_block;
};

/// Run reconciliation over aligned streams. tx/rx symbols are consumed as
/// interleaved quadrature dimensions; the trailing partial block is dropped.
ReconResult reconcile_streams(const SymbolFrame& alice, const SymbolFrame& bob,
                              const LdpcCode& code, const ReconConfig& cfg);

/// Synthetic-channel harness: per-dimension y = sqrt(snr) x + z with unit
/// noise, n_blocks codewords. Used for threshold scans and FER curves.
ReconResult run_recon_blocks(const LdpcCode& code, double snr, int n_blocks,
                             const ReconConfig& cfg);

/// FER = 0.5 crossing of the code on the synthetic channel, bisected over
/// SNR (dB) to db_tol.
double measure_threshold_snr(const LdpcCode& code, const ReconConfig& cfg,
                             double snr_lo, double snr_hi, int n_blocks,
                             double db_tol = 0.1);

}  // namespace cvqkd
