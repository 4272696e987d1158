#pragma once

#include <vector>

#include "cvqkd/frame.hpp"

namespace cvqkd {

struct ModulationConfig {
    double v_mod = 8.41;            // modulation variance, SNU (both quadratures)
    double baud_rate_hz = 1e8;
    double sample_rate_hz = 1e9;
    double rrc_rolloff = 0.2;
    double signal_center_hz = 1e8;
    double pilot_freq_hz = 1.8e8;
    double pilot_amplitude = 0.0;   // 0: auto, +20 dB over quantum band power
    int dac_bits = 16;
    int rrc_span_symbols = 20;

    int samples_per_symbol() const;
    /// Pilot amplitude actually used (resolves the auto default).
    double resolved_pilot_amplitude() const;
    /// Throws std::invalid_argument when the pilot overlaps the signal band
    /// or the rate ratio is not an integer.
    void validate() const;
};

/// Unit-energy root-raised-cosine taps; length span_symbols*sps + 1, odd and
/// symmetric. Cascading two of these meets the Nyquist zero-ISI criterion at
/// symbol spacing.
std::vector<double> rrc_taps(double rolloff, int span_symbols, int samples_per_symbol);

/// Draw count Gaussian symbols with Var(Re)+Var(Im) = v_mod (v_mod/2 per
/// quadrature), deterministic under (seed, frame_id). The raw-word mapping is
/// the monotone inverse-CDF transform.
SymbolFrame generate_symbols(size_t count, const ModulationConfig& cfg,
                             uint64_t seed, uint64_t frame_id = 0);

/// Upsample, RRC pulse-shape, shift to the signal band and multiplex the
/// pilot tone. Output length = symbols * sps, snu_normalized units.
SampleFrame synthesize_waveform(const SymbolFrame& symbols, const ModulationConfig& cfg);

struct QuantizeResult {
    SampleFrame frame;
    long long clipped = 0;        // clipped real components
    double step = 0.0;            // quantizer step
    double quant_noise_var = 0.0; // step^2 / 12, per quadrature, frame units
};

/// Uniform midrise quantizer applied per real component, clipping at
/// +-full_scale. Clipping is counted, never fatal.
QuantizeResult dac_quantize(const SampleFrame& frame, int bits, double full_scale);

}  // namespace cvqkd
