#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace cvqkd {

using cplx = std::complex<double>;

enum class FrameUnit : uint16_t {
    adc_counts = 0,
    snu_normalized = 1,
};

/// One acquisition frame of complex baseband samples.
struct SampleFrame {
    std::vector<cplx> samples;
    double sample_rate_hz = 1e9;
    FrameUnit unit = FrameUnit::snu_normalized;
    uint32_t frame_id = 0;

    size_t size() const { return samples.size(); }
};

/// Quantum symbols alpha_i = x_i + i*p_i at symbol rate, SNU-scaled.
struct SymbolFrame {
    std::vector<cplx> symbols;
    double baud_rate_hz = 1e8;
};

/// Shot-noise-unit calibration derived from vacuum and electronic runs.
/// Variances are per-quadrature, in ADC-count^2 units.
struct CalibrationRecord {
    double vacuum_variance = 0.0;      // shot + electronic
    double electronic_variance = 0.0;  // electronic only
    double snu_scale = 0.0;            // vacuum - electronic
    double clearance_db = 0.0;         // 10*log10(vacuum/electronic)
};

/// Additive excess-noise budget. Components are in SNU, referenced so that
/// the detected per-quadrature contribution of a component xi is tau*eta*xi/2.
struct NoiseBudget {
    double xi_rin = 0.0;
    double xi_mod = 0.0;
    double xi_quant = 0.0;
    double xi_ram = 0.0;
    double xi_rpn = 0.0;
    double xi_other = 0.0;

    double total() const {
        return xi_rin + xi_mod + xi_quant + xi_ram + xi_rpn + xi_other;
    }
};

/// Binary frame file, fixed layout:
///   magic "CVQF" | u16 version | u16 unit | u32 count | u32 rate (kHz)
/// followed by interleaved (re, im) float32 little-endian pairs.
void write_frame(const std::string& path, const SampleFrame& frame);
SampleFrame read_frame(const std::string& path);

/// Per-quadrature sample variance of a complex frame (mean of Re/Im
/// variances, unbiased n-1 normalization).
double quadrature_variance(const std::vector<cplx>& v);

}  // namespace cvqkd
