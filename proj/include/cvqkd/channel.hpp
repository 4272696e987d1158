#pragma once

#include <vector>

#include "cvqkd/frame.hpp"
#include "cvqkd/paramest.hpp"
#include "cvqkd/txdsp.hpp"

namespace cvqkd {

struct ChannelParams {
    double length_km = 100.0;
    double atten_db_per_km = 0.146;
    double coupling_transmittance = 0.82;
    double linewidth_tx_hz = 100.0;
    double linewidth_rx_hz = 100.0;
    double freq_offset_hz = 2.3e8;
    NoiseBudget xi_injected;      // excess injections, security-formula convention
    long long delay_samples = 0;  // bulk propagation delay
    double initial_phase = -1.0;  // < 0: random from seed
    double shot_scale = 1.0;      // 0 disables shot noise (loopback fixture)

    double eta() const;           // coupling * 10^(-atten*L/10)
    double combined_linewidth_hz() const {
        return linewidth_tx_hz + linewidth_rx_hz;
    }
};

/// Ground-truth relative phase per sample: 2 pi df t + Wiener + theta0.
/// For oracle-based tests only; the receiver DSP never sees it.
struct PhaseTrace {
    std::vector<double> theta;
    double freq_offset_hz = 0.0;
};

/// Wiener phase walk with increment variance 2 pi dnu T_s per step.
PhaseTrace wiener_phase(size_t n, double combined_linewidth_hz,
                        double sample_rate_hz, uint64_t seed,
                        uint64_t frame_id = 0, double theta0 = 0.0);

/// Full channel + heterodyne receiver model in SNU units:
///   r = sqrt(eta*tau) * delayed(s) * exp(i theta) + shot + trusted + excess,
/// then the one-pole receiver response at det.bandwidth_hz. Shot noise is 1
/// SNU per quadrature; trusted noise t/2 per quadrature; each excess term xi
/// contributes tau*eta*xi/2 per quadrature.
std::pair<SampleFrame, PhaseTrace> propagate(const SampleFrame& frame,
                                             const ChannelParams& ch,
                                             const DetectorModel& det,
                                             uint64_t seed, uint64_t frame_id = 0);

struct MeasurementSet {
    std::vector<SampleFrame> signal_frames;
    std::vector<SampleFrame> vacuum_frames;
    std::vector<SampleFrame> electronic_frames;
    std::vector<SymbolFrame> tx_symbols;
    std::vector<PhaseTrace> phase_traces;
    double adc_scale = 0.0;  // ADC counts per sqrt(SNU)
};

/// Generate the three acquisitions of one run: signal, vacuum (tx off) and
/// electronic (detector noise only), all ADC-quantized in adc_counts units.
MeasurementSet make_measurement_set(const ModulationConfig& mod,
                                    const ChannelParams& ch,
                                    const DetectorModel& det, int n_frames,
                                    size_t samples_per_frame, uint64_t seed);

}  // namespace cvqkd
