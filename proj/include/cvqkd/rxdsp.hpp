#pragma once

#include <vector>

#include "cvqkd/frame.hpp"
#include "cvqkd/snu.hpp"
#include "cvqkd/txdsp.hpp"

namespace cvqkd {

/// Inverse receiver-magnitude-response equalizer, estimated on a fixed
/// periodogram grid and interpolated onto each frame's FFT grid.
struct WhiteningFilter {
    std::vector<double> gain;   // per bin, length nfft
    size_t nfft = 0;
    int n_frames_averaged = 0;
    double sample_rate_hz = 0.0;
};

/// Estimate the whitening filter from vacuum acquisitions: inverse square
/// root of the averaged vacuum periodogram, bins floored at 1e-6 of the peak.
WhiteningFilter whitening_estimate(const std::vector<SampleFrame>& vacuum_frames,
                                   int n_avg, size_t nfft = 4096);

/// Apply the filter (frequency domain, magnitude only).
SampleFrame apply_whitening(const SampleFrame& frame, const WhiteningFilter& wf);

/// Analytic pilot: brick-wall bandpass of width bw_hz centered on
/// pilot_freq_hz (positive-frequency band only).
SampleFrame pilot_extract(const SampleFrame& frame, double pilot_freq_hz,
                          double bw_hz = 1e6);

/// Locate the strongest tone in [f_lo, f_hi] from the frame's spectrum.
double find_tone(const SampleFrame& frame, double f_lo, double f_hi);

/// Frequency of an analytic pilot from the least-squares slope of its
/// unwrapped phase. Throws std::runtime_error when the fit residual marks an
/// unwrap failure.
double freq_offset_fit(const SampleFrame& pilot);

struct PhaseTrackState {
    double theta_hat = 0.0;
    double p_cov = 0.5;
    double process_var_q = 1e-6;  // per full-rate sample
    double meas_var_r = 1.0;      // per-quadrature, at full rate
    double sigma_alpha = 1e-3;
    double sigma_beta = 2.0;
    double sigma_kappa = 0.0;
    int decimation = 1;           // pilot-rate processing factor
    double amplitude = 0.0;       // 0: estimated from pilot power
    double p_ceiling = 50.0;      // divergence guard
};

struct RpnEstimate {
    double v_rpn = 0.0;  // rad^2
};

/// Unscented Kalman phase tracker over a baseband pilot. Processing runs at
/// the decimated pilot rate; the returned estimate is held constant across
/// each decimation block so it lines up with the full-rate grid.
std::pair<std::vector<double>, RpnEstimate> ukf_phase_track(
    const SampleFrame& pilot_baseband, const PhaseTrackState& init);

/// Raw pilot phase reference: unwrapped instantaneous phase of the decimated
/// analytic pilot (the estimate the Kalman tracker is benchmarked against).
std::vector<double> raw_pilot_phase(const SampleFrame& pilot_baseband, int decimation);

struct RxParams {
    double pilot_bw_hz = 1e6;
    double offset_nominal_hz = 2.3e8;  // nominal laser beat
    double search_bw_hz = 4e7;         // pilot peak search window
    size_t sync_symbols = 10000;       // public reference prefix
    long long max_delay_samples = 8192;
    double sync_threshold = 5.0;       // peak over rms of the correlation
    double ukf_q_scale = 1.0;
    double p_ceiling = 50.0;
};

struct RecoverResult {
    SymbolFrame symbols;       // aligned 1:1 with transmitted indices
    bool sync_ok = false;
    long long delay_samples = 0;
    double delay_frac = 0.0;
    double freq_offset_hz = 0.0;  // estimated laser beat
    double v_rpn = 0.0;           // tracker self-estimate
};

/// Bob's full offline chain: whitening, SNU scaling, pilot extraction,
/// frequency fit, UKF phase correction, baseband shift, delay sync against
/// the public reference prefix, matched RRC filtering and decimation.
/// A failed sync is reported in the result, not thrown.
RecoverResult recover_symbols(const SampleFrame& frame, const WhiteningFilter& wf,
                              const CalibrationRecord& cal,
                              const ModulationConfig& cfg,
                              const SymbolFrame& tx_reference,
                              const RxParams& rxp,
                              double combined_linewidth_hz,
                              const std::vector<double>* phase_override = nullptr);

}  // namespace cvqkd
