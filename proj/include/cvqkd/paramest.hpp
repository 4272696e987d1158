#pragma once

#include <vector>

#include "cvqkd/frame.hpp"

namespace cvqkd {

/// Detector-side trusted parameters.
struct DetectorModel {
    double tau = 0.68;            // trusted efficiency
    double t_noise = 62.72e-3;    // trusted electronic noise, SNU (t/2 per quadrature)
    double bandwidth_hz = 3.65e8; // one-pole response corner
    int adc_bits = 16;
};

/// Channel estimate from paired (sent, received) symbols.
///
/// Excess noise is carried in the convention of the security formulas: the
/// detected per-quadrature excess equals tau*eta*xi/2. Conversions to other
/// reference points are provided below, never applied silently.
struct LinkEstimate {
    double eta_hat = 0.0;
    double xi_hat = 0.0;      // SNU, may be negative at finite n
    long long n_used = 0;
    double eta_low = 0.0;
    double xi_up = 0.0;
    double delta_fail = 1e-10;

    // Context carried for confidence-interval construction.
    double v_mod = 0.0;       // modulation variance of the tx ensemble
    double tau = 0.68;
    double t_noise = 62.72e-3;
    double resid_var = 0.0;   // per-quadrature residual variance
    bool bounded = false;     // worst-case bounds filled in
};

/// Least-squares gain + residual-variance estimator over aligned symbol
/// streams. Model per quadrature: y = sqrt(tau*eta) * x + z with
/// Var(z) = 1 + t/2 + tau*eta*xi/2 and Var(x) = v_mod/2.
LinkEstimate estimate_link(const SymbolFrame& tx, const SymbolFrame& rx,
                           const DetectorModel& det, double v_mod);

/// One-sided Gaussian confidence bounds at error probability delta_fail per
/// parameter: gain lowered by z*std(gain), residual variance raised by
/// z*std(variance); z = normal_quantile(1 - delta_fail). Sample counts follow
/// the per-symbol convention (n_used complex symbols).
LinkEstimate worst_case_bounds(const LinkEstimate& est);

/// Pool per-frame estimates with inverse-variance weighting and emit the
/// running (n_frames, xi_cum, xi_up_cum) trace.
struct NoiseTracePoint {
    long long n_frames;
    double xi_cum;
    double xi_up_cum;
};
std::vector<NoiseTracePoint> cumulative_noise_trace(
    const std::vector<LinkEstimate>& frames);

/// Reference-point conversions for excess noise (explicit, labeled).
/// Detected per-quadrature excess for a given xi: tau*eta*xi/2.
double xi_to_detected_quad(double xi, double tau, double eta);
/// Channel-input referencing: xi_in = xi (the formula convention already
/// references the budget so that the channel-output mode excess is eta*xi).
double xi_to_channel_output_mode(double xi, double eta);

}  // namespace cvqkd
