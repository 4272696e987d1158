#pragma once

#include <functional>
#include <vector>

#include "cvqkd/paramest.hpp"

namespace cvqkd {

/// How the trusted detector's EPR purification variance is built from the
/// quoted electronic noise t.
enum class AncillaConvention {
    quoted_t,   // v = 1 + 2 t / (1 - tau): standard realistic-heterodyne form
                // applied to the quoted total t
    clearance,  // v = 1 + t / (1 - tau): detected electronic noise t/2 per
                // quadrature, matching the clearance definition
};

struct SecurityParams {
    double beta = 0.925;
    double fer = 0.59;
    long long n_block = 0;       // 0: derived as n_used * (1 - fer)
    double delta_fail = 1e-10;   // total estimation failure probability
    double baud_hz = 1e8;
    double eps_bar = 0.0;        // 0: defaults to delta_fail
    bool split_delta = true;     // split delta_fail across the two bounds
    AncillaConvention ancilla = AncillaConvention::quoted_t;
};

struct SecurityReport {
    double i_ab = 0.0;           // bits/symbol at the parameters used
    double chi_e = 0.0;          // bits/symbol
    double delta_n = 0.0;        // bits/symbol
    double skr_asymptotic_bps = 0.0;
    double skr_finite_bps = 0.0;
    bool negative_rate = false;  // clamped to zero
    LinkEstimate link;
    SecurityParams params;
};

/// G(x) = (x+1) log2(x+1) - x log2(x), the bosonic entropy kernel.
double entropy_g(double x);

/// I_AB = log2(1 + SNR), SNR = (tau*eta*v_mod/2) / (1 + t/2 + tau*eta*xi/2).
double mutual_information(double v_mod, double eta, double tau, double t, double xi);

/// Holevo bound under collective attacks with trusted detector (tau, t):
/// Eve purifies only the (eta, xi) channel; Bob heterodynes behind a
/// beamsplitter tau fed with an EPR ancilla. Throws std::domain_error when a
/// symplectic eigenvalue falls below 1 by more than 1e-9.
double holevo_bound_trusted(double v_mod, double eta, double tau, double t,
                            double xi,
                            AncillaConvention conv = AncillaConvention::quoted_t);

/// Privacy-amplification finite-size penalty:
/// Delta(n) = 7 sqrt(log2(2/eps_bar) / n_block).
double finite_size_delta(long long n_block, double eps_bar);

enum class RateMode { asymptotic, finite };

/// Secret key rate, Eq-of-record:
/// SKR = B (1-FER) (beta I_AB - chi_E - Delta(n)).
/// Finite mode evaluates I_AB and chi_E at (eta_low, xi_up); asymptotic mode
/// at (eta_hat, xi_hat) with Delta = 0. Negative excess-noise estimates are
/// clamped to zero here (and only here); negative rates clamp to zero with
/// the negative_rate flag set.
SecurityReport secret_key_rate(const LinkEstimate& link, const SecurityParams& sec,
                               double v_mod, RateMode mode);

/// xi_RPN = 2 T v_mod (1 - exp(-v_rpn / 2)); T is the total transmittance
/// including detector efficiency. Result is in the same reference frame as
/// the detected noise it models (per-quadrature detected excess = xi_RPN/2).
double xi_rpn_model(double t_total, double v_mod, double v_rpn);

struct DistancePoint {
    double length_km;
    double eta;
    double skr_asymptotic_bps;
    double skr_finite_bps;  // signed margin*rate: negative past the cutoff
};

/// SKR vs fiber length with eta(L) = coupling * 10^(-atten_db_per_km*L/10).
/// Also reports the finite-size zero-crossing distance (linear interpolation
/// between grid points; NaN if the curve never crosses inside the grid).
std::vector<DistancePoint> skr_vs_distance(const std::vector<double>& lengths_km,
                                           const LinkEstimate& link,
                                           const SecurityParams& sec, double v_mod,
                                           double coupling = 0.82,
                                           double atten_db_per_km = 0.146,
                                           double* zero_crossing_km = nullptr);

struct VmodPoint {
    double v_mod;
    double beta;
    double fer;
    double skr_bps;
};

/// Evaluate asymptotic SKR over a v_mod grid using supplied beta/FER models
/// (functions of v_mod); returns the grid argmax.
double vmod_optimize(const std::vector<double>& v_mod_grid,
                     const std::function<double(double)>& beta_model,
                     const std::function<double(double)>& fer_model,
                     const LinkEstimate& link, const SecurityParams& sec,
                     std::vector<VmodPoint>* curve = nullptr);

}  // namespace cvqkd
