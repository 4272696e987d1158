#include "cvqkd/paramest.hpp"

#include <cmath>
#include <stdexcept>

#include "cvqkd/rng.hpp"

namespace cvqkd {

LinkEstimate estimate_link(const SymbolFrame& tx, const SymbolFrame& rx,
                           const DetectorModel& det, double v_mod) {
    if (tx.symbols.size() != rx.symbols.size()) {
        throw std::invalid_argument("estimate_link: stream length mismatch");
    }
    if (tx.symbols.empty()) {
        throw std::invalid_argument("estimate_link: empty streams");
    }

    // Complex least squares for the real gain g in y = g x + z. Phase has
    // already been corrected upstream, so the real part of the correlator is
    // the estimator of record.
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < tx.symbols.size(); ++i) {
        const cplx prod = std::conj(tx.symbols[i]) * rx.symbols[i];
        sxy += prod.real();
        sxx += std::norm(tx.symbols[i]);
    }
    if (sxx <= 0.0) throw std::invalid_argument("estimate_link: degenerate tx stream");
    const double g = sxy / sxx;

    double acc = 0.0;
    for (size_t i = 0; i < tx.symbols.size(); ++i) {
        acc += std::norm(rx.symbols[i] - g * tx.symbols[i]);
    }
    const double n = static_cast<double>(tx.symbols.size());
    const double resid_var = acc / (2.0 * n);  // per quadrature

    LinkEstimate est;
    est.n_used = static_cast<long long>(tx.symbols.size());
    est.v_mod = v_mod;
    est.tau = det.tau;
    est.t_noise = det.t_noise;
    est.resid_var = resid_var;
    est.eta_hat = g * g / det.tau;
    const double denom = det.tau * est.eta_hat / 2.0;
    est.xi_hat = denom > 0.0
                     ? (resid_var - 1.0 - det.t_noise / 2.0) / denom
                     : 0.0;
    return est;
}

LinkEstimate worst_case_bounds(const LinkEstimate& est) {
    if (est.n_used <= 100) {
        throw std::invalid_argument("worst_case_bounds: too few symbols");
    }
    LinkEstimate out = est;
    const double z = normal_quantile(1.0 - est.delta_fail);
    const double n = static_cast<double>(est.n_used);

    // Gain bound: std of the least-squares gain estimate with regressor
    // variance v_mod/2 per quadrature.
    const double g = std::sqrt(std::max(est.tau * est.eta_hat, 0.0));
    const double sg = std::sqrt(est.resid_var / (n * est.v_mod / 2.0));
    const double g_low = std::max(g - z * sg, 0.0);
    out.eta_low = g_low * g_low / est.tau;

    // Noise bound: std of the residual sample variance, sigma^2 sqrt(2/n).
    const double sv = est.resid_var * std::sqrt(2.0 / n);
    const double resid_up = est.resid_var + z * sv;
    const double denom = est.tau * est.eta_hat / 2.0;
    out.xi_up = denom > 0.0
                    ? (resid_up - 1.0 - est.t_noise / 2.0) / denom
                    : est.xi_hat;
    out.bounded = true;
    return out;
}

std::vector<NoiseTracePoint> cumulative_noise_trace(
    const std::vector<LinkEstimate>& frames) {
    if (frames.empty()) {
        throw std::invalid_argument("cumulative_noise_trace: no frames");
    }
    std::vector<NoiseTracePoint> trace;
    trace.reserve(frames.size());
    double wsum = 0.0, xsum = 0.0;
    long long n_tot = 0;
    for (size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        // Inverse-variance weight of a per-frame xi estimate scales with the
        // frame's symbol count.
        const double w = static_cast<double>(f.n_used);
        wsum += w;
        xsum += w * f.xi_hat;
        n_tot += f.n_used;

        LinkEstimate pooled = f;
        pooled.xi_hat = xsum / wsum;
        pooled.n_used = n_tot;
        pooled.resid_var = f.resid_var;  // noise level, not pooled estimate
        const auto wc = worst_case_bounds(pooled);
        trace.push_back({static_cast<long long>(i + 1), pooled.xi_hat, wc.xi_up});
    }
    return trace;
}

double xi_to_detected_quad(double xi, double tau, double eta) {
    return tau * eta * xi / 2.0;
}

double xi_to_channel_output_mode(double xi, double eta) {
    return eta * xi;
}

}  // namespace cvqkd
