#include "cvqkd/rxdsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cvqkd/fft.hpp"

namespace cvqkd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void unwrap_inplace(std::vector<double>& ph) {
    for (size_t i = 1; i < ph.size(); ++i) {
        double d = ph[i] - ph[i - 1];
        d -= kTwoPi * std::round(d / kTwoPi);
        ph[i] = ph[i - 1] + d;
    }
}

// Moment-based (amplitude, per-quad noise) estimate for a constant-envelope
// tone in circular noise: M2 = A^2 + 2s, M4 = A^4 + 8A^2 s + 8s^2.
void tone_moments(const std::vector<cplx>& y, double& amp, double& nvar) {
    double m2 = 0.0, m4 = 0.0;
    for (const auto& z : y) {
        const double p = std::norm(z);
        m2 += p;
        m4 += p * p;
    }
    const double n = static_cast<double>(y.size());
    m2 /= n;
    m4 /= n;
    // 4 s^2 + 4 s A^2 = M4 - M2^2 with A^2 = M2 - 2s
    const double d = m4 - m2 * m2;
    double s = (4.0 * m2 - std::sqrt(std::max(16.0 * m2 * m2 - 16.0 * d, 0.0))) / 8.0;
    s = std::clamp(s, 0.0, m2 / 2.0);
    nvar = s;
    amp = std::sqrt(std::max(m2 - 2.0 * s, 1e-30));
}

}  // namespace

WhiteningFilter whitening_estimate(const std::vector<SampleFrame>& vacuum_frames,
                                   int n_avg, size_t nfft) {
    if (n_avg < 2 || vacuum_frames.size() < 2) {
        throw std::runtime_error("whitening_estimate: need at least 2 vacuum frames");
    }
    const size_t use = std::min<size_t>(vacuum_frames.size(), static_cast<size_t>(n_avg));
    std::vector<double> psd(nfft, 0.0);
    for (size_t f = 0; f < use; ++f) {
        auto p = welch_psd(vacuum_frames[f].samples, nfft);
        for (size_t k = 0; k < nfft; ++k) psd[k] += p[k];
    }
    for (auto& p : psd) p /= static_cast<double>(use);

    const double peak = *std::max_element(psd.begin(), psd.end());
    const double floor_val = 1e-6 * peak;
    double ref = 0.0;
    for (auto& p : psd) {
        p = std::max(p, floor_val);
        ref += p;
    }
    ref /= static_cast<double>(nfft);

    WhiteningFilter wf;
    wf.nfft = nfft;
    wf.n_frames_averaged = static_cast<int>(use);
    wf.sample_rate_hz = vacuum_frames.front().sample_rate_hz;
    wf.gain.resize(nfft);
    for (size_t k = 0; k < nfft; ++k) wf.gain[k] = std::sqrt(ref / psd[k]);
    return wf;
}

SampleFrame apply_whitening(const SampleFrame& frame, const WhiteningFilter& wf) {
    if (wf.gain.empty()) throw std::invalid_argument("apply_whitening: empty filter");
    auto spec = fft(frame.samples);
    const size_t n = spec.size();
    for (size_t k = 0; k < n; ++k) {
        const size_t kk = (k * wf.nfft + n / 2) / n % wf.nfft;
        spec[k] *= wf.gain[kk];
    }
    SampleFrame out = frame;
    out.samples = ifft(spec);
    return out;
}

SampleFrame pilot_extract(const SampleFrame& frame, double pilot_freq_hz, double bw_hz) {
    const double fs = frame.sample_rate_hz;
    if (pilot_freq_hz - bw_hz / 2.0 <= 0.0 || pilot_freq_hz + bw_hz / 2.0 >= fs) {
        throw std::invalid_argument("pilot_extract: band outside the sampled range");
    }
    const size_t n = frame.samples.size();
    auto spec = fft(frame.samples);
    const double bin = fs / static_cast<double>(n);
    const long long k_lo = static_cast<long long>(std::floor((pilot_freq_hz - bw_hz / 2.0) / bin));
    const long long k_hi = static_cast<long long>(std::ceil((pilot_freq_hz + bw_hz / 2.0) / bin));
    for (long long k = 0; k < static_cast<long long>(n); ++k) {
        if (k < k_lo || k > k_hi) spec[static_cast<size_t>(k)] = cplx(0.0, 0.0);
    }
    SampleFrame out = frame;
    out.samples = ifft(spec);
    return out;
}

double find_tone(const SampleFrame& frame, double f_lo, double f_hi) {
    const size_t n = frame.samples.size();
    const double fs = frame.sample_rate_hz;
    auto spec = fft(frame.samples);
    const double bin = fs / static_cast<double>(n);
    size_t k_lo = static_cast<size_t>(std::max(0.0, std::floor(f_lo / bin)));
    size_t k_hi = static_cast<size_t>(std::min(static_cast<double>(n - 1), std::ceil(f_hi / bin)));
    if (k_lo >= k_hi) throw std::invalid_argument("find_tone: empty search band");
    size_t best = k_lo;
    double best_p = 0.0;
    for (size_t k = k_lo; k <= k_hi; ++k) {
        const double p = std::norm(spec[k]);
        if (p > best_p) {
            best_p = p;
            best = k;
        }
    }
    return static_cast<double>(best) * bin;
}

double freq_offset_fit(const SampleFrame& pilot) {
    const auto& y = pilot.samples;
    if (y.size() < 16) throw std::invalid_argument("freq_offset_fit: pilot too short");
    const double fs = pilot.sample_rate_hz;

    // Coarse per-sample rotation from the lag-1 correlator, then a linear fit
    // on the detrended unwrapped phase. Keeps the fit numerically small.
    cplx acc(0.0, 0.0);
    for (size_t i = 1; i < y.size(); ++i) acc += y[i] * std::conj(y[i - 1]);
    const double w_coarse = std::arg(acc);

    std::vector<double> ph(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
        ph[i] = std::arg(y[i] * std::polar(1.0, -w_coarse * static_cast<double>(i)));
    }
    unwrap_inplace(ph);

    const double n = static_cast<double>(ph.size());
    const double tbar = (n - 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, ybar = 0.0;
    for (double v : ph) ybar += v;
    ybar /= n;
    for (size_t i = 0; i < ph.size(); ++i) {
        const double dt = static_cast<double>(i) - tbar;
        sxy += dt * (ph[i] - ybar);
        sxx += dt * dt;
    }
    const double slope = sxy / sxx;

    double rss = 0.0;
    for (size_t i = 0; i < ph.size(); ++i) {
        const double r = ph[i] - ybar - slope * (static_cast<double>(i) - tbar);
        rss += r * r;
    }
    const double resid_rms = std::sqrt(rss / n);
    if (resid_rms > 2.0) {
        throw std::runtime_error("freq_offset_fit: unwrap failure (residual too large)");
    }
    return (w_coarse + slope) * fs / kTwoPi;
}

std::pair<std::vector<double>, RpnEstimate> ukf_phase_track(
    const SampleFrame& pilot_baseband, const PhaseTrackState& init) {
    const auto& y = pilot_baseband.samples;
    if (y.empty()) throw std::invalid_argument("ukf_phase_track: empty pilot");
    const int R = std::max(init.decimation, 1);
    const size_t nd = y.size() / static_cast<size_t>(R);
    if (nd == 0) throw std::invalid_argument("ukf_phase_track: decimation too large");

    std::vector<cplx> yd(nd);
    for (size_t k = 0; k < nd; ++k) {
        cplx s(0.0, 0.0);
        for (int j = 0; j < R; ++j) s += y[k * R + j];
        yd[k] = s / static_cast<double>(R);
    }

    double amp = init.amplitude, nvar = init.meas_var_r / R;
    if (amp <= 0.0) tone_moments(yd, amp, nvar);

    const double q = init.process_var_q * R;
    const double r = nvar;

    // Scalar-state unscented filter, Wan-Merwe weights.
    const double n_dim = 1.0;
    const double lam = init.sigma_alpha * init.sigma_alpha * (n_dim + init.sigma_kappa) - n_dim;
    const double cc = n_dim + lam;
    const double wm0 = lam / cc, wmi = 0.5 / cc;
    const double wc0 = wm0 + (1.0 - init.sigma_alpha * init.sigma_alpha + init.sigma_beta);

    double th = init.theta_hat;
    double p = init.p_cov;
    std::vector<double> th_d(nd);
    for (size_t k = 0; k < nd; ++k) {
        const double pp = p + q;
        const double s = std::sqrt(cc * pp);
        const double sg[3] = {th, th + s, th - s};
        double zr[3], zi[3];
        for (int i = 0; i < 3; ++i) {
            zr[i] = amp * std::cos(sg[i]);
            zi[i] = amp * std::sin(sg[i]);
        }
        const double zmr = wm0 * zr[0] + wmi * (zr[1] + zr[2]);
        const double zmi = wm0 * zi[0] + wmi * (zi[1] + zi[2]);
        double prr = r, pii = r, pri = 0.0, pxr = 0.0, pxi = 0.0;
        const double w[3] = {wc0, wmi, wmi};
        for (int i = 0; i < 3; ++i) {
            const double dr = zr[i] - zmr, di = zi[i] - zmi, dx = sg[i] - th;
            prr += w[i] * dr * dr;
            pii += w[i] * di * di;
            pri += w[i] * dr * di;
            pxr += w[i] * dx * dr;
            pxi += w[i] * dx * di;
        }
        const double det = prr * pii - pri * pri;
        const double kr = (pxr * pii - pxi * pri) / det;
        const double ki = (pxi * prr - pxr * pri) / det;
        th += kr * (yd[k].real() - zmr) + ki * (yd[k].imag() - zmi);
        p = pp - (kr * (kr * prr + ki * pri) + ki * (kr * pri + ki * pii));
        if (!(p > 0.0)) p = 1e-12;
        if (p > init.p_ceiling) {
            throw std::runtime_error("ukf_phase_track: divergence (covariance ceiling)");
        }
        th_d[k] = th;
    }

    std::vector<double> out(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
        out[i] = th_d[std::min(i / static_cast<size_t>(R), nd - 1)];
    }

    RpnEstimate rpn;
    rpn.v_rpn = p;  // steady-state posterior variance as the self-reference proxy
    return {std::move(out), rpn};
}

std::vector<double> raw_pilot_phase(const SampleFrame& pilot_baseband, int decimation) {
    const auto& y = pilot_baseband.samples;
    const int R = std::max(decimation, 1);
    const size_t nd = y.size() / static_cast<size_t>(R);
    std::vector<double> ph(nd);
    for (size_t k = 0; k < nd; ++k) {
        cplx s(0.0, 0.0);
        for (int j = 0; j < R; ++j) s += y[k * R + j];
        ph[k] = std::arg(s);
    }
    unwrap_inplace(ph);
    std::vector<double> out(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
        out[i] = ph[std::min(i / static_cast<size_t>(R), nd - 1)];
    }
    return out;
}

RecoverResult recover_symbols(const SampleFrame& frame, const WhiteningFilter& wf,
                              const CalibrationRecord& cal,
                              const ModulationConfig& cfg,
                              const SymbolFrame& tx_reference, const RxParams& rxp,
                              double combined_linewidth_hz,
                              const std::vector<double>* phase_override) {
    cfg.validate();
    const double fs = cfg.sample_rate_hz;
    const int sps = cfg.samples_per_symbol();

    RecoverResult res;

    // Whiten, then rescale into SNU (calibration taken on whitened data).
    SampleFrame wh = apply_whitening(frame, wf);
    const double snu = 1.0 / std::sqrt(cal.snu_scale);
    for (auto& z : wh.samples) z *= snu;
    wh.unit = FrameUnit::snu_normalized;

    const size_t n = wh.samples.size();
    std::vector<cplx> bb(n);

    if (phase_override) {
        if (phase_override->size() != n) {
            throw std::invalid_argument("recover_symbols: phase override length mismatch");
        }
        const double wc = kTwoPi * cfg.signal_center_hz / fs;
        for (size_t i = 0; i < n; ++i) {
            const double ph = (*phase_override)[i] + wc * static_cast<double>(i);
            bb[i] = wh.samples[i] * std::polar(1.0, -ph);
        }
        res.freq_offset_hz = 0.0;
        res.v_rpn = 0.0;
    } else {
        // Pilot: coarse search around the nominal beat, brick-wall extraction,
        // linear-fit frequency, Kalman phase.
        const double expect = cfg.pilot_freq_hz + rxp.offset_nominal_hz;
        const double f_peak = find_tone(wh, expect - rxp.search_bw_hz / 2.0,
                                        expect + rxp.search_bw_hz / 2.0);
        SampleFrame pilot = pilot_extract(wh, f_peak, rxp.pilot_bw_hz);
        const double f_pilot = freq_offset_fit(pilot);
        res.freq_offset_hz = f_pilot - cfg.pilot_freq_hz;

        const double wp = kTwoPi * f_pilot / fs;
        for (size_t i = 0; i < n; ++i) {
            pilot.samples[i] *= std::polar(1.0, -wp * static_cast<double>(i));
        }

        PhaseTrackState st;
        st.decimation = static_cast<int>(std::lround(fs / rxp.pilot_bw_hz));
        st.process_var_q = kTwoPi * std::max(combined_linewidth_hz, 1.0) / fs * rxp.ukf_q_scale;
        st.meas_var_r = 1.0;  // post-whitening broadband floor per quadrature
        st.p_ceiling = rxp.p_ceiling;
        auto [theta, rpn] = ukf_phase_track(pilot, st);
        res.v_rpn = rpn.v_rpn;

        // Quantum band sits a known spacing below the pilot.
        const double f_sig = f_pilot - (cfg.pilot_freq_hz - cfg.signal_center_hz);
        const double ws = kTwoPi * f_sig / fs;
        for (size_t i = 0; i < n; ++i) {
            bb[i] = wh.samples[i] *
                    std::polar(1.0, -(ws * static_cast<double>(i) + theta[i]));
        }
    }

    // Delay sync: correlate against the pulse-shaped public reference prefix.
    const size_t nref = std::min(rxp.sync_symbols, tx_reference.symbols.size());
    if (nref < 100) throw std::invalid_argument("recover_symbols: reference too short");
    const auto h = rrc_taps(cfg.rrc_rolloff, cfg.rrc_span_symbols, sps);
    const int nh = static_cast<int>(h.size());
    const int half = nh / 2;

    const size_t ref_len = nref * static_cast<size_t>(sps) + static_cast<size_t>(nh);
    std::vector<cplx> ref_wave(ref_len, cplx(0.0, 0.0));
    for (size_t k = 0; k < nref; ++k) {
        const cplx a = tx_reference.symbols[k];
        const size_t base = k * static_cast<size_t>(sps);
        for (int j = 0; j < nh; ++j) ref_wave[base + j] += a * h[j];
    }

    // ref_wave is the transmit pulse train advanced by half a filter span, so
    // a channel delay D peaks the correlation at lag D - half. Negative lags
    // (zero-delay loopback) wrap around the circular correlation.
    const long long max_d = std::max<long long>(rxp.max_delay_samples, 0);
    const size_t win = std::min<size_t>(n, ref_len + static_cast<size_t>(max_d) + nh);
    size_t m = 1;
    while (m < win + ref_len) m <<= 1;
    std::vector<cplx> fa(m, cplx(0, 0)), fb(m, cplx(0, 0));
    std::copy(bb.begin(), bb.begin() + static_cast<long long>(win), fa.begin());
    std::copy(ref_wave.begin(), ref_wave.end(), fb.begin());
    auto corr = xcorr_fft(fa, fb);  // corr[d] = sum_n fa[n] conj(fb[n-d])

    auto lag_at = [&](long long dd) {
        return std::abs(corr[static_cast<size_t>((dd % static_cast<long long>(m) +
                                                  static_cast<long long>(m)) %
                                                 static_cast<long long>(m))]);
    };
    double peak = 0.0, pwr = 0.0;
    long long lag_best = -nh;
    long long count = 0;
    for (long long dd = -nh; dd <= max_d - half; ++dd, ++count) {
        const double v = lag_at(dd);
        pwr += v * v;
        if (v > peak) {
            peak = v;
            lag_best = dd;
        }
    }
    const double rms = std::sqrt(pwr / static_cast<double>(std::max<long long>(count, 1)));
    res.sync_ok = rms > 0.0 && peak > rxp.sync_threshold * rms;
    if (!res.sync_ok) return res;

    // Parabolic refinement of the peak for the fractional-sample residual.
    const double ym = lag_at(lag_best - 1), y0 = lag_at(lag_best), yp = lag_at(lag_best + 1);
    double frac = 0.0;
    const double den = ym - 2.0 * y0 + yp;
    if (std::abs(den) > 1e-12) frac = std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
    res.delay_samples = lag_best + half;  // physical channel delay
    res.delay_frac = frac;

    // Fractional correction as a spectral phase ramp (exact for band-limited
    // content), then matched filtering on the integer grid.
    if (std::abs(frac) > 0.02) {
        auto spec = fft(bb);
        const size_t nn = spec.size();
        for (size_t k = 0; k < nn; ++k) {
            const double kf = (k < nn / 2) ? static_cast<double>(k)
                                           : static_cast<double>(k) - static_cast<double>(nn);
            spec[k] *= std::polar(1.0, kTwoPi * kf * frac / static_cast<double>(nn));
        }
        bb = ifft(spec);
    }

    // y_k = sum_j h[j] bb[lag_best + k*sps + j]; guard the frame edges.
    const size_t n_avail =
        (static_cast<long long>(n) > lag_best + nh)
            ? static_cast<size_t>((static_cast<long long>(n) - lag_best - nh)) /
                  static_cast<size_t>(sps)
            : 0;
    res.symbols.baud_rate_hz = cfg.baud_rate_hz;
    res.symbols.symbols.resize(n_avail);
    for (size_t k = 0; k < n_avail; ++k) {
        const long long base = lag_best + static_cast<long long>(k) * sps;
        cplx acc(0.0, 0.0);
        const int j0 = base < 0 ? static_cast<int>(-base) : 0;
        for (int j = j0; j < nh; ++j) {
            acc += h[j] * bb[static_cast<size_t>(base + j)];
        }
        res.symbols.symbols[k] = acc;
    }
    return res;
}

}  // namespace cvqkd
