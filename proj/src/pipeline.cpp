#include "cvqkd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <sstream>

#include "cvqkd/fft.hpp"
#include "cvqkd/rng.hpp"
#include "cvqkd/toeplitz.hpp"

namespace cvqkd {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        f << text;
    }
    fs::rename(tmp, p);
}

// Per-frame products of the streaming pipeline.
struct FrameOut {
    FrameReport report;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;  // pooled LS accumulators
    long long n = 0;
    LinkEstimate frame_est;
    SymbolFrame tx_key, rx_key;  // non-reference symbols for reconciliation
    bool ok = false;
};

struct VacuumStats {
    WhiteningFilter wf;
    CalibrationRecord cal;
};

SampleFrame synth_frame(const RunConfig& cfg, uint64_t frame_id, SymbolFrame& sym_out) {
    const size_t nsym = static_cast<size_t>(cfg.samples_per_frame) /
                        static_cast<size_t>(cfg.tx.samples_per_symbol());
    sym_out = generate_symbols(nsym, cfg.tx, cfg.seed, frame_id);
    auto wave = synthesize_waveform(sym_out, cfg.tx);
    if (cfg.tx.dac_bits > 0) {
        const double amp = cfg.tx.resolved_pilot_amplitude();
        const double fs = 8.0 * std::sqrt(cfg.tx.v_mod / cfg.tx.samples_per_symbol() +
                                          amp * amp / 2.0);
        wave = dac_quantize(wave, cfg.tx.dac_bits, fs).frame;
        wave.unit = FrameUnit::snu_normalized;
    }
    wave.frame_id = static_cast<uint32_t>(frame_id);
    return wave;
}

VacuumStats calibrate_receiver(const RunConfig& cfg) {
    // Vacuum and electronic runs, streamed one frame at a time. The whitening
    // filter comes from the averaged vacuum periodogram; the SNU scale from
    // whitened vacuum/electronic variances.
    const int nf = std::max(cfg.whitening_frames, 2);
    const size_t nfft = cfg.whitening_nfft;
    std::vector<double> psd(nfft, 0.0);
    std::vector<SampleFrame> first_two;

    SampleFrame zero;
    zero.sample_rate_hz = cfg.tx.sample_rate_hz;
    zero.unit = FrameUnit::snu_normalized;
    zero.samples.assign(static_cast<size_t>(cfg.samples_per_frame), cplx(0.0, 0.0));

    ChannelParams chv = cfg.channel;
    chv.xi_injected = NoiseBudget{};

    for (int f = 0; f < nf; ++f) {
        auto [rx, tr] = propagate(zero, chv, cfg.detector, cfg.seed + 1,
                                  static_cast<uint64_t>(f));
        (void)tr;
        auto p = welch_psd(rx.samples, nfft);
        for (size_t k = 0; k < nfft; ++k) psd[k] += p[k];
        if (f < 2) first_two.push_back(std::move(rx));
    }

    VacuumStats st;
    st.wf.nfft = nfft;
    st.wf.n_frames_averaged = nf;
    st.wf.sample_rate_hz = cfg.tx.sample_rate_hz;
    st.wf.gain.resize(nfft);
    const double peak = *std::max_element(psd.begin(), psd.end()) / nf;
    double ref = 0.0;
    std::vector<double> avg(nfft);
    for (size_t k = 0; k < nfft; ++k) {
        avg[k] = std::max(psd[k] / nf, 1e-6 * peak);
        ref += avg[k];
    }
    ref /= static_cast<double>(nfft);
    for (size_t k = 0; k < nfft; ++k) st.wf.gain[k] = std::sqrt(ref / avg[k]);

    // Whitened variances for the calibration record.
    double vac_var = 0.0;
    for (auto& fr : first_two) {
        vac_var += quadrature_variance(apply_whitening(fr, st.wf).samples);
    }
    vac_var /= static_cast<double>(first_two.size());

    double ele_var = 0.0;
    const int ne = 2;
    for (int f = 0; f < ne; ++f) {
        SampleFrame e = zero;
        auto rng = CounterRng::derive(cfg.seed + 2, static_cast<uint64_t>(f), 5);
        const double s = std::sqrt(cfg.detector.t_noise / 2.0);
        for (auto& z : e.samples) z = cplx(s * rng.next_normal(), s * rng.next_normal());
        ele_var += quadrature_variance(apply_whitening(e, st.wf).samples);
    }
    ele_var /= ne;

    st.cal.vacuum_variance = vac_var;
    st.cal.electronic_variance = ele_var;
    st.cal.snu_scale = vac_var - ele_var;
    st.cal.clearance_db = 10.0 * std::log10(vac_var / std::max(ele_var, 1e-30));
    if (st.cal.snu_scale <= 0.0) {
        throw std::runtime_error("calibrate_receiver: vacuum below electronic level");
    }
    return st;
}

FrameOut process_frame(const RunConfig& cfg, const VacuumStats& st, uint64_t frame_id) {
    FrameOut out;
    SymbolFrame tx;
    auto wave = synth_frame(cfg, frame_id, tx);
    auto [rx, trace] = propagate(wave, cfg.channel, cfg.detector, cfg.seed, frame_id);
    (void)trace;

    SymbolFrame ref;
    ref.baud_rate_hz = tx.baud_rate_hz;
    const size_t nref = std::min(cfg.rx.sync_symbols, tx.symbols.size());
    ref.symbols.assign(tx.symbols.begin(), tx.symbols.begin() + static_cast<long long>(nref));

    auto rec = recover_symbols(rx, st.wf, st.cal, cfg.tx, ref, cfg.rx,
                               cfg.channel.combined_linewidth_hz());
    out.report.frame_id = static_cast<uint32_t>(frame_id);
    out.report.freq_offset_hz = rec.freq_offset_hz;
    out.report.delay = rec.delay_samples;
    out.report.v_rpn = rec.v_rpn;
    out.report.sync_ok = rec.sync_ok;
    if (!rec.sync_ok) return out;

    const size_t n = std::min(tx.symbols.size(), rec.symbols.symbols.size());
    if (n <= nref) return out;

    for (size_t i = 0; i < n; ++i) {
        const cplx x = tx.symbols[i];
        const cplx y = rec.symbols.symbols[i];
        out.sxy += (std::conj(x) * y).real();
        out.sxx += std::norm(x);
        out.syy += std::norm(y);
    }
    out.n = static_cast<long long>(n);

    SymbolFrame txf, rxf;
    txf.symbols.assign(tx.symbols.begin(), tx.symbols.begin() + static_cast<long long>(n));
    rxf.symbols.assign(rec.symbols.symbols.begin(),
                       rec.symbols.symbols.begin() + static_cast<long long>(n));
    out.frame_est = estimate_link(txf, rxf, cfg.detector, cfg.tx.v_mod);
    out.frame_est.delta_fail = cfg.delta_fail;
    out.report.xi_hat = out.frame_est.xi_hat;

    out.tx_key.symbols.assign(tx.symbols.begin() + static_cast<long long>(nref),
                              tx.symbols.begin() + static_cast<long long>(n));
    out.rx_key.symbols.assign(rec.symbols.symbols.begin() + static_cast<long long>(nref),
                              rec.symbols.symbols.begin() + static_cast<long long>(n));
    out.ok = true;
    return out;
}

LinkEstimate pooled_estimate(const RunConfig& cfg, double sxy, double sxx, double syy,
                             long long n) {
    LinkEstimate est;
    est.n_used = n;
    est.v_mod = cfg.tx.v_mod;
    est.tau = cfg.detector.tau;
    est.t_noise = cfg.detector.t_noise;
    const double g = sxy / sxx;
    est.eta_hat = g * g / cfg.detector.tau;
    est.resid_var = (syy - 2.0 * g * sxy + g * g * sxx) / (2.0 * static_cast<double>(n));
    const double denom = cfg.detector.tau * est.eta_hat / 2.0;
    est.xi_hat = denom > 0.0
                     ? (est.resid_var - 1.0 - cfg.detector.t_noise / 2.0) / denom
                     : 0.0;
    est.delta_fail = cfg.delta_fail;
    return est;
}

}  // namespace

const std::vector<BetaFerPoint>& reference_beta_fer_points() {
    static const std::vector<BetaFerPoint> pts = {
        {7.50, 0.935, 0.95},
        {8.11, 0.930, 0.80},
        {8.41, 0.925, 0.59},
        {9.27, 0.900, 0.70},
    };
    return pts;
}

RunResult run_experiment(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);

    RunResult res;
    res.out_dir = out_dir;

    const auto st = calibrate_receiver(cfg);

    // Frame-parallel processing with deterministic in-order merging.
    std::vector<FrameOut> outs(static_cast<size_t>(cfg.n_frames));
    const int workers = std::max(cfg.workers, 1);
    std::atomic<int> next{0};
    std::vector<std::future<void>> pool;
    for (int w = 0; w < workers; ++w) {
        pool.push_back(std::async(std::launch::async, [&]() {
            for (;;) {
                const int f = next.fetch_add(1);
                if (f >= cfg.n_frames) return;
                outs[static_cast<size_t>(f)] =
                    process_frame(cfg, st, static_cast<uint64_t>(f));
            }
        }));
    }
    for (auto& p : pool) p.get();

    double sxy = 0, sxx = 0, syy = 0;
    long long n_pairs = 0, n_key = 0;
    std::vector<LinkEstimate> frame_ests;
    SymbolFrame tx_all, rx_all;
    for (auto& o : outs) {
        res.frames.push_back(o.report);
        if (!o.ok) {
            ++res.frames_dropped;
            continue;
        }
        sxy += o.sxy;
        sxx += o.sxx;
        syy += o.syy;
        n_pairs += o.n;
        n_key += static_cast<long long>(o.tx_key.symbols.size());
        frame_ests.push_back(o.frame_est);
        if (cfg.recon_enabled) {
            tx_all.symbols.insert(tx_all.symbols.end(), o.tx_key.symbols.begin(),
                                  o.tx_key.symbols.end());
            rx_all.symbols.insert(rx_all.symbols.end(), o.rx_key.symbols.begin(),
                                  o.rx_key.symbols.end());
        }
    }
    if (n_pairs < 1000) {
        throw std::runtime_error("run_experiment: too few recovered symbols (sync failures?)");
    }

    res.n_pairs = n_pairs;
    res.n_key_symbols = n_key;
    res.link = pooled_estimate(cfg, sxy, sxx, syy, n_pairs);

    // Reconciliation on the non-reference stream.
    SecurityParams sec = cfg.security;
    sec.delta_fail = cfg.delta_fail;
    ReconResult recon;
    long long converged_symbols = 0;
    if (cfg.recon_enabled && !tx_all.symbols.empty()) {
        auto code = met_construct(cfg.recon_code_n, demo_met_table_rate005(),
                                  cfg.recon_code_seed);
        if (cfg.recon_target_rate > 0.0) {
            code = rate_adapt(code, cfg.recon_target_rate, cfg.seed);
        }
        ReconConfig rc;
        rc.dimension = cfg.recon_dimension;
        rc.max_bp_iters = cfg.recon_max_iters;
        rc.seed = cfg.seed ^ 0xB0B;
        // Bound the work: cap the number of codewords.
        const size_t dims_per_block = static_cast<size_t>(code.n - code.n_punctured());
        const size_t max_syms =
            std::min(tx_all.symbols.size(),
                     dims_per_block * static_cast<size_t>(cfg.recon_max_blocks) / 2 +
                         dims_per_block);
        SymbolFrame txr, rxr;
        txr.symbols.assign(tx_all.symbols.begin(),
                           tx_all.symbols.begin() + static_cast<long long>(max_syms));
        rxr.symbols.assign(rx_all.symbols.begin(),
                           rx_all.symbols.begin() + static_cast<long long>(max_syms));
        recon = reconcile_streams(txr, rxr, code, rc);
        if (recon.blocks > 0) {
            res.beta_measured = recon.beta;
            res.fer_measured = recon.fer;
            res.snr_measured = recon.snr_hat;
            sec.beta = recon.beta;
            sec.fer = recon.fer;
            converged_symbols = static_cast<long long>(
                (static_cast<size_t>(recon.blocks - recon.failures) * dims_per_block) / 2);
        }
    }

    if (sec.n_block <= 0) {
        sec.n_block = static_cast<long long>(static_cast<double>(n_key) * (1.0 - sec.fer));
        if (sec.n_block <= 10000) sec.n_block = std::max<long long>(n_key, 10001);
    }

    LinkEstimate wc = res.link;
    if (sec.split_delta) wc.delta_fail = sec.delta_fail / 2.0;
    wc = worst_case_bounds(wc);
    res.link = wc;

    res.asymptotic = secret_key_rate(wc, sec, cfg.tx.v_mod, RateMode::asymptotic);
    res.finite = secret_key_rate(wc, sec, cfg.tx.v_mod, RateMode::finite);

    // Final key: extract at the finite-size margin over converged symbols.
    std::vector<uint8_t> final_key;
    if (cfg.recon_enabled && !recon.key_bits.empty() && !res.finite.negative_rate) {
        const double margin = sec.beta * res.finite.i_ab - res.finite.chi_e -
                              res.finite.delta_n;
        const long long want = static_cast<long long>(
            std::floor(std::max(margin, 0.0) * static_cast<double>(converged_symbols)));
        const size_t out_len = static_cast<size_t>(
            std::min<long long>(want, static_cast<long long>(recon.key_bits.size())));
        if (out_len > 0) {
            auto rng = CounterRng(cfg.seed, 0x9A5);
            std::vector<uint8_t> seed_bits(recon.key_bits.size() + out_len - 1);
            for (auto& b : seed_bits) b = static_cast<uint8_t>(rng.next_u64() & 1);
            final_key = toeplitz_extract(recon.key_bits, seed_bits, out_len);
        }
    }
    res.key_bits = static_cast<long long>(final_key.size());

    // ---- reports ----
    {
        std::ostringstream os;
        os << "frame_id,freq_offset_hz,delay,v_rpn,sync_ok\n";
        for (const auto& r : res.frames) {
            os << r.frame_id << ',' << fmt(r.freq_offset_hz) << ',' << r.delay << ','
               << fmt(r.v_rpn) << ',' << (r.sync_ok ? 1 : 0) << '\n';
        }
        write_text(fs::path(out_dir) / "dsp_report.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "n_frames,xi_cum_msnu,xi_up_msnu\n";
        if (!frame_ests.empty()) {
            for (auto& fe : frame_ests) {
                if (sec.split_delta) fe.delta_fail = sec.delta_fail / 2.0;
            }
            for (const auto& pt : cumulative_noise_trace(frame_ests)) {
                os << pt.n_frames << ',' << fmt(pt.xi_cum * 1e3) << ','
                   << fmt(pt.xi_up_cum * 1e3) << '\n';
            }
        }
        write_text(fs::path(out_dir) / "noise_trace.csv", os.str());
    }
    {
        std::ostringstream os;
        os << "name,value\n";
        os << "eta_true," << fmt(cfg.channel.eta()) << '\n';
        os << "eta_hat," << fmt(res.link.eta_hat) << '\n';
        os << "eta_low," << fmt(res.link.eta_low) << '\n';
        os << "xi_hat_msnu," << fmt(res.link.xi_hat * 1e3) << '\n';
        os << "xi_up_msnu," << fmt(res.link.xi_up * 1e3) << '\n';
        os << "n_pairs," << res.n_pairs << '\n';
        os << "n_key_symbols," << res.n_key_symbols << '\n';
        os << "frames_dropped," << res.frames_dropped << '\n';
        os << "beta," << fmt(sec.beta) << '\n';
        os << "fer," << fmt(sec.fer) << '\n';
        os << "snr_measured," << fmt(res.snr_measured) << '\n';
        os << "i_ab," << fmt(res.finite.i_ab) << '\n';
        os << "chi_e," << fmt(res.finite.chi_e) << '\n';
        os << "delta_n," << fmt(res.finite.delta_n) << '\n';
        os << "skr_asymptotic_bps," << fmt(res.asymptotic.skr_asymptotic_bps) << '\n';
        os << "skr_finite_bps," << fmt(res.finite.skr_finite_bps) << '\n';
        os << "negative_rate," << (res.finite.negative_rate ? 1 : 0) << '\n';
        os << "key_bits," << res.key_bits << '\n';
        write_text(fs::path(out_dir) / "summary.csv", os.str());
    }
    {
        std::ofstream f(fs::path(out_dir) / "key.bin", std::ios::binary);
        uint8_t byte = 0;
        int nb = 0;
        for (size_t i = 0; i < final_key.size(); ++i) {
            byte = static_cast<uint8_t>((byte << 1) | final_key[i]);
            if (++nb == 8) {
                f.put(static_cast<char>(byte));
                byte = 0;
                nb = 0;
            }
        }
        if (nb > 0) f.put(static_cast<char>(byte << (8 - nb)));
    }
    {
        std::ostringstream os;
        os << "# run manifest\n";
        os << "status = complete\n";
        os << "clearance_db = " << fmt(st.cal.clearance_db) << '\n';
        os << "snu_scale = " << fmt(st.cal.snu_scale) << '\n';
        os << '\n' << dump_config(cfg);
        write_text(fs::path(out_dir) / "manifest.txt", os.str());
    }
    return res;
}

SweepAxis parse_axis(const std::string& name) {
    if (name == "distance") return SweepAxis::distance;
    if (name == "v_mod" || name == "vmod") return SweepAxis::v_mod;
    if (name == "pilot_snr") return SweepAxis::pilot_snr;
    if (name == "linewidth") return SweepAxis::linewidth;
    throw std::invalid_argument("unknown sweep axis: " + name);
}

namespace {

LinkEstimate formula_link(const RunConfig& cfg) {
    LinkEstimate link;
    link.v_mod = cfg.tx.v_mod;
    link.tau = cfg.detector.tau;
    link.t_noise = cfg.detector.t_noise;
    link.eta_hat = cfg.channel.eta();
    link.xi_hat = cfg.channel.xi_injected.total();
    const size_t nsym = static_cast<size_t>(cfg.samples_per_frame) /
                        static_cast<size_t>(cfg.tx.samples_per_symbol());
    link.n_used = static_cast<long long>(nsym) * cfg.n_frames;
    link.resid_var = 1.0 + link.t_noise / 2.0 +
                     link.tau * link.eta_hat * link.xi_hat / 2.0;
    link.delta_fail = cfg.delta_fail;
    return link;
}

std::string point_csv_line(const RunConfig& cfg, SweepAxis axis, double value) {
    RunConfig c = cfg;
    SecurityParams sec = c.security;
    sec.delta_fail = c.delta_fail;
    switch (axis) {
        case SweepAxis::distance: {
            c.channel.length_km = value;
            LinkEstimate link = formula_link(c);
            if (sec.split_delta) link.delta_fail = sec.delta_fail / 2.0;
            LinkEstimate wc = worst_case_bounds(link);
            sec.n_block = static_cast<long long>(
                static_cast<double>(link.n_used) * (1.0 - sec.fer));
            const auto asy = secret_key_rate(wc, sec, c.tx.v_mod, RateMode::asymptotic);
            const auto fin = secret_key_rate(wc, sec, c.tx.v_mod, RateMode::finite);
            const double fin_signed =
                sec.baud_hz * (1.0 - sec.fer) *
                (sec.beta * fin.i_ab - fin.chi_e - fin.delta_n);
            return fmt(value) + "," + fmt(asy.skr_asymptotic_bps) + "," +
                   fmt(std::max(fin_signed, 0.0)) + "," + fmt(fin_signed);
        }
        case SweepAxis::v_mod: {
            c.tx.v_mod = value;
            LinkEstimate link = formula_link(c);
            const auto& pts = reference_beta_fer_points();
            auto interp = [&pts](double vm, bool beta) {
                if (vm <= pts.front().v_mod)
                    return beta ? pts.front().beta : pts.front().fer;
                if (vm >= pts.back().v_mod) return beta ? pts.back().beta : pts.back().fer;
                for (size_t i = 1; i < pts.size(); ++i) {
                    if (vm <= pts[i].v_mod) {
                        const double w = (vm - pts[i - 1].v_mod) /
                                         (pts[i].v_mod - pts[i - 1].v_mod);
                        const double a = beta ? pts[i - 1].beta : pts[i - 1].fer;
                        const double b = beta ? pts[i].beta : pts[i].fer;
                        return a + w * (b - a);
                    }
                }
                return beta ? pts.back().beta : pts.back().fer;
            };
            sec.beta = interp(value, true);
            sec.fer = interp(value, false);
            const auto rep = secret_key_rate(link, sec, value, RateMode::asymptotic);
            return fmt(value) + "," + fmt(sec.beta) + "," + fmt(sec.fer) + "," +
                   fmt(rep.skr_asymptotic_bps);
        }
        case SweepAxis::pilot_snr:
        case SweepAxis::linewidth: {
            // Quick-scale closed-loop simulation per point.
            if (axis == SweepAxis::pilot_snr) {
                // value in dB relative to the default pilot level
                c.tx.pilot_amplitude = c.tx.resolved_pilot_amplitude() *
                                       std::pow(10.0, (value - 20.0) / 20.0);
            } else {
                c.channel.linewidth_tx_hz = value / 2.0;
                c.channel.linewidth_rx_hz = value / 2.0;
            }
            c.recon_enabled = false;
            const std::string tmp = (fs::temp_directory_path() /
                                     ("cvqkd_pt_" + std::to_string(cfg.seed) + "_" +
                                      fmt(value)))
                                        .string();
            auto r = run_experiment(c, tmp);
            double vrpn = 0.0;
            int cnt = 0;
            for (const auto& fr : r.frames) {
                if (fr.sync_ok) {
                    vrpn += fr.v_rpn;
                    ++cnt;
                }
            }
            if (cnt > 0) vrpn /= cnt;
            return fmt(value) + "," + fmt(vrpn) + "," + fmt(r.link.xi_hat * 1e3) + "," +
                   fmt(r.finite.skr_finite_bps);
        }
    }
    return "";
}

}  // namespace

std::string sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& grid,
                  const std::string& out_dir) {
    fs::create_directories(fs::path(out_dir) / "points");
    const char* name = axis == SweepAxis::distance  ? "skr_vs_distance"
                       : axis == SweepAxis::v_mod   ? "vmod_sweep"
                       : axis == SweepAxis::pilot_snr ? "pilot_sweep"
                                                      : "linewidth_sweep";
    const char* header = axis == SweepAxis::distance
                             ? "distance_km,skr_asym_bps,skr_finite_bps,skr_finite_signed_bps"
                         : axis == SweepAxis::v_mod
                             ? "v_mod,beta,fer,skr"
                             : "value,v_rpn,xi_hat_msnu,skr_finite_bps";

    std::vector<std::string> rows;
    for (double v : grid) {
        const fs::path pf = fs::path(out_dir) / "points" /
                            (std::string(name) + "_" + fmt(v) + ".csv");
        std::string line;
        if (fs::exists(pf)) {
            std::ifstream f(pf);
            std::getline(f, line);
        }
        if (line.empty()) {
            try {
                line = point_csv_line(cfg, axis, v);
            } catch (const std::exception& e) {
                line = fmt(v) + ",error," + e.what();
            }
            write_text(pf, line);
        }
        rows.push_back(line);
    }

    std::ostringstream os;
    os << header << '\n';
    for (const auto& r : rows) os << r << '\n';
    const fs::path outcsv = fs::path(out_dir) / (std::string(name) + ".csv");
    write_text(outcsv, os.str());
    return outcsv.string();
}

}  // namespace cvqkd
