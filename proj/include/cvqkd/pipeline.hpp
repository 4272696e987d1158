#pragma once

#include <optional>
#include <string>

#include "cvqkd/config.hpp"
#include "cvqkd/recon.hpp"

namespace cvqkd {

struct FrameReport {
    uint32_t frame_id = 0;
    double freq_offset_hz = 0.0;
    long long delay = 0;
    double v_rpn = 0.0;
    bool sync_ok = false;
    double xi_hat = 0.0;
};

struct RunResult {
    LinkEstimate link;            // pooled, worst-case bounds filled
    SecurityReport finite;
    SecurityReport asymptotic;
    std::vector<FrameReport> frames;
    int frames_dropped = 0;
    long long n_pairs = 0;        // aligned symbol pairs used for estimation
    long long n_key_symbols = 0;  // pairs excluding the public reference
    double beta_measured = 0.0;
    double fer_measured = 0.0;
    double snr_measured = 0.0;
    long long key_bits = 0;       // final key length after extraction
    std::string out_dir;
};

/// Full chain: simulate -> DSP -> estimate -> reconcile -> rate -> reports.
/// Writes summary.csv, dsp_report.csv, noise_trace.csv, key.bin and
/// manifest.txt under out_dir (created if missing).
RunResult run_experiment(const RunConfig& cfg, const std::string& out_dir);

enum class SweepAxis { distance, v_mod, pilot_snr, linewidth };

SweepAxis parse_axis(const std::string& name);

/// Grid sweep with per-point on-disk resume. distance / v_mod points go
/// through the security formulas; pilot_snr / linewidth points run the
/// quick-scale simulation. Returns the path of the assembled CSV.
std::string sweep(const RunConfig& cfg, SweepAxis axis,
                  const std::vector<double>& grid, const std::string& out_dir);

/// Reference (v_mod, beta, FER) operating points used by the v_mod sweep.
struct BetaFerPoint {
    double v_mod, beta, fer;
};
const std::vector<BetaFerPoint>& reference_beta_fer_points();

}  // namespace cvqkd
