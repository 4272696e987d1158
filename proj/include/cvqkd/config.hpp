#pragma once

#include <string>

#include "cvqkd/channel.hpp"
#include "cvqkd/rxdsp.hpp"
#include "cvqkd/security.hpp"

namespace cvqkd {

/// Every knob of a run, grouped as in the config file sections. The
/// zero-argument "table1" preset mirrors the reference experiment; "quick"
/// scales the frames down for fast closed-loop runs.
struct RunConfig {
    // [run]
    uint64_t seed = 1;
    int n_frames = 10;
    long long samples_per_frame = 100000;
    int workers = 4;

    ModulationConfig tx;       // [tx]
    ChannelParams channel;     // [channel]
    DetectorModel detector;    // [detector]
    RxParams rx;               // [rx]
    int whitening_frames = 10;
    size_t whitening_nfft = 4096;

    // [estimation]
    double delta_fail = 1e-10;

    SecurityParams security;   // [security]

    // [reconciliation]
    bool recon_enabled = true;
    int recon_dimension = 8;
    int recon_code_n = 16000;
    uint64_t recon_code_seed = 7;
    double recon_target_rate = 0.0;  // 0: base rate
    int recon_max_iters = 300;
    int recon_max_blocks = 64;

    void validate() const;
};

RunConfig preset_table1();
RunConfig preset_quick();

/// key = value sections ([run], [tx], [channel], [detector], [rx],
/// [estimation], [security], [reconciliation]); '#' starts a comment.
RunConfig load_config(const std::string& path);
void apply_config_text(RunConfig& cfg, const std::string& text);
std::string dump_config(const RunConfig& cfg);

}  // namespace cvqkd
