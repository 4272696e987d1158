#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cvqkd/channel.hpp"
#include "cvqkd/pipeline.hpp"
#include "cvqkd/snu.hpp"

namespace fs = std::filesystem;

namespace {

cvqkd::RunConfig build_config(const std::string& preset, const std::string& config_path,
                              uint64_t seed, bool seed_set) {
    cvqkd::RunConfig cfg;
    if (preset == "table1") {
        cfg = cvqkd::preset_table1();
    } else if (preset == "quick") {
        cfg = cvqkd::preset_quick();
    } else if (!preset.empty()) {
        throw std::invalid_argument("unknown preset: " + preset);
    }
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw std::runtime_error("cannot open config " + config_path);
        std::stringstream ss;
        ss << f.rdbuf();
        cvqkd::apply_config_text(cfg, ss.str());
    }
    if (seed_set) cfg.seed = seed;
    return cfg;
}

std::vector<double> parse_grid(const std::string& grid) {
    std::vector<double> out;
    std::stringstream ss(grid);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Software twin of a long-distance local-LO CV-QKD link"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir = "out", axis_name = "distance", grid_str;
    uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("--config", config_path, "config file (key = value sections)");
    app.add_option("--preset", preset, "table1 | quick")->check(CLI::IsMember({"table1", "quick"}));
    app.add_option_function<uint64_t>(
        "--seed", [&](uint64_t s) { seed = s; seed_set = true; }, "RNG seed");
    app.add_option("--out", out_dir, "output directory");

    auto* cal = app.add_subcommand("calibrate", "run the vacuum/electronic calibration only");
    auto* run = app.add_subcommand("run", "full experiment: simulate, DSP, estimate, reconcile, rate");
    auto* swp = app.add_subcommand("sweep", "grid sweep along an axis");
    swp->add_option("--axis", axis_name, "distance | v_mod | pilot_snr | linewidth");
    swp->add_option("--grid", grid_str, "comma-separated grid values")->required();
    auto* rep = app.add_subcommand("report", "print the summary of a finished run");
    std::string rep_dir;
    rep->add_option("dir", rep_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cal->parsed()) {
            auto cfg = build_config(preset.empty() ? "quick" : preset, config_path, seed, seed_set);
            cvqkd::ModulationConfig mod = cfg.tx;
            auto set = cvqkd::make_measurement_set(mod, cfg.channel, cfg.detector,
                                                   std::min(cfg.n_frames, 4),
                                                   static_cast<size_t>(cfg.samples_per_frame),
                                                   cfg.seed);
            auto rec = cvqkd::snu_calibrate(set.vacuum_frames, set.electronic_frames);
            fs::create_directories(out_dir);
            std::ofstream f(fs::path(out_dir) / "calibration.csv");
            f << "name,value\n";
            f << "vacuum_variance," << rec.vacuum_variance << '\n';
            f << "electronic_variance," << rec.electronic_variance << '\n';
            f << "snu_scale," << rec.snu_scale << '\n';
            f << "clearance_db," << rec.clearance_db << '\n';
            std::cout << "clearance " << rec.clearance_db << " dB, snu scale "
                      << rec.snu_scale << "\n";
            return 0;
        }
        if (run->parsed()) {
            auto cfg = build_config(preset.empty() ? "quick" : preset, config_path, seed, seed_set);
            auto res = cvqkd::run_experiment(cfg, out_dir);
            std::cout << "frames " << res.frames.size() << " (dropped " << res.frames_dropped
                      << "), pairs " << res.n_pairs << "\n"
                      << "eta_hat " << res.link.eta_hat << " (low " << res.link.eta_low
                      << "), xi_hat " << res.link.xi_hat * 1e3 << " mSNU (up "
                      << res.link.xi_up * 1e3 << ")\n"
                      << "beta " << (res.beta_measured > 0 ? res.beta_measured : cfg.security.beta)
                      << ", fer " << (res.beta_measured > 0 ? res.fer_measured : cfg.security.fer)
                      << "\n"
                      << "SKR asymptotic " << res.asymptotic.skr_asymptotic_bps / 1e3
                      << " kbit/s, finite " << res.finite.skr_finite_bps / 1e3
                      << " kbit/s, key bits " << res.key_bits << "\n"
                      << "reports in " << res.out_dir << "\n";
            return res.finite.skr_finite_bps > 0.0 ? 0 : 2;
        }
        if (swp->parsed()) {
            auto cfg = build_config(preset.empty() ? "table1" : preset, config_path, seed, seed_set);
            const auto axis = cvqkd::parse_axis(axis_name);
            const auto grid = parse_grid(grid_str);
            const auto csv = cvqkd::sweep(cfg, axis, grid, out_dir);
            std::cout << "sweep written to " << csv << "\n";
            return 0;
        }
        if (rep->parsed()) {
            std::ifstream f(fs::path(rep_dir) / "summary.csv");
            if (!f) {
                std::cerr << "no summary.csv in " << rep_dir << "\n";
                return 1;
            }
            std::cout << f.rdbuf();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
