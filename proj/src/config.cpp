#include "cvqkd/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cvqkd {

namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T>
std::string to_str(T v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<Field> field_table() {
    auto dbl = [](auto member) {
        return std::make_pair(
            std::function<void(RunConfig&, const std::string&)>(
                [member](RunConfig& c, const std::string& s) { c.*member = std::stod(s); }),
            std::function<std::string(const RunConfig&)>(
                [member](const RunConfig& c) { return to_str(c.*member); }));
    };
    (void)dbl;

    std::vector<Field> f;
    auto add = [&f](const char* sec, const char* key, auto setter, auto getter) {
        f.push_back({sec, key, setter, getter});
    };
#define NUM_FIELD(sec, key, expr, type)                                               \
    add(sec, key,                                                                     \
        [](RunConfig& c, const std::string& s) { expr = static_cast<type>(std::stod(s)); }, \
        [](const RunConfig& c) { return to_str(expr); })

    NUM_FIELD("run", "seed", c.seed, uint64_t);
    NUM_FIELD("run", "n_frames", c.n_frames, int);
    NUM_FIELD("run", "samples_per_frame", c.samples_per_frame, long long);
    NUM_FIELD("run", "workers", c.workers, int);

    NUM_FIELD("tx", "v_mod", c.tx.v_mod, double);
    NUM_FIELD("tx", "baud_rate_hz", c.tx.baud_rate_hz, double);
    NUM_FIELD("tx", "sample_rate_hz", c.tx.sample_rate_hz, double);
    NUM_FIELD("tx", "rrc_rolloff", c.tx.rrc_rolloff, double);
    NUM_FIELD("tx", "signal_center_hz", c.tx.signal_center_hz, double);
    NUM_FIELD("tx", "pilot_freq_hz", c.tx.pilot_freq_hz, double);
    NUM_FIELD("tx", "pilot_amplitude", c.tx.pilot_amplitude, double);
    NUM_FIELD("tx", "dac_bits", c.tx.dac_bits, int);
    NUM_FIELD("tx", "rrc_span_symbols", c.tx.rrc_span_symbols, int);

    NUM_FIELD("channel", "length_km", c.channel.length_km, double);
    NUM_FIELD("channel", "atten_db_per_km", c.channel.atten_db_per_km, double);
    NUM_FIELD("channel", "coupling_transmittance", c.channel.coupling_transmittance, double);
    NUM_FIELD("channel", "linewidth_tx_hz", c.channel.linewidth_tx_hz, double);
    NUM_FIELD("channel", "linewidth_rx_hz", c.channel.linewidth_rx_hz, double);
    NUM_FIELD("channel", "freq_offset_hz", c.channel.freq_offset_hz, double);
    NUM_FIELD("channel", "delay_samples", c.channel.delay_samples, long long);
    NUM_FIELD("channel", "xi_rin", c.channel.xi_injected.xi_rin, double);
    NUM_FIELD("channel", "xi_mod", c.channel.xi_injected.xi_mod, double);
    NUM_FIELD("channel", "xi_ram", c.channel.xi_injected.xi_ram, double);
    NUM_FIELD("channel", "xi_other", c.channel.xi_injected.xi_other, double);

    NUM_FIELD("detector", "tau", c.detector.tau, double);
    NUM_FIELD("detector", "t_noise", c.detector.t_noise, double);
    NUM_FIELD("detector", "bandwidth_hz", c.detector.bandwidth_hz, double);
    NUM_FIELD("detector", "adc_bits", c.detector.adc_bits, int);

    NUM_FIELD("rx", "pilot_bw_hz", c.rx.pilot_bw_hz, double);
    NUM_FIELD("rx", "search_bw_hz", c.rx.search_bw_hz, double);
    NUM_FIELD("rx", "offset_nominal_hz", c.rx.offset_nominal_hz, double);
    NUM_FIELD("rx", "sync_symbols", c.rx.sync_symbols, size_t);
    NUM_FIELD("rx", "max_delay_samples", c.rx.max_delay_samples, long long);
    NUM_FIELD("rx", "sync_threshold", c.rx.sync_threshold, double);
    NUM_FIELD("rx", "ukf_q_scale", c.rx.ukf_q_scale, double);
    NUM_FIELD("rx", "whitening_frames", c.whitening_frames, int);
    NUM_FIELD("rx", "whitening_nfft", c.whitening_nfft, size_t);

    NUM_FIELD("estimation", "delta_fail", c.delta_fail, double);

    NUM_FIELD("security", "beta", c.security.beta, double);
    NUM_FIELD("security", "fer", c.security.fer, double);
    NUM_FIELD("security", "n_block", c.security.n_block, long long);
    NUM_FIELD("security", "delta_fail", c.security.delta_fail, double);
    NUM_FIELD("security", "baud_hz", c.security.baud_hz, double);
    NUM_FIELD("security", "eps_bar", c.security.eps_bar, double);
    NUM_FIELD("security", "split_delta", c.security.split_delta, bool);

    NUM_FIELD("reconciliation", "enabled", c.recon_enabled, bool);
    NUM_FIELD("reconciliation", "dimension", c.recon_dimension, int);
    NUM_FIELD("reconciliation", "code_n", c.recon_code_n, int);
    NUM_FIELD("reconciliation", "code_seed", c.recon_code_seed, uint64_t);
    NUM_FIELD("reconciliation", "target_rate", c.recon_target_rate, double);
    NUM_FIELD("reconciliation", "max_iters", c.recon_max_iters, int);
    NUM_FIELD("reconciliation", "max_blocks", c.recon_max_blocks, int);
#undef NUM_FIELD

    // String-valued knob.
    add("security", "ancilla",
        [](RunConfig& c, const std::string& s) {
            if (s == "quoted_t") {
                c.security.ancilla = AncillaConvention::quoted_t;
            } else if (s == "clearance") {
                c.security.ancilla = AncillaConvention::clearance;
            } else {
                throw std::invalid_argument("config: ancilla must be quoted_t or clearance");
            }
        },
        [](const RunConfig& c) {
            return std::string(c.security.ancilla == AncillaConvention::quoted_t
                                   ? "quoted_t"
                                   : "clearance");
        });
    return f;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::validate() const {
    tx.validate();
    if (n_frames <= 0) throw std::invalid_argument("config: n_frames must be > 0");
    if (samples_per_frame < tx.samples_per_symbol()) {
        throw std::invalid_argument("config: frame shorter than one symbol");
    }
    if (channel.eta() <= 0.0 || channel.eta() > 1.0) {
        throw std::invalid_argument("config: eta outside (0,1]");
    }
    const double beat = channel.freq_offset_hz;
    const double top = beat + tx.pilot_freq_hz;
    if (top >= tx.sample_rate_hz) {
        throw std::invalid_argument("config: received pilot lands beyond the sampled band");
    }
    if (delta_fail <= 0.0 || delta_fail >= 1.0) {
        throw std::invalid_argument("config: delta_fail outside (0,1)");
    }
}

RunConfig preset_table1() {
    RunConfig c;
    c.seed = 20240100;
    c.n_frames = 950;
    c.samples_per_frame = 10000000;
    c.tx.v_mod = 8.41;
    c.channel.length_km = 100.0;
    c.channel.delay_samples = 1234;
    c.security.beta = 0.925;
    c.security.fer = 0.59;
    c.security.delta_fail = 1e-10;
    c.delta_fail = 1e-10;
    c.recon_code_n = 80000;
    return c;
}

RunConfig preset_quick() {
    RunConfig c = preset_table1();
    c.seed = 20240101;
    c.n_frames = 100;
    c.samples_per_frame = 100000;
    c.whitening_frames = 10;
    c.rx.sync_symbols = 1000;
    c.rx.max_delay_samples = 4096;
    c.channel.delay_samples = 1234;
    c.recon_code_n = 16000;
    c.recon_max_blocks = 16;
    return c;
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    static const auto fields = field_table();
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": bad section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        bool found = false;
        for (const auto& f : fields) {
            if (f.section == section && f.key == key) {
                f.set(cfg, val);
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key [" + section + "] " + key);
        }
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    RunConfig cfg;
    apply_config_text(cfg, ss.str());
    return cfg;
}

std::string dump_config(const RunConfig& cfg) {
    static const auto fields = field_table();
    std::ostringstream os;
    std::string section;
    for (const auto& f : fields) {
        if (f.section != section) {
            if (!section.empty()) os << '\n';
            section = f.section;
            os << '[' << section << "]\n";
        }
        os << f.key << " = " << f.get(cfg) << '\n';
    }
    return os.str();
}

}  // namespace cvqkd
