#include "cvqkd/txdsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cvqkd/rng.hpp"

namespace cvqkd {

namespace {
constexpr double kPi = std::numbers::pi;
}

int ModulationConfig::samples_per_symbol() const {
    const double r = sample_rate_hz / baud_rate_hz;
    return static_cast<int>(std::lround(r));
}

double ModulationConfig::resolved_pilot_amplitude() const {
    if (pilot_amplitude > 0.0) return pilot_amplitude;
    // Default: pilot power 20 dB above the quantum band's average power
    // v_mod / sps per sample.
    const double band_power = v_mod / samples_per_symbol();
    return std::sqrt(100.0 * band_power);
}

void ModulationConfig::validate() const {
    if (v_mod <= 0.0) throw std::invalid_argument("config: v_mod must be > 0");
    if (rrc_rolloff <= 0.0 || rrc_rolloff > 1.0) {
        throw std::invalid_argument("config: rolloff outside (0,1]");
    }
    const double r = sample_rate_hz / baud_rate_hz;
    if (std::abs(r - std::lround(r)) > 1e-9) {
        throw std::invalid_argument("config: sample rate must be an integer multiple of baud");
    }
    const double band_edge = signal_center_hz + (1.0 + rrc_rolloff) * baud_rate_hz / 2.0;
    if (pilot_freq_hz <= band_edge) {
        throw std::invalid_argument("config: pilot tone overlaps the signal band");
    }
}

std::vector<double> rrc_taps(double rolloff, int span_symbols, int samples_per_symbol) {
    if (rolloff <= 0.0 || rolloff > 1.0) {
        throw std::domain_error("rrc_taps: rolloff outside (0,1]");
    }
    if (span_symbols < 8) throw std::domain_error("rrc_taps: span below 8 symbols");
    if (samples_per_symbol < 2) throw std::domain_error("rrc_taps: need sps >= 2");

    const int n = span_symbols * samples_per_symbol + 1;
    const int mid = n / 2;
    std::vector<double> h(n);
    const double b = rolloff;
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i - mid) / samples_per_symbol;  // in symbols
        double v;
        if (std::abs(t) < 1e-12) {
            v = 1.0 - b + 4.0 * b / kPi;
        } else if (std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-9) {
            v = (b / std::sqrt(2.0)) *
                ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * b)) +
                 (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * b)));
        } else {
            const double num = std::sin(kPi * t * (1.0 - b)) +
                               4.0 * b * t * std::cos(kPi * t * (1.0 + b));
            const double den = kPi * t * (1.0 - (4.0 * b * t) * (4.0 * b * t));
            v = num / den;
        }
        h[i] = v;
    }
    // Exact mirror symmetry, then unit energy.
    for (int i = 0; i < n / 2; ++i) h[n - 1 - i] = h[i];
    double e = 0.0;
    for (double v : h) e += v * v;
    const double s = 1.0 / std::sqrt(e);
    for (double& v : h) v *= s;
    return h;
}

SymbolFrame generate_symbols(size_t count, const ModulationConfig& cfg,
                             uint64_t seed, uint64_t frame_id) {
    if (count == 0) throw std::invalid_argument("generate_symbols: count must be > 0");
    auto rng = CounterRng::derive(seed, frame_id, /*purpose=*/1);
    std::vector<uint64_t> words(2 * count);
    for (auto& w : words) w = rng.next_u64();
    const auto g = gaussian_from_uniform(words, cfg.v_mod / 2.0);
    SymbolFrame out;
    out.baud_rate_hz = cfg.baud_rate_hz;
    out.symbols.resize(count);
    for (size_t i = 0; i < count; ++i) {
        out.symbols[i] = cplx(g[2 * i], g[2 * i + 1]);
    }
    return out;
}

SampleFrame synthesize_waveform(const SymbolFrame& symbols, const ModulationConfig& cfg) {
    cfg.validate();
    const int sps = cfg.samples_per_symbol();
    const auto h = rrc_taps(cfg.rrc_rolloff, cfg.rrc_span_symbols, sps);
    const int nh = static_cast<int>(h.size());
    const int half = nh / 2;
    const size_t nsym = symbols.symbols.size();
    const size_t nsamp = nsym * static_cast<size_t>(sps);

    SampleFrame out;
    out.sample_rate_hz = cfg.sample_rate_hz;
    out.unit = FrameUnit::snu_normalized;
    out.samples.assign(nsamp, cplx(0.0, 0.0));

    // Polyphase zero-stuffed filtering: output n gets contributions from
    // symbols k with n = k*sps + (tap offset - half).
    for (size_t k = 0; k < nsym; ++k) {
        const cplx a = symbols.symbols[k];
        const long long base = static_cast<long long>(k) * sps - half;
        int j0 = 0;
        long long n0 = base;
        if (n0 < 0) {
            j0 = static_cast<int>(-n0);
            n0 = 0;
        }
        const long long nmax = static_cast<long long>(nsamp);
        for (int j = j0; j < nh && base + j < nmax; ++j) {
            out.samples[static_cast<size_t>(base + j)] += a * h[j];
        }
    }

    const double wc = 2.0 * kPi * cfg.signal_center_hz / cfg.sample_rate_hz;
    const double wp = 2.0 * kPi * cfg.pilot_freq_hz / cfg.sample_rate_hz;
    const double amp = cfg.resolved_pilot_amplitude();
    for (size_t n = 0; n < nsamp; ++n) {
        const double dn = static_cast<double>(n);
        out.samples[n] = out.samples[n] * std::polar(1.0, wc * dn) +
                         amp * std::polar(1.0, wp * dn);
    }
    return out;
}

QuantizeResult dac_quantize(const SampleFrame& frame, int bits, double full_scale) {
    if (bits < 4 || bits > 24) throw std::domain_error("dac_quantize: bits outside [4,24]");
    if (full_scale <= 0.0) throw std::domain_error("dac_quantize: full_scale must be > 0");

    QuantizeResult res;
    res.frame = frame;
    const double step = full_scale * std::pow(2.0, 1 - bits);
    res.step = step;
    res.quant_noise_var = step * step / 12.0;
    // Midtread levels k*step, k in [-2^(b-1), 2^(b-1)-1]: keeps an exact zero
    // level so silence stays silence.
    const double top = full_scale - step;
    const double bottom = -full_scale;

    auto q = [&](double x) {
        double y = std::round(x / step) * step;
        if (y > top) {
            y = top;
            ++res.clipped;
        } else if (y < bottom) {
            y = bottom;
            ++res.clipped;
        }
        return y;
    };
    for (auto& z : res.frame.samples) {
        z = cplx(q(z.real()), q(z.imag()));
    }
    return res;
}

}  // namespace cvqkd
