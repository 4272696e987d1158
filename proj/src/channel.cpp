#include "cvqkd/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cvqkd/rng.hpp"

namespace cvqkd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// One-pole low-pass, the receiver's frequency-response fixture.
void one_pole_lowpass(std::vector<cplx>& x, double fc_hz, double fs_hz) {
    if (fc_hz <= 0.0) return;
    const double alpha = 1.0 - std::exp(-kTwoPi * fc_hz / fs_hz);
    cplx y(0.0, 0.0);
    for (auto& v : x) {
        y = alpha * v + (1.0 - alpha) * y;
        v = y;
    }
}

}  // namespace

double ChannelParams::eta() const {
    return coupling_transmittance * std::pow(10.0, -atten_db_per_km * length_km / 10.0);
}

PhaseTrace wiener_phase(size_t n, double combined_linewidth_hz, double sample_rate_hz,
                        uint64_t seed, uint64_t frame_id, double theta0) {
    if (n == 0) throw std::invalid_argument("wiener_phase: n must be > 0");
    if (combined_linewidth_hz < 0.0) {
        throw std::domain_error("wiener_phase: negative linewidth");
    }
    PhaseTrace tr;
    tr.theta.resize(n);
    auto rng = CounterRng::derive(seed, frame_id, /*purpose=*/2);
    const double sigma = std::sqrt(kTwoPi * combined_linewidth_hz / sample_rate_hz);
    double th = theta0;
    for (size_t i = 0; i < n; ++i) {
        th += sigma * rng.next_normal();
        tr.theta[i] = th;
    }
    return tr;
}

std::pair<SampleFrame, PhaseTrace> propagate(const SampleFrame& frame,
                                             const ChannelParams& ch,
                                             const DetectorModel& det,
                                             uint64_t seed, uint64_t frame_id) {
    if (frame.unit != FrameUnit::snu_normalized) {
        throw std::invalid_argument("propagate: frame must be snu_normalized");
    }
    const size_t n = frame.samples.size();
    const double fs = frame.sample_rate_hz;
    const double eta = ch.eta();
    const double gain = std::sqrt(eta * det.tau);

    auto rng = CounterRng::derive(seed, frame_id, /*purpose=*/3);
    double theta0 = ch.initial_phase;
    if (theta0 < 0.0) theta0 = kTwoPi * rng.next_double();

    PhaseTrace tr = wiener_phase(n, ch.combined_linewidth_hz(), fs, seed, frame_id, theta0);
    tr.freq_offset_hz = ch.freq_offset_hz;

    // Per-quadrature noise: unit shot + trusted t/2 + excess tau*eta*xi/2.
    const double xi_total = ch.xi_injected.total();
    const double noise_var =
        ch.shot_scale + det.t_noise / 2.0 + det.tau * eta * xi_total / 2.0;
    const double nsig = std::sqrt(noise_var);

    SampleFrame out;
    out.sample_rate_hz = fs;
    out.unit = FrameUnit::snu_normalized;
    out.frame_id = frame.frame_id;
    out.samples.resize(n);
    const double woff = kTwoPi * ch.freq_offset_hz / fs;
    const long long d = ch.delay_samples;
    for (size_t i = 0; i < n; ++i) {
        const long long src = static_cast<long long>(i) - d;
        cplx s = (src >= 0 && src < static_cast<long long>(n))
                     ? frame.samples[static_cast<size_t>(src)]
                     : cplx(0.0, 0.0);
        const double th = tr.theta[i] + woff * static_cast<double>(i);
        out.samples[i] = gain * s * std::polar(1.0, th) +
                         cplx(nsig * rng.next_normal(), nsig * rng.next_normal());
        tr.theta[i] = th;  // trace carries the full relative phase
    }
    one_pole_lowpass(out.samples, det.bandwidth_hz, fs);
    return {std::move(out), std::move(tr)};
}

MeasurementSet make_measurement_set(const ModulationConfig& mod,
                                    const ChannelParams& ch,
                                    const DetectorModel& det, int n_frames,
                                    size_t samples_per_frame, uint64_t seed) {
    if (n_frames <= 0) throw std::invalid_argument("make_measurement_set: n_frames <= 0");
    mod.validate();
    const int sps = mod.samples_per_symbol();
    const size_t nsym = samples_per_frame / static_cast<size_t>(sps);
    if (nsym == 0) throw std::invalid_argument("make_measurement_set: frame too short");

    MeasurementSet set;
    // ADC loading: full scale at adc counts, sized against the signal-run rms.
    const double fs_counts = std::pow(2.0, det.adc_bits - 1);
    const double amp = mod.resolved_pilot_amplitude();
    const double sig_rms =
        std::sqrt(1.0 + det.t_noise / 2.0 +
                  det.tau * ch.eta() * (mod.v_mod / (2.0 * sps) + amp * amp / 2.0));
    const double crest = 8.0;
    set.adc_scale = fs_counts / (crest * sig_rms);

    auto quantize_to_adc = [&](SampleFrame f) {
        for (auto& z : f.samples) z *= set.adc_scale;
        auto q = dac_quantize(f, det.adc_bits, fs_counts);
        q.frame.unit = FrameUnit::adc_counts;
        return q.frame;
    };

    ChannelParams chf = ch;
    auto carry_rng = CounterRng::derive(seed, 0, /*purpose=*/4);
    double carry_phase = chf.initial_phase >= 0.0 ? chf.initial_phase
                                                  : kTwoPi * carry_rng.next_double();
    for (int f = 0; f < n_frames; ++f) {
        auto sym = generate_symbols(nsym, mod, seed, static_cast<uint64_t>(f));
        auto wave = synthesize_waveform(sym, mod);
        if (mod.dac_bits > 0) {
            const double wave_fs = crest * std::sqrt(mod.v_mod / sps +
                                                     mod.resolved_pilot_amplitude() *
                                                         mod.resolved_pilot_amplitude() / 2.0);
            wave = dac_quantize(wave, mod.dac_bits, wave_fs).frame;
            wave.unit = FrameUnit::snu_normalized;
        }
        wave.frame_id = static_cast<uint32_t>(f);

        chf.initial_phase = carry_phase;
        auto [rx, trace] = propagate(wave, chf, det, seed, static_cast<uint64_t>(f));
        carry_phase = std::fmod(trace.theta.back(), kTwoPi);
        if (carry_phase < 0.0) carry_phase += kTwoPi;

        set.signal_frames.push_back(quantize_to_adc(std::move(rx)));
        set.tx_symbols.push_back(std::move(sym));
        set.phase_traces.push_back(std::move(trace));
    }

    // Vacuum run: transmitter off, same channel statistics otherwise.
    for (int f = 0; f < n_frames; ++f) {
        SampleFrame zero;
        zero.sample_rate_hz = mod.sample_rate_hz;
        zero.unit = FrameUnit::snu_normalized;
        zero.samples.assign(samples_per_frame, cplx(0.0, 0.0));
        ChannelParams chv = ch;
        chv.xi_injected = NoiseBudget{};  // nothing injected with the signal off
        auto [rx, trace] =
            propagate(zero, chv, det, seed + 1, static_cast<uint64_t>(f));
        (void)trace;
        set.vacuum_frames.push_back(quantize_to_adc(std::move(rx)));
    }

    // Electronic run: detector noise only, shaped by the same response.
    for (int f = 0; f < n_frames; ++f) {
        SampleFrame e;
        e.sample_rate_hz = mod.sample_rate_hz;
        e.unit = FrameUnit::snu_normalized;
        e.samples.resize(samples_per_frame);
        auto rng = CounterRng::derive(seed + 2, static_cast<uint64_t>(f), /*purpose=*/5);
        const double s = std::sqrt(det.t_noise / 2.0);
        for (auto& z : e.samples) {
            z = cplx(s * rng.next_normal(), s * rng.next_normal());
        }
        one_pole_lowpass(e.samples, det.bandwidth_hz, mod.sample_rate_hz);
        set.electronic_frames.push_back(quantize_to_adc(std::move(e)));
    }
    return set;
}

}  // namespace cvqkd
