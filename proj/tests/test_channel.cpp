#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cvqkd/channel.hpp"
#include "cvqkd/snu.hpp"

using namespace cvqkd;

TEST_CASE("wiener phase statistics and determinism") {
    // zero linewidth: constant phase
    auto tr0 = wiener_phase(1000, 0.0, 1e9, 1, 0, 0.3);
    for (double th : tr0.theta) CHECK(th == doctest::Approx(0.3));

    // increment variance 2 pi dnu T_s
    const size_t n = 1000000;
    auto tr = wiener_phase(n, 200.0, 1e9, 2, 0, 0.0);
    const double expect = 2.0 * std::numbers::pi * 200.0 / 1e9;
    double acc = 0.0;
    double prev = 0.0;
    std::vector<double> inc(n);
    for (size_t i = 0; i < n; ++i) {
        inc[i] = tr.theta[i] - prev;
        prev = tr.theta[i];
        acc += inc[i] * inc[i];
    }
    const double var = acc / n;
    CHECK(std::abs(var - expect) < 5.0 * expect * std::sqrt(2.0 / n));

    // increments are white (autocorrelation at small lags)
    double mean = 0.0;
    for (double v : inc) mean += v;
    mean /= n;
    for (int lag = 1; lag <= 20; ++lag) {
        double r = 0.0;
        for (size_t i = lag; i < n; ++i) r += (inc[i] - mean) * (inc[i - lag] - mean);
        r /= (static_cast<double>(n) * var);
        CHECK(std::abs(r) < 4.0 / std::sqrt(static_cast<double>(n)));
    }

    // determinism
    auto a = wiener_phase(100, 50.0, 1e9, 7, 3, 0.0);
    auto b = wiener_phase(100, 50.0, 1e9, 7, 3, 0.0);
    auto c = wiener_phase(100, 50.0, 1e9, 8, 3, 0.0);
    CHECK(a.theta == b.theta);
    CHECK(a.theta != c.theta);

    CHECK_THROWS_AS(wiener_phase(10, -1.0, 1e9, 1), std::domain_error);
}

TEST_CASE("eta follows the loss law") {
    ChannelParams ch;
    ch.length_km = 100.0;
    ch.coupling_transmittance = 0.82;
    ch.atten_db_per_km = 0.146;
    CHECK(ch.eta() == doctest::Approx(0.0284).epsilon(2e-3));
}

TEST_CASE("identity channel passes the frame through") {
    ChannelParams ch;
    ch.length_km = 0.0;
    ch.coupling_transmittance = 1.0;
    ch.linewidth_tx_hz = 0.0;
    ch.linewidth_rx_hz = 0.0;
    ch.freq_offset_hz = 0.0;
    ch.initial_phase = 0.0;
    ch.shot_scale = 0.0;
    DetectorModel det;
    det.tau = 1.0;
    det.t_noise = 0.0;
    det.bandwidth_hz = 0.0;  // response fixture off

    SampleFrame f;
    f.unit = FrameUnit::snu_normalized;
    f.sample_rate_hz = 1e9;
    auto rng = CounterRng(3, 3);
    f.samples.resize(5000);
    for (auto& z : f.samples) z = cplx(rng.next_normal(), rng.next_normal());

    auto [out, trace] = propagate(f, ch, det, 1, 0);
    REQUIRE(out.samples.size() == f.samples.size());
    for (size_t i = 0; i < f.samples.size(); ++i) {
        CHECK(std::abs(out.samples[i] - f.samples[i]) < 1e-12);
    }
    CHECK(trace.theta.size() == f.samples.size());
}

TEST_CASE("zero input gives shot plus trusted noise per quadrature") {
    ChannelParams ch;
    ch.linewidth_tx_hz = 100.0;
    ch.linewidth_rx_hz = 100.0;
    DetectorModel det;  // tau 0.68, t 62.72 mSNU
    det.bandwidth_hz = 0.0;

    SampleFrame zero;
    zero.unit = FrameUnit::snu_normalized;
    zero.sample_rate_hz = 1e9;
    zero.samples.assign(1000000, cplx(0.0, 0.0));
    auto [out, trace] = propagate(zero, ch, det, 5, 0);
    (void)trace;
    const double v = quadrature_variance(out.samples);
    const double expect = 1.0 + det.t_noise / 2.0;
    CHECK(std::abs(v - expect) < 5.0 * expect * std::sqrt(2.0 / 2e6));
}

TEST_CASE("unit mismatch rejected") {
    ChannelParams ch;
    DetectorModel det;
    SampleFrame f;
    f.unit = FrameUnit::adc_counts;
    f.samples.assign(100, cplx(0, 0));
    CHECK_THROWS_AS(propagate(f, ch, det, 1, 0), std::invalid_argument);
}

TEST_CASE("transmittance law holds in the noise-corrected power ratio") {
    ChannelParams ch;
    ch.length_km = 10.0;
    ch.linewidth_tx_hz = 0.0;
    ch.linewidth_rx_hz = 0.0;
    ch.freq_offset_hz = 0.0;
    DetectorModel det;
    det.bandwidth_hz = 0.0;
    const double eta_tau = ch.eta() * det.tau;

    auto rng = CounterRng(9, 9);
    double num = 0.0, den = 0.0;
    const double noise = 1.0 + det.t_noise / 2.0;
    for (int f = 0; f < 100; ++f) {
        SampleFrame in;
        in.unit = FrameUnit::snu_normalized;
        in.sample_rate_hz = 1e9;
        in.samples.resize(20000);
        for (auto& z : in.samples) z = cplx(3.0 * rng.next_normal(), 3.0 * rng.next_normal());
        auto [out, tr] = propagate(in, ch, det, 33, static_cast<uint64_t>(f));
        (void)tr;
        num += quadrature_variance(out.samples) - noise;
        den += quadrature_variance(in.samples);
    }
    const double ratio = num / den;
    CHECK(ratio == doctest::Approx(eta_tau).epsilon(0.02));
}

TEST_CASE("measurement set: clearance and closed-loop calibration") {
    ModulationConfig mod;
    mod.v_mod = 8.41;
    ChannelParams ch;
    ch.length_km = 25.0;
    DetectorModel det;
    det.bandwidth_hz = 0.0;  // flat response so adc_scale^2 is the truth
    auto set = make_measurement_set(mod, ch, det, 3, 100000, 17);

    REQUIRE(set.signal_frames.size() == 3);
    REQUIRE(set.vacuum_frames.size() == 3);
    REQUIRE(set.electronic_frames.size() == 3);
    for (const auto& f : set.signal_frames) CHECK(f.unit == FrameUnit::adc_counts);

    auto cal = snu_calibrate(set.vacuum_frames, set.electronic_frames);
    CHECK(cal.clearance_db == doctest::Approx(15.0).epsilon(1.0 / 15.0));
    CHECK(cal.snu_scale ==
          doctest::Approx(set.adc_scale * set.adc_scale).epsilon(0.01));

    // ground truth returned for oracle use
    CHECK(set.tx_symbols.size() == 3);
    CHECK(set.phase_traces.size() == 3);
}

TEST_CASE("phase trace carries offset plus wiener walk") {
    ChannelParams ch;
    ch.freq_offset_hz = 2.3e8;
    ch.linewidth_tx_hz = 50.0;
    ch.linewidth_rx_hz = 50.0;
    ch.initial_phase = 0.0;
    DetectorModel det;
    det.bandwidth_hz = 0.0;
    SampleFrame zero;
    zero.unit = FrameUnit::snu_normalized;
    zero.sample_rate_hz = 1e9;
    zero.samples.assign(100000, cplx(0, 0));
    auto [out, tr] = propagate(zero, ch, det, 2, 0);
    (void)out;
    // dominant linear slope of 2 pi df t
    const double slope = (tr.theta.back() - tr.theta.front()) /
                         (static_cast<double>(tr.theta.size()) - 1.0);
    const double expect = 2.0 * std::numbers::pi * 2.3e8 / 1e9;
    CHECK(slope == doctest::Approx(expect).epsilon(1e-3));
}
