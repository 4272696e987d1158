#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cvqkd/fft.hpp"
#include "cvqkd/txdsp.hpp"

using namespace cvqkd;

TEST_CASE("rrc taps: symmetry, energy, nyquist cascade") {
    const auto h = rrc_taps(0.2, 20, 10);
    REQUIRE(h.size() == 201);
    for (size_t k = 0; k < h.size(); ++k) {
        CHECK(h[k] == h[h.size() - 1 - k]);  // exact mirror
    }
    double e = 0.0;
    for (double v : h) e += v * v;
    CHECK(e == doctest::Approx(1.0).epsilon(1e-12));

    // numerical self-convolution sampled at symbol spacing
    const int n = static_cast<int>(h.size());
    auto rc = [&](int lag) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const int j = i + lag;
            if (j >= 0 && j < n) acc += h[static_cast<size_t>(i)] * h[static_cast<size_t>(j)];
        }
        return acc;
    };
    CHECK(rc(0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 1; k <= 9; ++k) {
        CHECK(std::abs(rc(10 * k)) < 1e-3);
    }

    CHECK_THROWS_AS(rrc_taps(0.0, 20, 10), std::domain_error);
    CHECK_THROWS_AS(rrc_taps(1.5, 20, 10), std::domain_error);
    CHECK_THROWS_AS(rrc_taps(0.2, 4, 10), std::domain_error);
}

TEST_CASE("rrc taps approach a normalized sinc for small rolloff") {
    const int sps = 10;
    const auto h = rrc_taps(0.005, 20, sps);
    const int mid = static_cast<int>(h.size()) / 2;
    std::vector<double> s(h.size());
    double e = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
        const double t = (static_cast<double>(i) - mid) / sps;
        s[i] = std::abs(t) < 1e-12 ? 1.0
                                   : std::sin(std::numbers::pi * t) / (std::numbers::pi * t);
        e += s[i] * s[i];
    }
    for (auto& v : s) v /= std::sqrt(e);
    double err = 0.0;
    for (size_t i = 0; i < s.size(); ++i) err += (h[i] - s[i]) * (h[i] - s[i]);
    CHECK(err < 1e-3);
}

TEST_CASE("symbol generation: variance split, independence, determinism") {
    ModulationConfig cfg;
    cfg.v_mod = 2.0;
    const size_t n = 1000000;
    auto f = generate_symbols(n, cfg, 11, 0);
    REQUIRE(f.symbols.size() == n);

    double vx = 0, vp = 0, cxp = 0, mx = 0, mp = 0;
    for (const auto& s : f.symbols) {
        mx += s.real();
        mp += s.imag();
    }
    mx /= n;
    mp /= n;
    for (const auto& s : f.symbols) {
        vx += (s.real() - mx) * (s.real() - mx);
        vp += (s.imag() - mp) * (s.imag() - mp);
        cxp += (s.real() - mx) * (s.imag() - mp);
    }
    vx /= (n - 1);
    vp /= (n - 1);
    cxp /= (n - 1);
    const double band = 5.0 * std::sqrt(2.0 / n);  // 5 sigma on a variance of 1
    CHECK(std::abs(vx - 1.0) < band);
    CHECK(std::abs(vp - 1.0) < band);
    CHECK(std::abs(cxp) < 5.0 / std::sqrt(static_cast<double>(n)));

    auto g = generate_symbols(n, cfg, 11, 0);
    CHECK(g.symbols == f.symbols);
    auto h = generate_symbols(1, cfg, 11, 0);
    CHECK(h.symbols.size() == 1);
}

TEST_CASE("waveform synthesis: pilot-only and single pulse") {
    ModulationConfig cfg;
    cfg.pilot_amplitude = 0.25;

    SymbolFrame zeros;
    zeros.symbols.assign(2000, cplx(0.0, 0.0));
    auto w = synthesize_waveform(zeros, cfg);
    REQUIRE(w.samples.size() == 20000);
    const double wp = 2.0 * std::numbers::pi * cfg.pilot_freq_hz / cfg.sample_rate_hz;
    for (size_t i = 0; i < 100; ++i) {
        const cplx expect = 0.25 * std::polar(1.0, wp * static_cast<double>(i));
        CHECK(std::abs(w.samples[i] - expect) < 1e-12);
    }

    // single unit symbol, (near) no pilot: spectral peak at the signal center
    ModulationConfig c2 = cfg;
    c2.pilot_amplitude = 1e-12;
    SymbolFrame one;
    one.symbols.assign(512, cplx(0.0, 0.0));
    one.symbols[256] = cplx(1.0, 0.0);
    auto w2 = synthesize_waveform(one, c2);
    auto spec = fft(w2.samples);
    size_t kmax = 0;
    double pmax = 0;
    for (size_t k = 0; k < spec.size(); ++k) {
        if (std::norm(spec[k]) > pmax) {
            pmax = std::norm(spec[k]);
            kmax = k;
        }
    }
    const double f_peak = static_cast<double>(kmax) / spec.size() * c2.sample_rate_hz;
    CHECK(std::abs(f_peak - 1e8) < 5e6);
}

TEST_CASE("waveform synthesis: signal power confined to its band") {
    ModulationConfig cfg;
    cfg.pilot_amplitude = 1e-12;
    auto sym = generate_symbols(4096, cfg, 3, 0);
    auto w = synthesize_waveform(sym, cfg);
    auto psd = welch_psd(w.samples, 4096);
    const double bin = cfg.sample_rate_hz / 4096;
    double in_band = 0.0, total = 0.0;
    for (size_t k = 0; k < psd.size(); ++k) {
        const double f = k * bin;
        total += psd[k];
        if (f >= 40e6 && f <= 160e6) in_band += psd[k];
    }
    CHECK(in_band / total > 0.99);
}

TEST_CASE("band overlap rejected") {
    ModulationConfig cfg;
    cfg.pilot_freq_hz = 1.5e8;  // inside the signal band
    SymbolFrame s;
    s.symbols.assign(100, cplx(0, 0));
    CHECK_THROWS_AS(synthesize_waveform(s, cfg), std::invalid_argument);
}

TEST_CASE("dac quantizer: sqnr, fixed point, silence") {
    SampleFrame f;
    f.samples.resize(100000);
    for (size_t i = 0; i < f.samples.size(); ++i) {
        const double t = static_cast<double>(i) * 0.001237;
        f.samples[i] = cplx(0.99 * std::sin(t), 0.0);
    }
    auto q = dac_quantize(f, 16, 1.0);
    double sp = 0, np = 0;
    for (size_t i = 0; i < f.samples.size(); ++i) {
        sp += std::norm(f.samples[i]);
        np += std::norm(q.frame.samples[i] - f.samples[i]);
    }
    const double sqnr_db = 10.0 * std::log10(sp / np);
    const double ideal = 6.02 * 16 + 1.76;
    CHECK(std::abs(sqnr_db - ideal) < 3.0);

    // values already on the 4-bit grid are fixed points
    SampleFrame g;
    const double step4 = 2.0 / 16.0;
    for (int k = -8; k < 8; ++k) g.samples.push_back(cplx(k * step4, 0.0));
    auto q4 = dac_quantize(g, 4, 1.0);
    CHECK(q4.clipped == 0);
    for (size_t i = 0; i < g.samples.size(); ++i) {
        CHECK(q4.frame.samples[i] == g.samples[i]);
    }

    // silence in, silence out
    SampleFrame z;
    z.samples.assign(64, cplx(0.0, 0.0));
    auto qz = dac_quantize(z, 16, 1.0);
    CHECK(qz.clipped == 0);
    for (const auto& v : qz.frame.samples) CHECK(v == cplx(0.0, 0.0));

    CHECK_THROWS_AS(dac_quantize(z, 2, 1.0), std::domain_error);
}

TEST_CASE("tx to ideal rx loopback meets the nyquist bound") {
    ModulationConfig cfg;
    cfg.pilot_amplitude = 1e-15;
    const size_t nsym = 4000;
    auto sym = generate_symbols(nsym, cfg, 21, 0);
    auto w = synthesize_waveform(sym, cfg);

    const int sps = cfg.samples_per_symbol();
    const auto h = rrc_taps(cfg.rrc_rolloff, cfg.rrc_span_symbols, sps);
    const int nh = static_cast<int>(h.size());
    const int half = nh / 2;
    const double wc = 2.0 * std::numbers::pi * cfg.signal_center_hz / cfg.sample_rate_hz;
    std::vector<cplx> bb(w.samples.size());
    for (size_t i = 0; i < bb.size(); ++i) {
        bb[i] = w.samples[i] * std::polar(1.0, -wc * static_cast<double>(i));
    }
    double err = 0.0, pwr = 0.0;
    for (size_t k = 40; k + 40 < nsym; ++k) {
        cplx acc(0, 0);
        const long long base = static_cast<long long>(k) * sps - half;
        for (int j = 0; j < nh; ++j) {
            const long long idx = base + j;
            if (idx >= 0 && idx < static_cast<long long>(bb.size())) {
                acc += h[static_cast<size_t>(j)] * bb[static_cast<size_t>(idx)];
            }
        }
        err += std::norm(acc - sym.symbols[k]);
        pwr += std::norm(sym.symbols[k]);
    }
    CHECK(err / pwr < 1e-4);
}

TEST_CASE("pilot leakage into the signal band stays below -40 dB") {
    ModulationConfig cfg;  // default pilot +20 dB over the band
    SymbolFrame zeros;
    zeros.symbols.assign(8192, cplx(0.0, 0.0));
    auto w = synthesize_waveform(zeros, cfg);  // pilot only
    auto psd = welch_psd(w.samples, 8192);
    const double bin = cfg.sample_rate_hz / 8192;
    double pilot_p = 0.0, band_p = 0.0;
    for (size_t k = 0; k < psd.size(); ++k) {
        const double f = k * bin;
        if (std::abs(f - cfg.pilot_freq_hz) < 2e6) pilot_p += psd[k];
        if (f >= 40e6 && f <= 160e6) band_p += psd[k];
    }
    CHECK(10.0 * std::log10(band_p / pilot_p) < -40.0);
}
