#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "cvqkd/frame.hpp"
#include "cvqkd/rng.hpp"
#include "cvqkd/snu.hpp"

using namespace cvqkd;

TEST_CASE("counter rng is reproducible and stream-separated") {
    CounterRng a(42, 0), b(42, 0), c(42, 1);
    for (int i = 0; i < 100; ++i) {
        const uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
        CHECK(va != c.next_u64());
    }
    auto d1 = CounterRng::derive(7, 3, 1);
    auto d2 = CounterRng::derive(7, 3, 1);
    auto d3 = CounterRng::derive(7, 4, 1);
    CHECK(d1.next_u64() == d2.next_u64());
    CHECK(d1.next_u64() != d3.next_u64());
}

TEST_CASE("normal quantile matches reference values") {
    // Reference quantiles (high-precision normal inverse CDF).
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    // forming 1 - 1e-10 already costs ~7 digits of the tail, hence the looser band
    CHECK(normal_quantile(1.0 - 1e-10) == doctest::Approx(6.361340902404056).epsilon(1e-7));
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(1.0 - 0.15865525393145707) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normal_quantile(0.158655) == doctest::Approx(-1.0).epsilon(1e-4));
    // Round trip through the CDF.
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.7, 0.99, 1 - 1e-6}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
    }
}

TEST_CASE("gaussian_from_uniform moments and determinism") {
    CounterRng rng(123, 9);
    std::vector<uint64_t> words(1000000);
    for (auto& w : words) w = rng.next_u64();

    auto g = gaussian_from_uniform(words, 1.0);
    REQUIRE(g.size() == words.size());
    double mean = 0.0;
    for (double v : g) mean += v;
    mean /= static_cast<double>(g.size());
    double var = 0.0;
    for (double v : g) var += (v - mean) * (v - mean);
    var /= static_cast<double>(g.size() - 1);
    // 5 sigma band on the sample variance of 1e6 gaussians: 1 +- 5*sqrt(2/n)
    CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / 1e6));
    CHECK(std::abs(mean) < 5.0 / std::sqrt(1e6));

    // bit-reproducible
    auto g2 = gaussian_from_uniform(words, 1.0);
    CHECK(g == g2);

    // empty input -> empty output
    CHECK(gaussian_from_uniform({}, 1.0).empty());
    CHECK_THROWS_AS(gaussian_from_uniform(words, 0.0), std::domain_error);
}

TEST_CASE("gaussian_from_uniform passes a KS test against the normal CDF") {
    CounterRng rng(77, 1);
    const size_t n = 200000;
    std::vector<uint64_t> words(n);
    for (auto& w : words) w = rng.next_u64();
    auto g = gaussian_from_uniform(words, 1.0);
    std::sort(g.begin(), g.end());
    double dmax = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double f = normal_cdf(g[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        dmax = std::max({dmax, std::abs(f - lo), std::abs(f - hi)});
    }
    // Kolmogorov statistic: p ~ 2 exp(-2 n d^2); demand p > 1e-6.
    const double lambda = (std::sqrt(static_cast<double>(n)) + 0.12) * dmax;
    const double p = 2.0 * std::exp(-2.0 * lambda * lambda);
    CHECK(p > 1e-6);
}

TEST_CASE("noise budget adds per component") {
    NoiseBudget nb;
    CounterRng rng(5, 5);
    for (int rep = 0; rep < 50; ++rep) {
        nb.xi_rin = rng.next_double();
        nb.xi_mod = rng.next_double();
        nb.xi_quant = rng.next_double();
        nb.xi_ram = rng.next_double();
        nb.xi_rpn = rng.next_double();
        nb.xi_other = rng.next_double();
        const double expect =
            nb.xi_rin + nb.xi_mod + nb.xi_quant + nb.xi_ram + nb.xi_rpn + nb.xi_other;
        CHECK(nb.total() == expect);
    }
}

TEST_CASE("snu calibration recovers scale and clearance") {
    auto make = [](double var, uint32_t id) {
        SampleFrame f;
        f.unit = FrameUnit::adc_counts;
        f.frame_id = id;
        f.samples.resize(200000);
        auto rng = CounterRng::derive(1000 + id, id, 1);
        const double s = std::sqrt(var);
        for (auto& z : f.samples) z = cplx(s * rng.next_normal(), s * rng.next_normal());
        return f;
    };
    std::vector<SampleFrame> vac = {make(10.0, 0), make(10.0, 1)};
    std::vector<SampleFrame> ele = {make(0.3162, 2), make(0.3162, 3)};
    auto cal = snu_calibrate(vac, ele);
    CHECK(cal.snu_scale == doctest::Approx(9.6838).epsilon(0.02));
    CHECK(cal.clearance_db == doctest::Approx(15.0).epsilon(0.02));

    // scaling all samples by c scales snu_scale by c^2, clearance unchanged
    for (auto& f : vac)
        for (auto& z : f.samples) z *= 3.0;
    for (auto& f : ele)
        for (auto& z : f.samples) z *= 3.0;
    auto cal2 = snu_calibrate(vac, ele);
    CHECK(cal2.snu_scale == doctest::Approx(9.0 * cal.snu_scale).epsilon(1e-9));
    CHECK(cal2.clearance_db == doctest::Approx(cal.clearance_db).epsilon(1e-9));

    // inverted ordering fails
    CHECK_THROWS_AS(snu_calibrate(ele, vac), std::runtime_error);

    // zero electronic noise: unbounded clearance
    SampleFrame z0;
    z0.unit = FrameUnit::adc_counts;
    z0.samples.assign(1000, cplx(0.0, 0.0));
    std::vector<SampleFrame> zero = {z0, z0};
    auto cal3 = snu_calibrate(vac, zero);
    CHECK(std::isinf(cal3.clearance_db));
}

TEST_CASE("frame file round trip is bit exact") {
    SampleFrame f;
    f.sample_rate_hz = 1e9;
    f.unit = FrameUnit::adc_counts;
    f.frame_id = 3;
    auto rng = CounterRng(99, 0);
    f.samples.resize(10000);
    for (auto& z : f.samples) {
        z = cplx(static_cast<float>(rng.next_normal()), static_cast<float>(rng.next_normal()));
    }
    const std::string path = (std::filesystem::temp_directory_path() / "cvqkd_t.cvqf").string();
    write_frame(path, f);
    auto g = read_frame(path);
    CHECK(g.unit == f.unit);
    CHECK(g.sample_rate_hz == f.sample_rate_hz);
    REQUIRE(g.samples.size() == f.samples.size());
    for (size_t i = 0; i < f.samples.size(); ++i) {
        CHECK(g.samples[i] == f.samples[i]);
    }

    // corrupt the magic
    {
        FILE* fp = std::fopen(path.c_str(), "r+b");
        REQUIRE(fp);
        std::fputc('X', fp);
        std::fclose(fp);
    }
    CHECK_THROWS(read_frame(path));
    std::filesystem::remove(path);
}
