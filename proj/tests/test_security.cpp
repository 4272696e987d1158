#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "cvqkd/security.hpp"

using namespace cvqkd;

namespace {

// Independent route for the Holevo bound, kept deliberately separate from the
// implementation: full 2N x 2N covariance matrices in (x1,p1,x2,p2,...)
// ordering, symplectic spectrum from eig(i Omega Gamma).
struct OracleCm {
    Eigen::MatrixXd g;

    static OracleCm modes(int n) {
        OracleCm cm;
        cm.g = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        return cm;
    }
    void set_diag(int mode, double v) {
        g(2 * mode, 2 * mode) = v;
        g(2 * mode + 1, 2 * mode + 1) = v;
    }
    void set_corr_z(int a, int b, double c) {
        g(2 * a, 2 * b) = g(2 * b, 2 * a) = c;
        g(2 * a + 1, 2 * b + 1) = g(2 * b + 1, 2 * a + 1) = -c;
    }
};

std::vector<double> oracle_sympl(const Eigen::MatrixXd& g) {
    const int n = static_cast<int>(g.rows()) / 2;
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        omega(2 * i, 2 * i + 1) = 1.0;
        omega(2 * i + 1, 2 * i) = -1.0;
    }
    Eigen::MatrixXcd m = std::complex<double>(0, 1) * omega * g;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m);
    std::vector<double> ev;
    for (int i = 0; i < 2 * n; ++i) ev.push_back(std::abs(es.eigenvalues()[i].real()));
    std::sort(ev.begin(), ev.end());
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(ev[static_cast<size_t>(2 * i)]);
    return out;
}

double oracle_entropy(const Eigen::MatrixXd& g) {
    double s = 0.0;
    for (double nu : oracle_sympl(g)) s += entropy_g((std::max(nu, 1.0) - 1.0) / 2.0);
    return s;
}

double oracle_holevo(double vmod, double eta, double tau, double t, double xi_spec,
                     AncillaConvention conv) {
    const double V = vmod + 1.0;
    const double b = 1.0 + eta * vmod + eta * xi_spec;
    const double c = std::sqrt(eta * (V * V - 1.0));
    auto ab = OracleCm::modes(2);
    ab.set_diag(0, V);
    ab.set_diag(1, b);
    ab.set_corr_z(0, 1, c);
    const double se = oracle_entropy(ab.g);

    const double t_eff = conv == AncillaConvention::quoted_t ? 2.0 * t : t;
    const double v = tau < 1.0 ? 1.0 + t_eff / (1.0 - tau) : 1.0;
    auto full = OracleCm::modes(4);  // A, B1, F0, G
    full.set_diag(0, V);
    full.set_diag(1, b);
    full.set_diag(2, v);
    full.set_diag(3, v);
    full.set_corr_z(0, 1, c);
    full.set_corr_z(2, 3, std::sqrt(std::max(v * v - 1.0, 0.0)));

    Eigen::MatrixXd bs = Eigen::MatrixXd::Identity(8, 8);
    const double st = std::sqrt(tau), sr = std::sqrt(1.0 - tau);
    for (int q = 0; q < 2; ++q) {
        bs(2 + q, 2 + q) = st;
        bs(2 + q, 4 + q) = sr;
        bs(4 + q, 2 + q) = -sr;
        bs(4 + q, 4 + q) = st;
    }
    Eigen::MatrixXd g2 = bs * full.g * bs.transpose();

    // heterodyne on mode 1 (B2)
    Eigen::MatrixXd keep(6, 6), cross(6, 2), bm(2, 2);
    const int idx[6] = {0, 1, 4, 5, 6, 7};
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) keep(i, j) = g2(idx[i], idx[j]);
        cross(i, 0) = g2(idx[i], 2);
        cross(i, 1) = g2(idx[i], 3);
    }
    bm = g2.block(2, 2, 2, 2) + Eigen::Matrix2d::Identity();
    Eigen::MatrixXd cond = keep - cross * bm.inverse() * cross.transpose();
    return se - oracle_entropy(cond);
}

}  // namespace

TEST_CASE("entropy kernel G") {
    CHECK(entropy_g(0.0) == 0.0);
    CHECK(entropy_g(0.5) == doctest::Approx(1.3774437510817343).epsilon(1e-12));
    CHECK(entropy_g(1.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("mutual information formula and quadrature oracle") {
    CHECK(mutual_information(2.0, 1.0, 1.0, 0.0, 0.0) == doctest::Approx(1.0));  // SNR 1
    CHECK(mutual_information(6.0, 1.0, 1.0, 0.0, 0.0) == doctest::Approx(2.0));  // SNR 3

    const double i_tab = mutual_information(8.41, 0.028, 0.68, 0.06272, 0.212e-3);
    CHECK(i_tab == doctest::Approx(0.1078596).epsilon(1e-5));

    // Numeric Gaussian-channel capacity oracle: I = h(Y) - h(Z), entropies by
    // direct quadrature of -p log2 p over a wide grid.
    const double snr = (0.68 * 0.028 * 8.41 / 2.0) /
                       (1.0 + 0.06272 / 2.0 + 0.68 * 0.028 * 0.212e-3 / 2.0);
    auto gauss_entropy = [](double var) {
        const double sd = std::sqrt(var);
        const int n = 400001;
        const double lo = -40.0 * sd, hi = 40.0 * sd;
        const double dz = (hi - lo) / (n - 1);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = lo + i * dz;
            const double p = std::exp(-0.5 * z * z / var) / (sd * std::sqrt(2.0 * M_PI));
            if (p > 1e-300) acc -= p * std::log2(p) * dz;
        }
        return acc;
    };
    // two independent quadrature channels per symbol
    const double i_oracle = 2.0 * (gauss_entropy(1.0 + snr) - gauss_entropy(1.0));
    CHECK(std::abs(i_oracle - std::log2(1.0 + snr)) < 1e-9);
    CHECK(i_tab == doctest::Approx(std::log2(1.0 + snr)).epsilon(1e-12));
}

TEST_CASE("holevo bound against the independent covariance oracle") {
    const double vmod = 8.41, eta = 0.028, tau = 0.68, t = 0.06272, xi = 0.212e-3;
    for (auto conv : {AncillaConvention::quoted_t, AncillaConvention::clearance}) {
        const double chi = holevo_bound_trusted(vmod, eta, tau, t, xi, conv);
        const double chio = oracle_holevo(vmod, eta, tau, t, xi, conv);
        CHECK(chi == doctest::Approx(chio).epsilon(1e-9));
    }
    // Frozen reference value for the quoted-t convention.
    CHECK(holevo_bound_trusted(vmod, eta, tau, t, xi, AncillaConvention::quoted_t) ==
          doctest::Approx(0.0934254).epsilon(2e-5));

    // Untrusted reduction tau=1, t=0: closed-form two-mode heterodyne bound.
    const double V = vmod + 1.0;
    const double b = 1.0 + eta * vmod + eta * xi;
    const double c2 = eta * (V * V - 1.0);
    const double delta = V * V + b * b - 2.0 * c2;
    const double dd = V * b - c2;
    const double n1 = std::sqrt((delta + std::sqrt(delta * delta - 4.0 * dd * dd)) / 2.0);
    const double n2 = std::sqrt((delta - std::sqrt(delta * delta - 4.0 * dd * dd)) / 2.0);
    const double acond = V - c2 / (b + 1.0);
    const double chi_closed = entropy_g((n1 - 1.0) / 2.0) + entropy_g((n2 - 1.0) / 2.0) -
                              entropy_g((acond - 1.0) / 2.0);
    CHECK(holevo_bound_trusted(vmod, eta, 1.0, 0.0, xi) ==
          doctest::Approx(chi_closed).epsilon(1e-9));
    CHECK(chi_closed == doctest::Approx(0.1428747).epsilon(1e-5));

    // Nothing leaks when there is no untrusted channel.
    CHECK(holevo_bound_trusted(8.41, 1.0, 1.0, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("holevo monotonicity in xi and eta grids") {
    double prev = -1.0;
    for (double xi : {0.0, 1e-4, 5e-4, 2e-3, 1e-2}) {
        const double chi = holevo_bound_trusted(8.41, 0.028, 0.68, 0.06272, xi);
        CHECK(chi >= prev);
        prev = chi;
    }
}

TEST_CASE("finite size delta") {
    CHECK(finite_size_delta(950000000, 1e-10) ==
          doctest::Approx(0.0013285309522352749).epsilon(1e-12));
    // Delta(4n) = Delta(n) / 2
    CHECK(finite_size_delta(4 * 100000000LL, 1e-10) ==
          doctest::Approx(finite_size_delta(100000000LL, 1e-10) / 2.0).epsilon(1e-12));
    // n -> infinity: delta -> 0
    CHECK(finite_size_delta(1LL << 60, 1e-10) < 1e-6);
    CHECK_THROWS_AS(finite_size_delta(5000, 1e-10), std::domain_error);
}

TEST_CASE("xi rpn model") {
    CHECK(xi_rpn_model(0.019, 8.41, 0.0) == 0.0);
    CHECK(xi_rpn_model(0.019, 8.41, 1e-3) == doctest::Approx(1.5975e-4).epsilon(1e-4));
    // v_rpn -> infinity saturates at 2 T v_mod
    CHECK(xi_rpn_model(0.019, 8.41, 1e9) == doctest::Approx(2.0 * 0.019 * 8.41).epsilon(1e-12));
    CHECK_THROWS_AS(xi_rpn_model(0.019, 8.41, -1.0), std::domain_error);
}

namespace {
LinkEstimate table1_link() {
    LinkEstimate link;
    link.eta_hat = 0.028;
    link.xi_hat = 0.212e-3;
    link.n_used = 950000000LL;
    link.v_mod = 8.41;
    link.tau = 0.68;
    link.t_noise = 0.06272;
    link.resid_var = 1.0 + link.t_noise / 2.0 +
                     link.tau * link.eta_hat * link.xi_hat / 2.0;
    link.delta_fail = 1e-10;
    return link;
}

SecurityParams table1_sec() {
    SecurityParams sec;
    sec.beta = 0.925;
    sec.fer = 0.59;
    sec.delta_fail = 1e-10;
    sec.baud_hz = 1e8;
    // key block: symbols less the public sync prefix, scaled by (1-FER)
    sec.n_block = static_cast<long long>((950000000.0 - 9500000.0) * (1.0 - 0.59));
    return sec;
}
}  // namespace

TEST_CASE("secret key rate at the reference operating point") {
    const auto link = table1_link();
    const auto sec = table1_sec();

    const auto asym = secret_key_rate(link, sec, 8.41, RateMode::asymptotic);
    CHECK(asym.skr_asymptotic_bps > 25e3);

    const auto fin = secret_key_rate(link, sec, 8.41, RateMode::finite);
    CHECK(fin.skr_finite_bps > 0.0);
    CHECK(fin.skr_finite_bps <= asym.skr_asymptotic_bps);
    // ~25.4 kbit/s within the convention tolerance
    CHECK(fin.skr_finite_bps > 25.4e3 * 0.7);
    CHECK(fin.skr_finite_bps < 25.4e3 * 1.3);

    // clamp paths
    SecurityParams bad = sec;
    bad.fer = 1.0;
    CHECK(secret_key_rate(link, bad, 8.41, RateMode::finite).skr_finite_bps == 0.0);
    LinkEstimate noisy = link;
    noisy.xi_hat = 0.5;  // huge excess noise, residual kept consistent
    noisy.resid_var = 1.0 + noisy.t_noise / 2.0 +
                      noisy.tau * noisy.eta_hat * noisy.xi_hat / 2.0;
    const auto rep = secret_key_rate(noisy, sec, 8.41, RateMode::finite);
    CHECK(rep.skr_finite_bps == 0.0);
    CHECK(rep.negative_rate);
}

TEST_CASE("worst case never beats the point estimate") {
    const auto link = table1_link();
    const auto sec = table1_sec();
    const auto asym = secret_key_rate(link, sec, 8.41, RateMode::asymptotic);
    const auto fin = secret_key_rate(link, sec, 8.41, RateMode::finite);
    CHECK(fin.i_ab <= asym.i_ab);
    CHECK(fin.chi_e >= asym.chi_e);
}

TEST_CASE("skr vs distance curve shape") {
    const auto link = table1_link();
    const auto sec = table1_sec();
    std::vector<double> grid;
    for (double L = 0.0; L <= 150.0; L += 5.0) grid.push_back(L);
    double xing = 0.0;
    auto curve = skr_vs_distance(grid, link, sec, 8.41, 0.82, 0.146, &xing);

    REQUIRE(curve.size() == grid.size());
    for (size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].skr_asymptotic_bps <= curve[i - 1].skr_asymptotic_bps * (1 + 1e-9));
        CHECK(curve[i].skr_finite_bps <= curve[i - 1].skr_finite_bps * (1 + 1e-9) + 1e-9);
        CHECK(curve[i].skr_finite_bps <= curve[i].skr_asymptotic_bps + 1e-9);
    }
    // positive at 100 km, crossing beyond
    const auto& p100 = curve[20];
    CHECK(p100.length_km == 100.0);
    CHECK(p100.skr_finite_bps > 0.0);
    CHECK(xing > 100.0);
    CHECK(xing < 150.0);
    // L = 0 is the maximum
    CHECK(curve[0].skr_asymptotic_bps >= curve[1].skr_asymptotic_bps);
}

TEST_CASE("vmod optimization picks the reference operating point") {
    const auto link = table1_link();
    const auto sec = table1_sec();
    struct Pt {
        double v, b, f;
    };
    const std::vector<Pt> pts = {{7.50, 0.935, 0.95},
                                 {8.11, 0.930, 0.80},
                                 {8.41, 0.925, 0.59},
                                 {9.27, 0.900, 0.70}};
    std::vector<double> grid;
    for (auto& p : pts) grid.push_back(p.v);
    auto beta_model = [&](double v) {
        for (auto& p : pts)
            if (std::abs(p.v - v) < 1e-9) return p.b;
        return 0.9;
    };
    auto fer_model = [&](double v) {
        for (auto& p : pts)
            if (std::abs(p.v - v) < 1e-9) return p.f;
        return 0.5;
    };
    std::vector<VmodPoint> curve;
    const double best = vmod_optimize(grid, beta_model, fer_model, link, sec, &curve);
    CHECK(best == doctest::Approx(8.41));
    REQUIRE(curve.size() == 4);

    // flat beta / flat fer: argmax equals the unconstrained capacity optimum
    std::vector<double> wide;
    for (double v = 1.0; v <= 40.0; v += 0.5) wide.push_back(v);
    std::vector<VmodPoint> curve2;
    const double best2 = vmod_optimize(
        wide, [](double) { return 0.95; }, [](double) { return 0.0; }, link, sec, &curve2);
    double best_ref = wide.front(), best_skr = -1.0;
    for (double v : wide) {
        SecurityParams sp = sec;
        sp.beta = 0.95;
        sp.fer = 0.0;
        const double s = secret_key_rate(link, sp, v, RateMode::asymptotic).skr_asymptotic_bps;
        if (s > best_skr) {
            best_skr = s;
            best_ref = v;
        }
    }
    CHECK(best2 == doctest::Approx(best_ref));

    // single point grid
    CHECK(vmod_optimize({3.3}, [](double) { return 0.9; }, [](double) { return 0.1; }, link,
                        sec) == doctest::Approx(3.3));

    // scaling B rescales rates but not the argmax
    SecurityParams sec2 = sec;
    sec2.baud_hz *= 7.0;
    CHECK(vmod_optimize(grid, beta_model, fer_model, link, sec2) == doctest::Approx(8.41));
}
