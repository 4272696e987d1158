#include "cvqkd/security.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cvqkd/rng.hpp"

namespace cvqkd {

namespace {

constexpr double kSymplecticTol = 1e-9;

// Per-quadrature covariance blocks for the four-mode system (A, B1, F0, G).
// x and p decouple: the p-block equals the x-block conjugated by the sign
// flips of the sigma_z correlations, so the symplectic spectrum comes from
// eig(Gx * Gp).
struct QuadBlocks {
    Eigen::Matrix4d x = Eigen::Matrix4d::Zero();
    Eigen::Matrix4d p = Eigen::Matrix4d::Zero();
};

void check_params(double v_mod, double eta, double tau, double t, double xi) {
    if (v_mod <= 0.0) throw std::domain_error("holevo: v_mod must be > 0");
    if (eta <= 0.0 || eta > 1.0) throw std::domain_error("holevo: eta outside (0,1]");
    if (tau <= 0.0 || tau > 1.0) throw std::domain_error("holevo: tau outside (0,1]");
    if (t < 0.0) throw std::domain_error("holevo: negative t");
    if (xi < 0.0) throw std::domain_error("holevo: negative xi");
}

std::vector<double> symplectic_from_blocks(const Eigen::MatrixXd& gx,
                                           const Eigen::MatrixXd& gp) {
    Eigen::MatrixXd m = gx * gp;
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    std::vector<double> nus;
    nus.reserve(static_cast<size_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i) {
        const double lam = es.eigenvalues()[i].real();
        const double nu = std::sqrt(std::max(lam, 0.0));
        if (nu < 1.0 - kSymplecticTol) {
            throw std::domain_error("holevo: non-physical covariance matrix");
        }
        nus.push_back(std::max(nu, 1.0));
    }
    return nus;
}

double entropy_sum(const std::vector<double>& nus) {
    double s = 0.0;
    for (double nu : nus) s += entropy_g((nu - 1.0) / 2.0);
    return s;
}

}  // namespace

double entropy_g(double x) {
    if (x <= 0.0) return 0.0;
    return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

double mutual_information(double v_mod, double eta, double tau, double t, double xi) {
    const double snr =
        (tau * eta * v_mod / 2.0) / (1.0 + t / 2.0 + tau * eta * xi / 2.0);
    return std::log2(1.0 + snr);
}

double holevo_bound_trusted(double v_mod, double eta, double tau, double t,
                            double xi, AncillaConvention conv) {
    check_params(v_mod, eta, tau, t, xi);

    const double V = v_mod + 1.0;
    const double a = V;
    const double b = 1.0 + eta * v_mod + eta * xi;  // channel-output mode variance
    const double c = std::sqrt(eta * (V * V - 1.0));

    // S(E) = S(A, B1): Eve purifies the channel only.
    Eigen::Matrix2d gx2, gp2;
    gx2 << a, c, c, b;
    gp2 << a, -c, -c, b;
    const double s_e = entropy_sum(symplectic_from_blocks(gx2, gp2));

    // Trusted detector: beamsplitter tau on (B1, F0) with (F0, G) an EPR pair
    // of variance v, then heterodyne on the transmitted port.
    double v_anc = 1.0;
    if (tau < 1.0) {
        const double t_eff = (conv == AncillaConvention::quoted_t) ? 2.0 * t : t;
        v_anc = 1.0 + t_eff / (1.0 - tau);
    } else if (t > 0.0) {
        throw std::domain_error("holevo: tau = 1 with t > 0 has no ancilla model");
    }
    const double w = std::sqrt(std::max(v_anc * v_anc - 1.0, 0.0));

    // Mode order (A, B1, F0, G); correlations through sigma_z flip sign in p.
    QuadBlocks g;
    g.x(0, 0) = a;
    g.x(1, 1) = b;
    g.x(2, 2) = v_anc;
    g.x(3, 3) = v_anc;
    g.x(0, 1) = g.x(1, 0) = c;
    g.x(2, 3) = g.x(3, 2) = w;
    g.p = g.x;
    g.p(0, 1) = g.p(1, 0) = -c;
    g.p(2, 3) = g.p(3, 2) = -w;

    // Beamsplitter: B2 = sqrt(tau) B1 + sqrt(1-tau) F0, F = -sqrt(1-tau) B1 + sqrt(tau) F0.
    Eigen::Matrix4d bs = Eigen::Matrix4d::Identity();
    const double st = std::sqrt(tau), sr = std::sqrt(1.0 - tau);
    bs(1, 1) = st;
    bs(1, 2) = sr;
    bs(2, 1) = -sr;
    bs(2, 2) = st;
    Eigen::Matrix4d gx = bs * g.x * bs.transpose();
    Eigen::Matrix4d gp = bs * g.p * bs.transpose();

    // Heterodyne on B2 (index 1): Schur complement with the +1 vacuum unit,
    // applied per quadrature block. Remaining modes: A, F, G.
    auto condition = [](const Eigen::Matrix4d& m) {
        Eigen::Matrix3d keep;
        Eigen::Vector3d sig;
        const int idx[3] = {0, 2, 3};
        for (int i = 0; i < 3; ++i) {
            sig(i) = m(idx[i], 1);
            for (int j = 0; j < 3; ++j) keep(i, j) = m(idx[i], idx[j]);
        }
        return Eigen::Matrix3d(keep - sig * sig.transpose() / (m(1, 1) + 1.0));
    };
    const double s_cond =
        entropy_sum(symplectic_from_blocks(condition(gx), condition(gp)));

    return std::max(s_e - s_cond, 0.0);
}

double finite_size_delta(long long n_block, double eps_bar) {
    if (n_block <= 10000) {
        throw std::domain_error("finite_size_delta: n_block must exceed 1e4");
    }
    if (eps_bar <= 0.0 || eps_bar >= 1.0) {
        throw std::domain_error("finite_size_delta: eps_bar outside (0,1)");
    }
    return 7.0 * std::sqrt(std::log2(2.0 / eps_bar) / static_cast<double>(n_block));
}

SecurityReport secret_key_rate(const LinkEstimate& link, const SecurityParams& sec,
                               double v_mod, RateMode mode) {
    SecurityReport rep;
    rep.link = link;
    rep.params = sec;

    const double tau = link.tau;
    const double t = link.t_noise;
    const double b_rate = sec.baud_hz * (1.0 - sec.fer);

    const double xi_hat = std::max(link.xi_hat, 0.0);
    const double i_asym = mutual_information(v_mod, link.eta_hat, tau, t, xi_hat);
    const double chi_asym =
        holevo_bound_trusted(v_mod, link.eta_hat, tau, t, xi_hat, sec.ancilla);
    rep.skr_asymptotic_bps =
        std::max(b_rate * (sec.beta * i_asym - chi_asym), 0.0);

    if (mode == RateMode::asymptotic) {
        rep.i_ab = i_asym;
        rep.chi_e = chi_asym;
        rep.delta_n = 0.0;
        rep.negative_rate = sec.beta * i_asym - chi_asym < 0.0;
        return rep;
    }

    LinkEstimate wc = link;
    if (!wc.bounded) {
        if (sec.split_delta) wc.delta_fail = sec.delta_fail / 2.0;
        wc = worst_case_bounds(wc);
    }
    const double xi_up = std::max(wc.xi_up, 0.0);
    const double eps = sec.eps_bar > 0.0 ? sec.eps_bar : sec.delta_fail;
    long long nb = sec.n_block;
    if (nb <= 0) {
        nb = static_cast<long long>(static_cast<double>(link.n_used) * (1.0 - sec.fer));
    }
    rep.delta_n = finite_size_delta(nb, eps);
    rep.i_ab = mutual_information(v_mod, wc.eta_low, tau, t, xi_up);
    rep.chi_e = holevo_bound_trusted(v_mod, wc.eta_low, tau, t, xi_up, sec.ancilla);
    const double margin = sec.beta * rep.i_ab - rep.chi_e - rep.delta_n;
    rep.negative_rate = margin < 0.0;
    rep.skr_finite_bps = std::max(b_rate * margin, 0.0);
    rep.link = wc;
    return rep;
}

double xi_rpn_model(double t_total, double v_mod, double v_rpn) {
    if (v_rpn < 0.0) throw std::domain_error("xi_rpn_model: negative v_rpn");
    return 2.0 * t_total * v_mod * (1.0 - std::exp(-v_rpn / 2.0));
}

std::vector<DistancePoint> skr_vs_distance(const std::vector<double>& lengths_km,
                                           const LinkEstimate& link,
                                           const SecurityParams& sec, double v_mod,
                                           double coupling, double atten_db_per_km,
                                           double* zero_crossing_km) {
    std::vector<DistancePoint> out;
    out.reserve(lengths_km.size());
    for (double L : lengths_km) {
        LinkEstimate le = link;
        le.eta_hat = coupling * std::pow(10.0, -atten_db_per_km * L / 10.0);
        le.bounded = false;
        DistancePoint pt;
        pt.length_km = L;
        pt.eta = le.eta_hat;
        pt.skr_asymptotic_bps =
            secret_key_rate(le, sec, v_mod, RateMode::asymptotic).skr_asymptotic_bps;
        auto fin = secret_key_rate(le, sec, v_mod, RateMode::finite);
        pt.skr_finite_bps = fin.negative_rate
                                ? sec.baud_hz * (1.0 - sec.fer) *
                                      (sec.beta * fin.i_ab - fin.chi_e - fin.delta_n)
                                : fin.skr_finite_bps;
        out.push_back(pt);
    }
    if (zero_crossing_km) {
        *zero_crossing_km = std::numeric_limits<double>::quiet_NaN();
        for (size_t i = 1; i < out.size(); ++i) {
            const double y0 = out[i - 1].skr_finite_bps, y1 = out[i].skr_finite_bps;
            if (y0 > 0.0 && y1 <= 0.0) {
                const double f = y0 / (y0 - y1);
                *zero_crossing_km =
                    out[i - 1].length_km + f * (out[i].length_km - out[i - 1].length_km);
                break;
            }
        }
    }
    return out;
}

double vmod_optimize(const std::vector<double>& v_mod_grid,
                     const std::function<double(double)>& beta_model,
                     const std::function<double(double)>& fer_model,
                     const LinkEstimate& link, const SecurityParams& sec,
                     std::vector<VmodPoint>* curve) {
    if (v_mod_grid.empty()) {
        throw std::invalid_argument("vmod_optimize: empty grid");
    }
    double best_v = v_mod_grid.front();
    double best_skr = -std::numeric_limits<double>::infinity();
    if (curve) curve->clear();
    for (double vm : v_mod_grid) {
        SecurityParams sp = sec;
        sp.beta = beta_model(vm);
        sp.fer = fer_model(vm);
        const auto rep = secret_key_rate(link, sp, vm, RateMode::asymptotic);
        if (curve) curve->push_back({vm, sp.beta, sp.fer, rep.skr_asymptotic_bps});
        if (rep.skr_asymptotic_bps > best_skr) {
            best_skr = rep.skr_asymptotic_bps;
            best_v = vm;
        }
    }
    return best_v;
}

}  // namespace cvqkd
