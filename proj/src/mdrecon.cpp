#include "cvqkd/mdrecon.hpp"

#include <cmath>
#include <stdexcept>

namespace cvqkd {

namespace {

bool valid_dim(int d) { return d == 1 || d == 2 || d == 4 || d == 8; }

// Cayley-Dickson product for dimension d in {1,2,4,8}.
// (a1,a2)(b1,b2) = (a1 b1 - conj(b2) a2, b2 a1 + a2 conj(b1)).
std::vector<double> cd_mul(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t d = a.size();
    if (d == 1) return {a[0] * b[0]};
    const size_t h = d / 2;
    std::vector<double> a1(a.begin(), a.begin() + h), a2(a.begin() + h, a.end());
    std::vector<double> b1(b.begin(), b.begin() + h), b2(b.begin() + h, b.end());
    auto conj = [](std::vector<double> v) {
        for (size_t i = 1; i < v.size(); ++i) v[i] = -v[i];
        return v;
    };
    auto sub = [](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> r(x.size());
        for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
        return r;
    };
    auto add = [](const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> r(x.size());
        for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
        return r;
    };
    auto lo = sub(cd_mul(a1, b1), cd_mul(conj(b2), a2));
    auto hi = add(cd_mul(b2, a1), cd_mul(a2, conj(b1)));
    lo.insert(lo.end(), hi.begin(), hi.end());
    return lo;
}

}  // namespace

std::vector<std::vector<double>> md_basis(int d) {
    if (!valid_dim(d)) throw std::domain_error("md_basis: d must be 1, 2, 4 or 8");
    std::vector<std::vector<double>> basis(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
        std::vector<double> ei(static_cast<size_t>(d), 0.0);
        ei[static_cast<size_t>(i)] = 1.0;
        // Column j of B_i is e_i * e_j.
        std::vector<double> bi(static_cast<size_t>(d) * d, 0.0);
        for (int j = 0; j < d; ++j) {
            std::vector<double> ej(static_cast<size_t>(d), 0.0);
            ej[static_cast<size_t>(j)] = 1.0;
            auto prod = cd_mul(ei, ej);
            for (int r = 0; r < d; ++r) {
                bi[static_cast<size_t>(r) * d + j] = prod[static_cast<size_t>(r)];
            }
        }
        basis[static_cast<size_t>(i)] = std::move(bi);
    }
    return basis;
}

std::vector<double> md_apply(const std::vector<double>& m, const std::vector<double>& v) {
    // M(m) v = m * v in the algebra.
    if (m.size() != v.size()) throw std::invalid_argument("md_apply: size mismatch");
    if (!valid_dim(static_cast<int>(m.size()))) {
        throw std::domain_error("md_apply: d must be 1, 2, 4 or 8");
    }
    return cd_mul(m, v);
}

namespace {
const std::vector<std::vector<double>>& cached_basis(int d) {
    static const auto b1 = md_basis(1);
    static const auto b2 = md_basis(2);
    static const auto b4 = md_basis(4);
    static const auto b8 = md_basis(8);
    switch (d) {
        case 1: return b1;
        case 2: return b2;
        case 4: return b4;
        default: return b8;
    }
}
}  // namespace

std::vector<double> md_map(const std::vector<double>& y, const std::vector<double>& s) {
    const int d = static_cast<int>(y.size());
    if (!valid_dim(d) || s.size() != y.size()) {
        throw std::domain_error("md_map: d must be 1, 2, 4 or 8");
    }
    double ny = 0.0;
    for (double v : y) ny += v * v;
    ny = std::sqrt(ny);
    if (ny <= 0.0) throw std::domain_error("md_map: zero-norm y");

    std::vector<double> u(y.size());
    for (size_t i = 0; i < y.size(); ++i) u[i] = y[i] / ny;

    // m = Phi(u)^T s where column i of Phi(u) is B_i u = e_i * u; for unit u
    // the columns are orthonormal.
    const auto& basis = cached_basis(d);
    std::vector<double> m(y.size(), 0.0);
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int r = 0; r < d; ++r) {
            double col = 0.0;  // (B_i u)_r
            for (int c = 0; c < d; ++c) {
                col += basis[static_cast<size_t>(i)][static_cast<size_t>(r) * d + c] *
                       u[static_cast<size_t>(c)];
            }
            acc += col * s[static_cast<size_t>(r)];
        }
        m[static_cast<size_t>(i)] = acc;
    }
    return m;
}

std::vector<double> md_demap(const std::vector<double>& x, const std::vector<double>& m,
                             double noise_var) {
    const int d = static_cast<int>(x.size());
    if (!valid_dim(d) || m.size() != x.size()) {
        throw std::domain_error("md_demap: d must be 1, 2, 4 or 8");
    }
    if (noise_var < 0.0) throw std::domain_error("md_demap: negative noise variance");
    double nx2 = 0.0;
    for (double v : x) nx2 += v * v;
    if (nx2 <= 0.0) throw std::domain_error("md_demap: zero-norm x");

    const double nx = std::sqrt(nx2);
    std::vector<double> u(x.size());
    for (size_t i = 0; i < x.size(); ++i) u[i] = x[i] / nx;
    auto r = md_apply(m, u);

    if (noise_var == 0.0) {
        // Noiseless channel: signs are exact, saturate.
        std::vector<double> llr(r.size());
        for (size_t i = 0; i < r.size(); ++i) llr[i] = r[i] >= 0.0 ? 1e9 : -1e9;
        return llr;
    }
    // Virtual channel r = kappa s + w: with x = alpha y + e (e isotropic,
    // per-dim variance noise_var), kappa = alpha|y|/|x| and
    // Var(w_i) = noise_var / |x|^2.
    const double sw2 = noise_var / nx2;
    const double kappa = std::sqrt(std::max(1.0 - static_cast<double>(d) * sw2, 1e-12));
    const double scale = 2.0 * kappa / (std::sqrt(static_cast<double>(d)) * sw2);
    std::vector<double> llr(r.size());
    for (size_t i = 0; i < r.size(); ++i) llr[i] = scale * r[i];
    return llr;
}

double biawgn_capacity(double snr) {
    if (snr <= 0.0) return 0.0;
    // y = a + z, a = sqrt(snr), z ~ N(0,1):
    // C = 1 - E log2(1 + exp(-2 a (a + z))).
    const double a = std::sqrt(snr);
    const int n = 2001;
    const double lo = -8.0, hi = 8.0;
    const double dz = (hi - lo) / (n - 1);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = lo + i * dz;
        const double w = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        const double e = -2.0 * a * (a + z);
        // log1p-safe evaluation of log2(1 + exp(e))
        const double v = e > 30.0 ? e / std::log(2.0)
                                  : std::log1p(std::exp(std::min(e, 30.0))) / std::log(2.0);
        acc += w * v * dz;
    }
    return 1.0 - acc;
}

}  // namespace cvqkd
