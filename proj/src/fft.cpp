#include "cvqkd/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace cvqkd {

namespace {

// FFTW plan creation is not thread-safe; execution with fftw_execute_dft on
// caller-owned buffers is. Plans are cached per (size, direction).
std::mutex g_plan_mutex;
std::map<std::pair<size_t, int>, fftw_plan> g_plans;

fftw_plan get_plan(size_t n, int sign) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;
    // Dummy aligned buffer for planning; FFTW_ESTIMATE does not touch data.
    fftw_complex* tmp = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), tmp, tmp, sign, FFTW_ESTIMATE);
    fftw_free(tmp);
    if (!plan) throw std::runtime_error("fftw planning failed");
    g_plans.emplace(key, plan);
    return plan;
}

std::vector<cplx> run(const std::vector<cplx>& in, int sign) {
    if (in.empty()) return {};
    std::vector<cplx> out(in.size());
    fftw_plan plan = get_plan(in.size(), sign);
    // std::complex<double> is layout-compatible with fftw_complex.
    fftw_execute_dft(plan,
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace

std::vector<cplx> fft(const std::vector<cplx>& in) { return run(in, FFTW_FORWARD); }

std::vector<cplx> ifft(const std::vector<cplx>& in) {
    auto out = run(in, FFTW_BACKWARD);
    const double s = 1.0 / static_cast<double>(in.size());
    for (auto& z : out) z *= s;
    return out;
}

std::vector<double> welch_psd(const std::vector<cplx>& x, size_t nfft) {
    if (nfft == 0 || x.size() < nfft) {
        throw std::invalid_argument("welch_psd: input shorter than nfft");
    }
    std::vector<double> psd(nfft, 0.0);
    std::vector<cplx> seg(nfft);
    size_t nseg = 0;
    for (size_t off = 0; off + nfft <= x.size(); off += nfft) {
        std::copy(x.begin() + off, x.begin() + off + nfft, seg.begin());
        auto s = fft(seg);
        for (size_t k = 0; k < nfft; ++k) psd[k] += std::norm(s[k]);
        ++nseg;
    }
    const double scale = 1.0 / (static_cast<double>(nseg) * static_cast<double>(nfft));
    for (auto& p : psd) p *= scale;
    return psd;
}

std::vector<cplx> xcorr_fft(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("xcorr_fft: size mismatch");
    auto fa = fft(a);
    auto fb = fft(b);
    for (size_t k = 0; k < fa.size(); ++k) fa[k] *= std::conj(fb[k]);
    return ifft(fa);
}

}  // namespace cvqkd
