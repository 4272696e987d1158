#pragma once

#include <vector>

#include "cvqkd/frame.hpp"

namespace cvqkd {

/// Complex FFT of arbitrary length (FFTW backend; plans cached per size).
/// Forward uses exp(-i 2 pi k n / N), inverse is normalized by 1/N.
std::vector<cplx> fft(const std::vector<cplx>& in);
std::vector<cplx> ifft(const std::vector<cplx>& in);

/// Averaged periodogram (Welch, rectangular window, non-overlapping
/// segments). Returns per-bin power for a complex input; bin k maps to
/// frequency k/nfft * sample_rate (wrapping above nfft/2).
std::vector<double> welch_psd(const std::vector<cplx>& x, size_t nfft);

/// Circular cross-correlation of a against b via FFT:
/// r[k] = sum_n a[n] * conj(b[n-k]).
std::vector<cplx> xcorr_fft(const std::vector<cplx>& a, const std::vector<cplx>& b);

}  // namespace cvqkd
