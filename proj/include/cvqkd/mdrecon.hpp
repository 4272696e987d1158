#pragma once

#include <array>
#include <vector>

namespace cvqkd {

/// Multidimensional reconciliation over the division algebras (d = 1, 2, 4, 8).
/// For unit vectors u and s there is an m with |m| = 1 such that the
/// orthogonal map M(m) = sum_i m_i B_i sends u to s; the B_i are the
/// left-multiplication matrices of the algebra basis (octonions at d = 8).

/// Left-multiplication basis matrices, row-major d x d each.
std::vector<std::vector<double>> md_basis(int d);

/// Apply M(m) to v.
std::vector<double> md_apply(const std::vector<double>& m, const std::vector<double>& v);

/// Solve M(m) * (y/|y|) = s for m (|m| = 1). s must be +-1/sqrt(d) per
/// component. Throws std::domain_error for zero-norm y or unsupported d.
std::vector<double> md_map(const std::vector<double>& y, const std::vector<double>& s);

/// Per-component LLRs for s given the receiving side's vector x and the
/// disclosed mapping m. noise_var is the per-dimension variance of the
/// regression error between the two parties' vectors (in x units).
/// Positive LLR means s_i = +1/sqrt(d).
std::vector<double> md_demap(const std::vector<double>& x, const std::vector<double>& m,
                             double noise_var);

/// Binary-input AWGN capacity at per-dimension SNR (bits per dimension).
double biawgn_capacity(double snr);

}  // namespace cvqkd
