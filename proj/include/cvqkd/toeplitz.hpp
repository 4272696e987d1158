#pragma once

#include <cstdint>
#include <vector>

namespace cvqkd {

/// Toeplitz extractor over GF(2): out[i] = XOR_j T[i][j] & in[j] with
/// T[i][j] = seed[i - j + in_len - 1]. seed length must equal
/// in_len + out_len - 1; out_len must not exceed in_len. FFT-backed integer
/// convolution reduced mod 2.
std::vector<uint8_t> toeplitz_extract(const std::vector<uint8_t>& bits,
                                      const std::vector<uint8_t>& seed_bits,
                                      size_t out_len);

}  // namespace cvqkd
