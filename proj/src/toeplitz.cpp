#include "cvqkd/toeplitz.hpp"

#include <cmath>
#include <stdexcept>

#include "cvqkd/fft.hpp"

namespace cvqkd {

std::vector<uint8_t> toeplitz_extract(const std::vector<uint8_t>& bits,
                                      const std::vector<uint8_t>& seed_bits,
                                      size_t out_len) {
    const size_t in_len = bits.size();
    if (out_len > in_len) {
        throw std::domain_error("toeplitz_extract: out_len exceeds input length");
    }
    if (out_len == 0 || in_len == 0) return {};
    if (seed_bits.size() != in_len + out_len - 1) {
        throw std::invalid_argument("toeplitz_extract: seed must be in+out-1 bits");
    }

    // out[i] = conv(seed, in)[i + in_len - 1] mod 2. Counting convolution in
    // doubles is exact here: coefficients are bounded by in_len << 2^53.
    size_t m = 1;
    while (m < seed_bits.size() + in_len) m <<= 1;
    std::vector<cplx> a(m, cplx(0, 0)), b(m, cplx(0, 0));
    for (size_t i = 0; i < seed_bits.size(); ++i) a[i] = cplx(seed_bits[i] ? 1.0 : 0.0, 0.0);
    for (size_t j = 0; j < in_len; ++j) b[j] = cplx(bits[j] ? 1.0 : 0.0, 0.0);
    auto fa = fft(a);
    auto fb = fft(b);
    for (size_t k = 0; k < m; ++k) fa[k] *= fb[k];
    auto conv = ifft(fa);

    std::vector<uint8_t> out(out_len);
    for (size_t i = 0; i < out_len; ++i) {
        const long long c = std::llround(conv[i + in_len - 1].real());
        out[i] = static_cast<uint8_t>(c & 1);
    }
    return out;
}

}  // namespace cvqkd
