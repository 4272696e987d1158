#include "cvqkd/frame.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace cvqkd {

namespace {

constexpr char kMagic[4] = {'C', 'V', 'Q', 'F'};
constexpr uint16_t kVersion = 1;

void put_u16(uint8_t* p, uint16_t v) {
    p[0] = static_cast<uint8_t>(v & 0xff);
    p[1] = static_cast<uint8_t>(v >> 8);
}

void put_u32(uint8_t* p, uint32_t v) {
    p[0] = static_cast<uint8_t>(v & 0xff);
    p[1] = static_cast<uint8_t>((v >> 8) & 0xff);
    p[2] = static_cast<uint8_t>((v >> 16) & 0xff);
    p[3] = static_cast<uint8_t>(v >> 24);
}

uint16_t get_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_frame(const std::string& path, const SampleFrame& frame) {
    if (frame.samples.empty()) {
        throw std::invalid_argument("write_frame: empty frame");
    }
    if (frame.samples.size() > 0xffffffffull) {
        throw std::invalid_argument("write_frame: frame too large for format");
    }
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("write_frame: cannot open " + path);

    uint8_t hdr[16];
    std::memcpy(hdr, kMagic, 4);
    put_u16(hdr + 4, kVersion);
    put_u16(hdr + 6, static_cast<uint16_t>(frame.unit));
    put_u32(hdr + 8, static_cast<uint32_t>(frame.samples.size()));
    put_u32(hdr + 12, static_cast<uint32_t>(frame.sample_rate_hz / 1e3));
    if (std::fwrite(hdr, 1, 16, f.get()) != 16) {
        throw std::runtime_error("write_frame: header write failed");
    }

    // float32 LE interleaved payload; buffered in chunks.
    constexpr size_t kChunk = 1 << 16;
    std::vector<float> buf;
    buf.reserve(2 * kChunk);
    for (size_t i = 0; i < frame.samples.size(); i += kChunk) {
        const size_t n = std::min(kChunk, frame.samples.size() - i);
        buf.resize(2 * n);
        for (size_t j = 0; j < n; ++j) {
            buf[2 * j] = static_cast<float>(frame.samples[i + j].real());
            buf[2 * j + 1] = static_cast<float>(frame.samples[i + j].imag());
        }
        if (std::fwrite(buf.data(), sizeof(float), 2 * n, f.get()) != 2 * n) {
            throw std::runtime_error("write_frame: payload write failed");
        }
    }
}

SampleFrame read_frame(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("read_frame: cannot open " + path);

    uint8_t hdr[16];
    if (std::fread(hdr, 1, 16, f.get()) != 16) {
        throw std::runtime_error("read_frame: truncated header");
    }
    if (std::memcmp(hdr, kMagic, 4) != 0) {
        throw std::runtime_error("read_frame: bad magic");
    }
    if (get_u16(hdr + 4) != kVersion) {
        throw std::runtime_error("read_frame: unsupported version");
    }
    const uint16_t unit = get_u16(hdr + 6);
    if (unit > 1) throw std::runtime_error("read_frame: bad unit code");

    SampleFrame frame;
    frame.unit = static_cast<FrameUnit>(unit);
    const uint32_t count = get_u32(hdr + 8);
    frame.sample_rate_hz = static_cast<double>(get_u32(hdr + 12)) * 1e3;
    if (count == 0) throw std::runtime_error("read_frame: zero sample count");

    frame.samples.resize(count);
    constexpr size_t kChunk = 1 << 16;
    std::vector<float> buf(2 * kChunk);
    for (size_t i = 0; i < count; i += kChunk) {
        const size_t n = std::min(kChunk, static_cast<size_t>(count) - i);
        if (std::fread(buf.data(), sizeof(float), 2 * n, f.get()) != 2 * n) {
            throw std::runtime_error("read_frame: truncated payload");
        }
        for (size_t j = 0; j < n; ++j) {
            frame.samples[i + j] = cplx(buf[2 * j], buf[2 * j + 1]);
        }
    }
    return frame;
}

double quadrature_variance(const std::vector<cplx>& v) {
    if (v.size() < 2) throw std::invalid_argument("quadrature_variance: need >= 2 samples");
    double mr = 0.0, mi = 0.0;
    for (const auto& z : v) {
        mr += z.real();
        mi += z.imag();
    }
    const double n = static_cast<double>(v.size());
    mr /= n;
    mi /= n;
    double acc = 0.0;
    for (const auto& z : v) {
        const double dr = z.real() - mr;
        const double di = z.imag() - mi;
        acc += dr * dr + di * di;
    }
    // Two quadratures per complex sample: average them with n-1 each.
    return acc / (2.0 * (n - 1.0));
}

}  // namespace cvqkd
