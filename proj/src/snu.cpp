#include "cvqkd/snu.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvqkd {

namespace {

double mean_frame_variance(std::span<const SampleFrame> frames, const char* what) {
    if (frames.empty()) {
        throw std::invalid_argument(std::string("snu_calibrate: no ") + what + " frames");
    }
    double acc = 0.0;
    for (const auto& f : frames) {
        if (f.unit != FrameUnit::adc_counts) {
            throw std::invalid_argument("snu_calibrate: frames must be in adc_counts");
        }
        acc += quadrature_variance(f.samples);
    }
    return acc / static_cast<double>(frames.size());
}

}  // namespace

CalibrationRecord snu_calibrate(std::span<const SampleFrame> vacuum_frames,
                                std::span<const SampleFrame> electronic_frames) {
    CalibrationRecord cal;
    cal.vacuum_variance = mean_frame_variance(vacuum_frames, "vacuum");
    cal.electronic_variance = mean_frame_variance(electronic_frames, "electronic");
    cal.snu_scale = cal.vacuum_variance - cal.electronic_variance;
    if (cal.snu_scale <= 0.0) {
        throw std::runtime_error("snu_calibrate: vacuum level below electronic level");
    }
    cal.clearance_db = cal.electronic_variance > 0.0
                           ? 10.0 * std::log10(cal.vacuum_variance / cal.electronic_variance)
                           : std::numeric_limits<double>::infinity();
    return cal;
}

SampleFrame to_snu(const SampleFrame& frame, const CalibrationRecord& cal) {
    if (frame.unit == FrameUnit::snu_normalized) return frame;
    if (cal.snu_scale <= 0.0) throw std::invalid_argument("to_snu: bad calibration");
    SampleFrame out = frame;
    const double s = 1.0 / std::sqrt(cal.snu_scale);
    for (auto& z : out.samples) z *= s;
    out.unit = FrameUnit::snu_normalized;
    return out;
}

}  // namespace cvqkd
