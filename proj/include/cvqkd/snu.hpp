#pragma once

#include <span>

#include "cvqkd/frame.hpp"

namespace cvqkd {

/// Calibrate the shot-noise unit from vacuum (signal off, LO on) and
/// electronic (both off) acquisitions. snu_scale is the pure shot-noise
/// variance in ADC units; frames are rescaled into SNU by 1/sqrt(snu_scale).
/// Throws std::runtime_error when the vacuum level does not clear the
/// electronic level.
CalibrationRecord snu_calibrate(std::span<const SampleFrame> vacuum_frames,
                                std::span<const SampleFrame> electronic_frames);

/// Rescale an adc_counts frame into snu_normalized units.
SampleFrame to_snu(const SampleFrame& frame, const CalibrationRecord& cal);

}  // namespace cvqkd
