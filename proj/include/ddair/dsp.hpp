#pragma once
#include <span>
#include <stdexcept>
#include <vector>

// offline receiver DSP: correlation synchronization against a known pilot
// waveform and windowed-sinc resampling onto the 2-samples-per-symbol grid.

namespace ddair {

struct SyncError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SyncEstimate {
    double delay = 0;   // integer_part + fractional_part, input samples
    long integer_part = 0;
    double fractional_part = 0; // in (-0.5, 0.5]
    double peak = 0;            // normalized correlation at the peak
};

// delay of `pilot` inside `received` maximizing normalized cross-correlation
// of intensities, refined by parabolic interpolation around the peak lag.
// Peak below 0.2 throws SyncError ("no sync").
SyncEstimate synchronize(std::span<const double> received,
                         std::span<const double> pilot);

struct ResampleResult {
    std::vector<double> y;  // alternating phase classes, y[0] on-symbol
    int trimmed_front = 0;  // output samples dropped at each edge (even,
    int trimmed_back = 0;   //  so the phase labels stay aligned)
};

// 64-tap windowed-sinc interpolation at t_k = delay + k * in_rate/(2*symbol_rate)
// (times in input-sample units). Output points whose kernel support leaves
// the input are trimmed and counted. Requires in_rate >= 2 * symbol_rate.
ResampleResult resample_to_2sps(std::span<const double> samples, double in_rate,
                                double symbol_rate, double delay_samples);

} // namespace ddair
