#pragma once
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>
#include "ddair/aux_density.hpp"

// binary capture files ("DDCAP1"), the plain-text parameter file, and the
// key = value config reader. All payloads are little-endian 64-bit floats.

namespace ddair {

enum class CaptureErrc {
    io,             // open/short write
    bad_magic,
    truncated_header,
    truncated_payload,
    rate_inconsistent, // sample_rate < 2 * symbol_rate (or nonpositive)
    count_mismatch,    // header count does not match the payload
};

struct CaptureIoError : std::runtime_error {
    CaptureErrc code;
    CaptureIoError(CaptureErrc c, const std::string& what)
        : std::runtime_error(what), code(c) {}
};

// layout: magic[6] | u16 flags | f64 sample_rate | f64 symbol_rate |
//         u64 sample_count | payload. Complex payloads interleave re,im and
//         count each pair as one sample. flags: bit0 complex, bit1 the
//         samples are already phase-aligned at 2 SPS (y[0] on-symbol).
struct Capture {
    std::vector<double> samples;
    bool complex_field = false;
    bool phase_aligned_2sps = false;
    double sample_rate = 0; // Sa/s
    double symbol_rate = 0; // Bd

    std::uint64_t sample_count() const {
        return samples.size() / (complex_field ? 2 : 1);
    }
};

void write_capture(const std::string& path, const Capture& cap);
Capture read_capture(const std::string& path);

// fitted-model parameter file: key = value lines, taps as "re,im"
void write_params(const std::string& path, const AuxChannelParams& params);
AuxChannelParams read_params(const std::string& path);

// key = value config with [section] headers; keys become "section.key".
// '#' starts a comment; unknown structure raises invalid_argument.
std::map<std::string, std::string> parse_kv_file(const std::string& path);

} // namespace ddair
