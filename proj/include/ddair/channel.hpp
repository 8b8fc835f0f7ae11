#pragma once
#include <cstdint>
#include <string>
#include <vector>
#include "ddair/mathutil.hpp"

namespace ddair {

struct PulseParams {
    double symbol_rate = 30e9; // Bd
    double rolloff = 0.2;
    int span_symbols = 16; // one-sided, taps cover [-span, +span] symbols
};

struct FiberParams {
    double length_km = 0.0;
    double dispersion_ps_nm_km = 17.0;
    double lambda_nm = 1550.0;
    double atten_db_km = 0.2;
};

struct RxParams {
    double bw_3db_hz = 70e9; // 4th-order lowpass magnitude
};

// taps at T/2 spacing, odd count, center index (M-1)/2 <-> t = 0
struct ImpulseResponse {
    std::vector<cplx> taps;
    double sample_rate = 0.0;
    double discarded_energy_frac = 0.0;
    std::string provenance;

    int center() const { return (int(taps.size()) - 1) / 2; }
};

// per-phase-class noise model; index 0 = on-symbol samples, 1 = between
struct NoiseSpec {
    cplx mu_pre[2] = {{0, 0}, {0, 0}};
    double sigma2_pre[2] = {0, 0};  // E|n1|^2 per sample (circular complex)
    double mu_post[2] = {0, 0};
    double sigma2_post[2] = {0, 0}; // real post-detector variance
};

struct ReceivedBlock {
    std::vector<double> y; // 2n samples, strictly alternating, y[0] on-symbol
    double sample_rate = 0.0;
    double symbol_rate = 0.0;
    uint64_t seed = 0;
    std::string provenance;

    size_t n_symbols() const { return y.size() / 2; }
};

// time-domain raised cosine, t in units of T; removable singularities handled
double rc_pulse_value(double t_over_T, double alpha);

// RC taps at T/2 spacing from the analytic formula
std::vector<double> raised_cosine_taps(const PulseParams& p);

double beta2_s2_per_m(const FiberParams& f);

// all-pass: exp(j beta2 L (2 pi f)^2 / 2)
cplx cd_frequency_response(double f_hz, const FiberParams& f);

double rx_lowpass_mag(double f_hz, const RxParams& r);

// frequency-domain product RC * CD * RX sampled at 2/T, inverse transformed,
// truncated to a centered odd window keeping discarded energy <= 1e-6;
// extra_atten_db is intensity dB (field gets half) on top of fiber loss
ImpulseResponse build_impulse_response(const PulseParams& p, const FiberParams& f,
                                       const RxParams& r, double extra_atten_db = 0.0);

enum class MzmTransfer { ideal_linear, sine_field };

struct MzmParams {
    MzmTransfer transfer = MzmTransfer::ideal_linear;
    double v_pi = 1.0;
    double bias = 1.0; // bias = v_pi is the null point
};

// field transmittance cos(pi (bias + v) / (2 v_pi)) for sine_field
double mzm_field(double drive_v, const MzmParams& m);

// scales so mean |field|^2 equals the dBm target (mW units); returns gain
double scale_to_launch_power(std::vector<cplx>& field, double launch_dbm);

// centered convolution, output length = input length, zero-padded borders;
// border samples are only trustworthy away from the edges
std::vector<cplx> apply_channel(const std::vector<double>& x, const ImpulseResponse& h);
std::vector<cplx> apply_channel(const std::vector<cplx>& x, const ImpulseResponse& h);

// y_k = |f_k + mu_pre[p] + n1|^2 + mu_post[p] + n2,  p = k & 1
ReceivedBlock simulate_capture(const std::vector<cplx>& field, const NoiseSpec& ns,
                               double symbol_rate, uint64_t seed);

// in-place FFT helper (any length); inverse includes the 1/N factor
void fft_inplace(std::vector<cplx>& v, bool inverse);

} // namespace ddair
