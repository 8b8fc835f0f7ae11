#include "ddair/channel.hpp"
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <fftw3.h>

namespace ddair {

static double sinc(double x) {
    if (x == 0.0) return 1.0;
    double px = M_PI * x;
    return std::sin(px) / px;
}

double rc_pulse_value(double t, double alpha) {
    if (t == 0.0) return 1.0;
    if (alpha > 0.0) {
        double edge = 1.0 / (2.0 * alpha);
        if (std::fabs(std::fabs(t) - edge) < 1e-10)
            return (M_PI / 4.0) * sinc(edge);
    }
    double denom = 1.0 - (2.0 * alpha * t) * (2.0 * alpha * t);
    return sinc(t) * std::cos(M_PI * alpha * t) / denom;
}

std::vector<double> raised_cosine_taps(const PulseParams& p) {
    int half = 2 * p.span_symbols; // T/2 steps per side
    std::vector<double> h(2 * half + 1);
    for (int k = -half; k <= half; ++k)
        h[k + half] = rc_pulse_value(0.5 * k, p.rolloff);
    return h;
}

double beta2_s2_per_m(const FiberParams& f) {
    double d = f.dispersion_ps_nm_km * 1e-6; // s/m^2
    double lam = f.lambda_nm * 1e-9;
    return -d * lam * lam / (2.0 * M_PI * 299792458.0);
}

cplx cd_frequency_response(double f_hz, const FiberParams& f) {
    double b2 = beta2_s2_per_m(f);
    double w = 2.0 * M_PI * f_hz;
    double phi = 0.5 * b2 * f.length_km * 1e3 * w * w;
    return {std::cos(phi), std::sin(phi)};
}

double rx_lowpass_mag(double f_hz, const RxParams& r) {
    double u = f_hz / r.bw_3db_hz;
    double u2 = u * u;
    return 1.0 / std::sqrt(1.0 + u2 * u2 * u2 * u2);
}

void fft_inplace(std::vector<cplx>& v, bool inverse) {
    int n = int(v.size());
    fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(v.data()),
                                      reinterpret_cast<fftw_complex*>(v.data()),
                                      inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    if (inverse) {
        double inv = 1.0 / n;
        for (auto& z : v) z *= inv;
    }
}

static double rc_spectrum_shape(double f_hz, const PulseParams& p) {
    double t_sym = 1.0 / p.symbol_rate;
    double af = std::fabs(f_hz);
    double f1 = (1.0 - p.rolloff) / (2.0 * t_sym);
    double f2 = (1.0 + p.rolloff) / (2.0 * t_sym);
    if (af <= f1) return 1.0;
    if (af >= f2) return 0.0;
    return 0.5 * (1.0 + std::cos(M_PI * t_sym / p.rolloff * (af - f1)));
}

ImpulseResponse build_impulse_response(const PulseParams& p, const FiberParams& f,
                                       const RxParams& r, double extra_atten_db) {
    const int n = 32768;
    const double fs = 2.0 * p.symbol_rate;
    std::vector<cplx> spec(n);
    for (int k = 0; k < n; ++k) {
        double fr = (k <= n / 2 ? k : k - n) * fs / n;
        spec[k] = 2.0 * rc_spectrum_shape(fr, p) * rx_lowpass_mag(fr, r)
                * cd_frequency_response(fr, f);
    }
    fft_inplace(spec, true);

    double total_e = 0.0;
    for (const auto& z : spec) total_e += std::norm(z);

    // grow the centered window until clipped energy is negligible
    int half = 2 * p.span_symbols;
    double kept = 0.0;
    auto window_energy = [&](int h) {
        double e = std::norm(spec[0]);
        for (int k = 1; k <= h; ++k) e += std::norm(spec[k]) + std::norm(spec[n - k]);
        return e;
    };
    kept = window_energy(half);
    while (half < n / 4 && (total_e - kept) > 1e-6 * total_e) {
        ++half;
        kept = window_energy(half);
    }

    double gain = std::pow(10.0, -(f.length_km * f.atten_db_km + extra_atten_db) / 20.0);
    ImpulseResponse h;
    h.sample_rate = fs;
    h.taps.resize(2 * half + 1);
    for (int k = -half; k <= half; ++k)
        h.taps[k + half] = gain * spec[(k + n) % n];
    h.discarded_energy_frac = (total_e - kept) / total_e;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "grid=%d taps=%d span_T2=%d fiber_km=%.3g att_db=%.4g discarded=%.3g", n,
                  int(h.taps.size()), half, f.length_km,
                  f.length_km * f.atten_db_km + extra_atten_db, h.discarded_energy_frac);
    h.provenance = buf;
    return h;
}

double mzm_field(double drive_v, const MzmParams& m) {
    if (m.transfer == MzmTransfer::ideal_linear) return drive_v;
    return std::cos(M_PI * (m.bias + drive_v) / (2.0 * m.v_pi));
}

double scale_to_launch_power(std::vector<cplx>& field, double launch_dbm) {
    double target_mw = std::pow(10.0, launch_dbm / 10.0);
    double mean = 0.0;
    for (const auto& z : field) mean += std::norm(z);
    mean /= field.size();
    if (mean <= 0.0) throw std::invalid_argument("scale_to_launch_power: zero field");
    double g = std::sqrt(target_mw / mean);
    for (auto& z : field) z *= g;
    return g;
}

template <typename T>
static std::vector<cplx> conv_centered(const std::vector<T>& x, const ImpulseResponse& h) {
    const int n = int(x.size());
    const int m = int(h.taps.size());
    const int c = h.center();
    std::vector<cplx> out(n);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        cplx acc = 0.0;
        int j0 = std::max(0, k + c - n + 1);
        int j1 = std::min(m - 1, k + c);
        for (int j = j0; j <= j1; ++j) acc += h.taps[j] * x[k - j + c];
        out[k] = acc;
    }
    return out;
}

std::vector<cplx> apply_channel(const std::vector<double>& x, const ImpulseResponse& h) {
    return conv_centered(x, h);
}
std::vector<cplx> apply_channel(const std::vector<cplx>& x, const ImpulseResponse& h) {
    return conv_centered(x, h);
}

ReceivedBlock simulate_capture(const std::vector<cplx>& field, const NoiseSpec& ns,
                               double symbol_rate, uint64_t seed) {
    if (field.size() % 2 != 0)
        throw std::invalid_argument("simulate_capture: field length must be even (2 samples/symbol)");
    ReceivedBlock b;
    b.y.resize(field.size());
    b.sample_rate = 2.0 * symbol_rate;
    b.symbol_rate = symbol_rate;
    b.seed = seed;
    Rng rng(seed);
    for (size_t k = 0; k < field.size(); ++k) {
        int p = int(k & 1);
        cplx pre = field[k] + ns.mu_pre[p] + rng.cnormal(ns.sigma2_pre[p]);
        double post = rng.normal() * std::sqrt(ns.sigma2_post[p]);
        b.y[k] = std::norm(pre) + ns.mu_post[p] + post;
    }
    b.provenance = "simulate_capture";
    return b;
}

} // namespace ddair
