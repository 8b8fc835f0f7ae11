#include "ddair/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "ddair/channel.hpp"

namespace ddair {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSyncThreshold = 0.2;
constexpr int kHalfKernel = 32; // taps cover [i0-31, i0+32]

double sinc(double t) {
    if (std::fabs(t) < 1e-12) return 1.0;
    double a = kPi * t;
    return std::sin(a) / a;
}

// Blackman over the 64-tap support; exactly 1 at t = 0 so integer-grid
// evaluation reproduces the input sample
double kernel_weight(double t) {
    double u = t / kHalfKernel;
    if (u <= -1.0 || u >= 1.0) return 0.0;
    double w = 0.42 + 0.5 * std::cos(kPi * u) + 0.08 * std::cos(2.0 * kPi * u);
    return sinc(t) * w;
}

} // namespace

SyncEstimate synchronize(std::span<const double> received, std::span<const double> pilot) {
    size_t na = received.size(), nb = pilot.size();
    if (nb < 8) throw std::invalid_argument("pilot waveform too short");
    if (na < nb) throw std::invalid_argument("capture shorter than the pilot waveform");

    double am = std::accumulate(received.begin(), received.end(), 0.0) / (double)na;
    double bm = std::accumulate(pilot.begin(), pilot.end(), 0.0) / (double)nb;

    size_t nfft = 1;
    while (nfft < na + nb) nfft <<= 1;
    std::vector<cplx> va(nfft, cplx{0, 0}), vb(nfft, cplx{0, 0});
    for (size_t k = 0; k < na; ++k) va[k] = received[k] - am;
    for (size_t k = 0; k < nb; ++k) vb[k] = pilot[k] - bm;
    fft_inplace(va, false);
    fft_inplace(vb, false);
    for (size_t k = 0; k < nfft; ++k) va[k] *= std::conj(vb[k]);
    fft_inplace(va, true); // va[tau] = sum_k a'[k+tau] b'[k]

    // sliding energy of the received window, plus the pilot energy
    std::vector<double> pre(na + 1, 0.0);
    for (size_t k = 0; k < na; ++k) {
        double d = received[k] - am;
        pre[k + 1] = pre[k] + d * d;
    }
    double eb = 0;
    for (size_t k = 0; k < nb; ++k) {
        double d = pilot[k] - bm;
        eb += d * d;
    }
    if (eb <= 0) throw SyncError("no sync: pilot waveform has no energy");

    size_t lags = na - nb + 1;
    std::vector<double> ncc(lags);
    size_t best = 0;
    for (size_t tau = 0; tau < lags; ++tau) {
        double ea = pre[tau + nb] - pre[tau];
        ncc[tau] = ea > 0 ? va[tau].real() / std::sqrt(ea * eb) : 0.0;
        if (ncc[tau] > ncc[best]) best = tau;
    }

    SyncEstimate est;
    est.peak = ncc[best];
    if (est.peak < kSyncThreshold) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "no sync: peak correlation %.3f < %.2f", est.peak,
                      kSyncThreshold);
        throw SyncError(buf);
    }
    est.integer_part = (long)best;
    if (best > 0 && best + 1 < lags) {
        double rm = ncc[best - 1], r0 = ncc[best], rp = ncc[best + 1];
        double den = rm - 2 * r0 + rp;
        if (den < -1e-30)
            est.fractional_part = std::clamp(0.5 * (rm - rp) / den, -0.5, 0.5);
    }
    est.delay = (double)est.integer_part + est.fractional_part;
    return est;
}

ResampleResult resample_to_2sps(std::span<const double> samples, double in_rate,
                                double symbol_rate, double delay_samples) {
    if (!(in_rate > 0) || !(symbol_rate > 0) || in_rate < 2.0 * symbol_rate)
        throw std::invalid_argument("need in_rate >= 2 * symbol_rate");
    int n = (int)samples.size();
    if (n < 2 * kHalfKernel) throw std::invalid_argument("input shorter than the kernel");

    double ratio = in_rate / (2.0 * symbol_rate); // input samples per output sample

    // logical output grid k = 0,1,... at pos = delay + k*ratio; keep outputs
    // whose 64-tap support stays inside the input
    long k_total = (long)std::floor(((double)n - 1 - delay_samples) / ratio) + 1;
    if (k_total < 1) throw std::invalid_argument("delay leaves no output samples");
    long k0 = (long)std::ceil(((double)(kHalfKernel - 1) - delay_samples) / ratio);
    k0 = std::max(k0, 0L);
    k0 += k0 & 1; // even start keeps y[0] an on-symbol sample
    // need floor(pos) + kHalfKernel <= n-1, i.e. pos strictly below n-32
    long k1 = (long)std::floor(((double)(n - kHalfKernel) - delay_samples) / ratio);
    while (k1 >= k0 && delay_samples + (double)k1 * ratio >= (double)(n - kHalfKernel) - 1e-12) --k1;
    k1 = std::min(k1, k_total - 1);
    if (k1 < k0) throw std::invalid_argument("no output samples survive the edge trim");

    ResampleResult out;
    out.trimmed_front = (int)k0;
    out.trimmed_back = (int)(k_total - 1 - k1);
    out.y.resize((size_t)(k1 - k0 + 1));
    for (long k = k0; k <= k1; ++k) {
        double pos = delay_samples + (double)k * ratio;
        int i0 = (int)std::floor(pos);
        double acc = 0;
        for (int j = i0 - kHalfKernel + 1; j <= i0 + kHalfKernel; ++j)
            acc += kernel_weight(pos - (double)j) * samples[(size_t)j];
        out.y[(size_t)(k - k0)] = acc;
    }
    return out;
}

} // namespace ddair
