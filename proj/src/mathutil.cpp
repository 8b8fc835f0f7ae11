#include "ddair/mathutil.hpp"
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace ddair {

namespace {

constexpr double kLog2e  = 1.4426950408889634074;
constexpr double kLn2Hi  = 6.93147180369123816490e-01;
constexpr double kLn2Lo  = 1.90821492927058770002e-10;
constexpr double kShift  = 6755399441055744.0; // 3 * 2^51, round-to-nearest trick
constexpr double kUnderflow = -708.0;
constexpr double kOverflowClamp = 709.0;

inline double exp_core(double x) noexcept {
    // clamp both ends so -inf (dead trellis states) stays defined
    double xc = x > kOverflowClamp ? kOverflowClamp : (x < kUnderflow ? kUnderflow : x);
    double t  = xc * kLog2e + kShift;
    double nd = t - kShift;
    double r  = xc - nd * kLn2Hi;
    r -= nd * kLn2Lo;
    // degree-13 Taylor on |r| <= ln2/2; relative error ~4e-18
    double p = 1.0 / 6227020800.0;
    p = p * r + 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    int64_t n = static_cast<int64_t>(nd);
    uint64_t bits = static_cast<uint64_t>(n + 1023) << 52;
    double scale;
    std::memcpy(&scale, &bits, 8);
    double y = p * scale;
    return x < kUnderflow ? 0.0 : y;
}

} // namespace

double exp_one(double x) noexcept { return exp_core(x); }

void exp_block(const double* x, double* out, int n) noexcept {
    for (int i = 0; i < n; ++i) out[i] = exp_core(x[i]);
}

double log_bessel_i0(double x) noexcept {
    double ax = std::fabs(x);
    if (ax <= 20.0) {
        // I0(x) = sum t^k / (k!)^2, t = x^2/4; all terms positive
        double t = 0.25 * ax * ax;
        double sum = 1.0, term = 1.0;
        for (int k = 1; k <= 80; ++k) {
            term *= t / (static_cast<double>(k) * k);
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return std::log(sum);
    }
    // I0(x) ~ e^x/sqrt(2 pi x) * (1 + 1/(8x) + 9/(2!(8x)^2) + ...)
    // terms ((2k-1)!!)^2 / (k! (8x)^k); stop at smallest term (asymptotic)
    double delta = 0.0, term = 1.0;
    for (int k = 1; k <= 60; ++k) {
        double odd = 2.0 * k - 1.0;
        double next = term * odd * odd / (8.0 * k * ax);
        if (next >= term && k > 1) break; // divergence onset
        term = next;
        delta += term;
        if (term < 1e-18) break;
    }
    return ax - 0.5 * std::log(2.0 * M_PI * ax) + std::log1p(delta);
}

void gauss_legendre(int k, std::vector<double>& nodes, std::vector<double>& weights) {
    if (k < 1) throw std::invalid_argument("gauss_legendre: k must be >= 1");
    nodes.assign(k, 0.0);
    weights.assign(k, 0.0);
    int half = (k + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (k + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < k; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = k * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        nodes[i] = -z;
        nodes[k - 1 - i] = z;
        double w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    if (k & 1) nodes[k / 2] = 0.0;
}

double logsumexp(std::span<const double> v) noexcept {
    double m = -HUGE_VAL;
    for (double x : v)
        if (x > m) m = x;
    if (!(m > -HUGE_VAL)) return -HUGE_VAL;
    double s = 0.0;
    for (double x : v) s += exp_one(x - m);
    return m + std::log(s);
}

uint64_t splitmix64(uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t fnv1a64(std::span<const char> bytes) noexcept {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = ((eng_() >> 11) + 1) * (1.0 / 9007199254740992.0); // (0,1]
    double u2 = (eng_() >> 11) * (1.0 / 9007199254740992.0);      // [0,1)
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

cplx Rng::cnormal(double var) {
    double s = std::sqrt(0.5 * var);
    double re = normal() * s;
    double im = normal() * s;
    return {re, im};
}

uint32_t Rng::uniform_idx(uint32_t q) {
    if ((q & (q - 1)) == 0) return static_cast<uint32_t>(eng_() & (q - 1));
    uint64_t lim = UINT64_MAX - UINT64_MAX % q;
    uint64_t x;
    do {
        x = eng_();
    } while (x >= lim);
    return static_cast<uint32_t>(x % q);
}

} // namespace ddair
