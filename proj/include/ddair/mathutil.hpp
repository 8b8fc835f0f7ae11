#pragma once
#include <cstdint>
#include <cstddef>
#include <complex>
#include <random>
#include <span>
#include <vector>

namespace ddair {

using cplx = std::complex<double>;

// Branchless polynomial exp, identical results scalar or blocked. All density
// code must go through these (not std::exp) so that cached and freshly
// evaluated likelihoods agree bit for bit. Inputs below -708 flush to zero.
double exp_one(double x) noexcept;
void exp_block(const double* x, double* out, int n) noexcept;

// log I0(x), valid for any finite x (I0 is even); no overflow for large x.
// Power series up to |x| = 20, scaled asymptotic expansion beyond.
double log_bessel_i0(double x) noexcept;

// Gauss-Legendre nodes/weights on [-1,1], exactly symmetric about zero.
void gauss_legendre(int k, std::vector<double>& nodes, std::vector<double>& weights);

double logsumexp(std::span<const double> v) noexcept;

uint64_t splitmix64(uint64_t x) noexcept;
uint64_t fnv1a64(std::span<const char> bytes) noexcept;

// Deterministic normal/uniform draws. Hand-rolled Box-Muller so the stream
// does not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t raw() { return eng_(); }

    double uniform01() { return (eng_() >> 11) * (1.0 / 9007199254740992.0); }

    double normal();

    // complex circular Gaussian with E|z|^2 = var (real drawn first)
    cplx cnormal(double var);

    // uniform index in [0, q)
    uint32_t uniform_idx(uint32_t q);

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace ddair
