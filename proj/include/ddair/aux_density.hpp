#pragma once
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

// per-sample likelihood of the square-law model: y = |s + n1 + mu1|^2 + n2 + mu2.
// the conditional density is a scaled noncentral chi^2 (2 dof) convolved with a
// real Gaussian; everything is evaluated in log domain through fixed-order
// Gauss-Legendre quadrature with closed-form fallbacks when a variance vanishes.

namespace ddair {

using cplx = std::complex<double>;

struct AuxChannelParams {
    std::vector<cplx> h_aux;   // L taps at T/2 spacing, L odd
    cplx mu_pre[2]{};          // phase 0 = on-symbol samples, 1 = between
    double mu_post[2]{};
    double sigma2_pre[2]{};
    double sigma2_post[2]{};

    int L() const { return (int)h_aux.size(); }
    int memory() const { return (L() - 1) / 2; }
    void validate() const;
};

struct QuadratureSpec {
    int nodes = 96;
    double coverage = 8.0;
    void validate() const;
};

// variances below this are treated as exactly degenerate
inline constexpr double kDegenerateVar = 1e-12;

// log density of w = |s + n|^2 for CSCG n with E|n|^2 = sigma2 and |s|^2 =
// noncentrality. w < 0 gives -inf, never throws.
double noncentral_intensity_logpdf(double w, double noncentrality, double sigma2);

// log density of one received sample y given the noiseless aux field s at
// phase class `phase`. Degenerate variances fall back to the Gaussian /
// noncentral / point-mass closed forms.
double log_density_sample(double y, cplx s, int phase,
                          const AuxChannelParams& params, const QuadratureSpec& quad);

// noiseless aux-model field: inner product of h_aux with the upsampled symbol
// window (oldest first, memory+1 entries) at the given phase class.
cplx branch_amplitude(std::span<const double> window, std::span<const cplx> h_aux,
                      int phase);

struct BudgetError : std::runtime_error {
    std::uint64_t required;
    std::uint64_t budget;
    BudgetError(std::uint64_t need, std::uint64_t have);
};

// All Q^{m+1} branch amplitudes of a constellation/aux-model pair, deduplicated
// by exact |s_eff|^2 value, with the y-independent half of the quadrature
// precomputed per unique entry. Immutable after construction; evaluation is
// pure, so the table can be shared across threads.
class BranchTable {
public:
    // `points` are the constellation's field levels; branch index digits are
    // base-q, oldest symbol in the lowest digit.
    BranchTable(std::span<const double> points, const AuxChannelParams& params,
                const QuadratureSpec& quad, std::uint64_t branch_budget = 1ull << 20);

    int q() const { return q_; }
    int memory() const { return m_; }
    std::uint64_t state_count() const { return states_; }
    std::uint64_t branch_count() const { return branches_; }

    std::uint32_t entry_of(std::uint64_t branch, int phase) const {
        return idx_[phase][branch];
    }
    std::uint32_t entry_count(int phase) const { return (std::uint32_t)nu_[phase].size(); }
    double entry_nu(int phase, std::uint32_t e) const { return nu_[phase][e]; }

    // log density of sample y for one unique entry / for all entries of a phase
    double eval_one(int phase, std::uint32_t e, double y) const;
    void eval_phase(int phase, double y, double* out) const;

private:
    int q_ = 0, m_ = 0;
    std::uint64_t states_ = 0, branches_ = 0;
    QuadratureSpec quad_;
    double mu_post_[2], sigma2_pre_[2], sigma2_post_[2];
    std::vector<std::uint32_t> idx_[2];   // branch -> unique entry
    std::vector<double> nu_[2];           // |s_eff|^2 per entry
    // y-independent quadrature state per entry (see aux_density.cpp)
    std::vector<std::uint8_t> path_a_[2];
    std::vector<double> c0_[2], c1_[2], cmax_[2];
    std::vector<std::uint32_t> pexp_off_[2];
    std::vector<double> pexp_[2];
    std::vector<double> gl_x_, gl_w_, gl_logw_;
};

} // namespace ddair
