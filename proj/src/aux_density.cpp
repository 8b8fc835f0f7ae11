#include "ddair/aux_density.hpp"
#include "ddair/mathutil.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace ddair {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxNodes = 512;

struct GlRule {
    std::vector<double> x, w, logw;
};

const GlRule& gl_rule(int k) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GlRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[k];
    if (!slot) {
        slot = std::make_unique<GlRule>();
        gauss_legendre(k, slot->x, slot->w);
        slot->logw.resize(k);
        for (int j = 0; j < k; ++j) slot->logw[j] = std::log(slot->w[j]);
    }
    return *slot;
}

// The integrand is the product of the noncentral intensity density (spread
// sigma_nc) and a Gaussian in y - w (spread sigma_post). Nodes are placed on
// the narrower factor:
//   path A (sigma_nc <= 3 sigma_post): amplitude-domain window around sqrt(nu)
//     -- independent of y, so log-weights can be cached per branch;
//   path B: w-domain window around y - mu_post, noncentral factor evaluated
//     fresh at each node.
// The choice is a pure function of (nu, sigma2_pre, sigma2_post), so a cached
// table and a from-scratch evaluation follow the identical code path.
struct QuadSetup {
    int path;              // 1 = A, 0 = B
    double c0, c1;         // node map, path A: amplitude u = c0 + c1 * x_j
    double cmax;           // max of cached log-terms (path A)
};

QuadSetup quad_setup(double nu, double s2pre, double /*s2post unused in A body*/,
                     bool path_a, double coverage,
                     const double* glx, const double* gllogw, int K, double* pexp) {
    QuadSetup qs{};
    qs.path = path_a ? 1 : 0;
    if (!path_a) return qs;
    double s1 = std::sqrt(s2pre);
    double r = std::sqrt(nu);
    double ha = coverage * s1 * M_SQRT1_2; // amplitude spread is sigma1/sqrt(2)
    double alo = std::max(0.0, r - ha), ahi = r + ha;
    qs.c0 = 0.5 * (ahi + alo);
    qs.c1 = 0.5 * (ahi - alo);
    double b[kMaxNodes];
    double bmax = -kInf;
    for (int j = 0; j < K; ++j) {
        double u = qs.c0 + qs.c1 * glx[j];
        b[j] = noncentral_intensity_logpdf(u * u, nu, s2pre) + gllogw[j]
             + std::log(2.0 * u * qs.c1); // dw = 2u du
        bmax = std::max(bmax, b[j]);
    }
    qs.cmax = bmax;
    for (int j = 0; j < K; ++j) b[j] -= bmax;
    exp_block(b, pexp, K);
    return qs;
}

bool pick_path_a(double nu, double s2pre, double s2post) {
    double sigma_nc = std::sqrt(s2pre) * std::sqrt(s2pre + 2.0 * nu);
    return sigma_nc <= 3.0 * std::sqrt(s2post);
}

double quad_combine(const QuadSetup& qs, double nu, double s2pre, double s2post,
                    double coverage, double yp,
                    const double* glx, const double* gllogw, int K,
                    const double* pexp) {
    double norm = 0.5 * std::log(2.0 * M_PI * s2post);
    double buf[kMaxNodes], e[kMaxNodes];
    if (qs.path == 1) {
        double inv2 = 1.0 / (2.0 * s2post);
        double gmax = -kInf;
        for (int j = 0; j < K; ++j) {
            double u = qs.c0 + qs.c1 * glx[j];
            double d = yp - u * u;
            buf[j] = -d * d * inv2;
            gmax = std::max(gmax, buf[j]);
        }
        for (int j = 0; j < K; ++j) buf[j] -= gmax;
        exp_block(buf, e, K);
        double s = 0.0;
        for (int j = 0; j < K; ++j) s += pexp[j] * e[j];
        if (!(s > 0.0)) s = DBL_MIN; // all cross terms underflow: keep finite
        return qs.cmax + gmax + std::log(s) - norm;
    }
    double sp = std::sqrt(s2post);
    double lo = std::max(0.0, yp - coverage * sp);
    double hi = std::max(yp, 0.0) + coverage * sp;
    double mid = 0.5 * (hi + lo), hf = 0.5 * (hi - lo);
    double loghf = std::log(hf);
    double inv2 = 1.0 / (2.0 * s2post);
    double tmax = -kInf;
    for (int j = 0; j < K; ++j) {
        double w = mid + hf * glx[j];
        double d = yp - w;
        buf[j] = noncentral_intensity_logpdf(w, nu, s2pre) + gllogw[j] + loghf
               - d * d * inv2;
        tmax = std::max(tmax, buf[j]);
    }
    if (tmax == -kInf) return -kInf;
    for (int j = 0; j < K; ++j) buf[j] -= tmax;
    exp_block(buf, e, K);
    double s = 0.0;
    for (int j = 0; j < K; ++j) s += e[j];
    if (!(s > 0.0)) s = DBL_MIN;
    return tmax + std::log(s) - norm;
}

// closed forms shared by the table and the standalone evaluation
double degenerate_eval(double y, double nu, double mu_post, double s2pre,
                       double s2post) {
    bool pre_dead = s2pre < kDegenerateVar, post_dead = s2post < kDegenerateVar;
    if (pre_dead && post_dead)
        return std::fabs(y - (nu + mu_post)) <= kDegenerateVar ? 0.0 : -kInf;
    if (pre_dead) {
        double d = y - mu_post - nu;
        return -0.5 * std::log(2.0 * M_PI * s2post) - d * d / (2.0 * s2post);
    }
    return noncentral_intensity_logpdf(y - mu_post, nu, s2pre);
}

} // namespace

void AuxChannelParams::validate() const {
    if (h_aux.empty() || h_aux.size() % 2 == 0)
        throw std::invalid_argument("aux response needs an odd, non-zero tap count");
    for (auto& t : h_aux)
        if (!std::isfinite(t.real()) || !std::isfinite(t.imag()))
            throw std::invalid_argument("aux taps must be finite");
    for (int p = 0; p < 2; ++p) {
        if (!(sigma2_pre[p] >= 0.0) || !(sigma2_post[p] >= 0.0))
            throw std::invalid_argument("variances must be non-negative");
        if (!std::isfinite(mu_pre[p].real()) || !std::isfinite(mu_pre[p].imag()) ||
            !std::isfinite(mu_post[p]))
            throw std::invalid_argument("means must be finite");
    }
}

void QuadratureSpec::validate() const {
    if (nodes < 16 || nodes > kMaxNodes)
        throw std::invalid_argument("quadrature nodes must be in [16, 512]");
    if (!(coverage >= 6.0) || !std::isfinite(coverage))
        throw std::invalid_argument("coverage factor must be >= 6");
}

double noncentral_intensity_logpdf(double w, double noncentrality, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
    if (!(noncentrality >= 0.0)) throw std::invalid_argument("noncentrality must be >= 0");
    if (!(w >= 0.0)) return -kInf; // includes NaN input
    if (!std::isfinite(w)) return -kInf;
    return -std::log(sigma2) - (w + noncentrality) / sigma2
         + log_bessel_i0(2.0 * std::sqrt(w * noncentrality) / sigma2);
}

double log_density_sample(double y, cplx s, int phase, const AuxChannelParams& params,
                          const QuadratureSpec& quad) {
    if (phase != 0 && phase != 1) throw std::invalid_argument("phase must be 0 or 1");
    quad.validate();
    cplx se = s + params.mu_pre[phase];
    double nu = std::norm(se);
    double s2pre = params.sigma2_pre[phase], s2post = params.sigma2_post[phase];
    if (s2pre < kDegenerateVar || s2post < kDegenerateVar)
        return degenerate_eval(y, nu, params.mu_post[phase], s2pre, s2post);
    const GlRule& gl = gl_rule(quad.nodes);
    double pexp[kMaxNodes];
    bool a = pick_path_a(nu, s2pre, s2post);
    QuadSetup qs = quad_setup(nu, s2pre, s2post, a, quad.coverage,
                              gl.x.data(), gl.logw.data(), quad.nodes, pexp);
    return quad_combine(qs, nu, s2pre, s2post, quad.coverage,
                        y - params.mu_post[phase], gl.x.data(), gl.logw.data(),
                        quad.nodes, pexp);
}

cplx branch_amplitude(std::span<const double> window, std::span<const cplx> h_aux,
                      int phase) {
    int L = (int)h_aux.size();
    if (L == 0 || L % 2 == 0)
        throw std::invalid_argument("aux response needs an odd, non-zero tap count");
    if (phase != 0 && phase != 1) throw std::invalid_argument("phase must be 0 or 1");
    int m = (L - 1) / 2, c = m, delta = (m + 1) / 2;
    if ((int)window.size() != m + 1)
        throw std::invalid_argument("window must hold memory+1 symbols");
    // window (x_{i-m} .. x_i) explains the sample pair (on, between) of symbol
    // j = i - ceil(m/2): the on-symbol sample sees taps with (tau - c) even,
    // the following between-symbol sample the odd ones. All taps land inside
    // the window for every odd L (pinned against the full convolution in the
    // tests).
    cplx s{};
    for (int tau = 0; tau < L; ++tau) {
        int num = tau - c - (phase == 1 ? 1 : 0);
        if (num & 1) continue;
        int d = num / 2; // exact: num is even
        int u = m - delta - d;
        if (u < 0 || u > m) throw std::logic_error("tap fell outside the window");
        s += h_aux[tau] * window[u];
    }
    return s;
}

BudgetError::BudgetError(std::uint64_t need, std::uint64_t have)
    : std::runtime_error("branch table budget exceeded: need " + std::to_string(need) +
                         " branches, budget " + std::to_string(have)),
      required(need), budget(have) {}

BranchTable::BranchTable(std::span<const double> points, const AuxChannelParams& params,
                         const QuadratureSpec& quad, std::uint64_t branch_budget) {
    params.validate();
    quad.validate();
    quad_ = quad;
    q_ = (int)points.size();
    if (q_ < 2) throw std::invalid_argument("need at least two constellation points");
    m_ = params.memory();

    double need = std::pow((double)q_, m_ + 1);
    if (need > (double)branch_budget)
        throw BudgetError((std::uint64_t)std::min(need, 1.8e19), branch_budget);
    branches_ = 1;
    states_ = 1;
    for (int i = 0; i <= m_; ++i) branches_ *= (std::uint64_t)q_;
    for (int i = 0; i < m_; ++i) states_ *= (std::uint64_t)q_;

    const GlRule& gl = gl_rule(quad.nodes);
    gl_x_ = gl.x;
    gl_w_ = gl.w;
    gl_logw_ = gl.logw;
    const int K = quad.nodes;

    std::vector<double> window(m_ + 1);
    for (int p = 0; p < 2; ++p) {
        mu_post_[p] = params.mu_post[p];
        sigma2_pre_[p] = params.sigma2_pre[p];
        sigma2_post_[p] = params.sigma2_post[p];
        idx_[p].resize(branches_);
        std::unordered_map<std::uint64_t, std::uint32_t> seen;
        seen.reserve(branches_ * 2);
        for (std::uint64_t w = 0; w < branches_; ++w) {
            std::uint64_t ww = w;
            for (int u = 0; u <= m_; ++u) {
                window[u] = points[ww % q_];
                ww /= q_;
            }
            cplx se = branch_amplitude(window, params.h_aux, p) + params.mu_pre[p];
            double nu = std::norm(se);
            auto [it, fresh] = seen.emplace(std::bit_cast<std::uint64_t>(nu),
                                            (std::uint32_t)nu_[p].size());
            if (fresh) nu_[p].push_back(nu);
            idx_[p][w] = it->second;
        }

        std::uint32_t n = (std::uint32_t)nu_[p].size();
        path_a_[p].assign(n, 2);
        c0_[p].assign(n, 0.0);
        c1_[p].assign(n, 0.0);
        cmax_[p].assign(n, 0.0);
        pexp_off_[p].assign(n, UINT32_MAX);
        bool degenerate = sigma2_pre_[p] < kDegenerateVar ||
                          sigma2_post_[p] < kDegenerateVar;
        if (degenerate) continue;
        std::uint32_t n_a = 0;
        for (std::uint32_t e = 0; e < n; ++e) {
            bool a = pick_path_a(nu_[p][e], sigma2_pre_[p], sigma2_post_[p]);
            path_a_[p][e] = a ? 1 : 0;
            if (a) pexp_off_[p][e] = (n_a++) * K;
        }
        pexp_[p].resize((size_t)n_a * K);
#pragma omp parallel for schedule(static)
        for (std::int64_t e = 0; e < (std::int64_t)n; ++e) {
            if (!path_a_[p][e]) continue;
            QuadSetup qs = quad_setup(nu_[p][e], sigma2_pre_[p], sigma2_post_[p],
                                      true, quad_.coverage, gl_x_.data(),
                                      gl_logw_.data(), K,
                                      pexp_[p].data() + pexp_off_[p][e]);
            c0_[p][e] = qs.c0;
            c1_[p][e] = qs.c1;
            cmax_[p][e] = qs.cmax;
        }
    }
}

double BranchTable::eval_one(int phase, std::uint32_t e, double y) const {
    double nu = nu_[phase][e];
    double s2pre = sigma2_pre_[phase], s2post = sigma2_post_[phase];
    if (path_a_[phase][e] == 2)
        return degenerate_eval(y, nu, mu_post_[phase], s2pre, s2post);
    QuadSetup qs{path_a_[phase][e], c0_[phase][e], c1_[phase][e], cmax_[phase][e]};
    const double* pexp =
        qs.path ? pexp_[phase].data() + pexp_off_[phase][e] : nullptr;
    return quad_combine(qs, nu, s2pre, s2post, quad_.coverage, y - mu_post_[phase],
                        gl_x_.data(), gl_logw_.data(), quad_.nodes, pexp);
}

void BranchTable::eval_phase(int phase, double y, double* out) const {
    std::int64_t n = entry_count(phase);
#pragma omp parallel for schedule(static)
    for (std::int64_t e = 0; e < n; ++e)
        out[e] = eval_one(phase, (std::uint32_t)e, y);
}

} // namespace ddair
