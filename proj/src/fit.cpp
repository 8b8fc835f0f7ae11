#include "ddair/fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

namespace ddair {

namespace {

constexpr double kTiny = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// flat layout: [2L tap reals][mu_pre re/im x2][mu_post x2][log sigma2 x4]
int dim_of(int L) { return 2 * L + 10; }

std::vector<double> pack(const AuxChannelParams& p, double var_floor) {
    int L = p.L();
    std::vector<double> v(dim_of(L));
    for (int k = 0; k < L; ++k) {
        v[2 * k] = p.h_aux[k].real();
        v[2 * k + 1] = p.h_aux[k].imag();
    }
    for (int ph = 0; ph < 2; ++ph) {
        v[2 * L + 2 * ph] = p.mu_pre[ph].real();
        v[2 * L + 2 * ph + 1] = p.mu_pre[ph].imag();
        v[2 * L + 4 + ph] = p.mu_post[ph];
        v[2 * L + 6 + ph] = std::log(std::max(p.sigma2_pre[ph], var_floor));
        v[2 * L + 8 + ph] = std::log(std::max(p.sigma2_post[ph], var_floor));
    }
    return v;
}

AuxChannelParams unpack(int L, const std::vector<double>& v) {
    AuxChannelParams p;
    p.h_aux.resize(L);
    for (int k = 0; k < L; ++k) p.h_aux[k] = {v[2 * k], v[2 * k + 1]};
    for (int ph = 0; ph < 2; ++ph) {
        p.mu_pre[ph] = {v[2 * L + 2 * ph], v[2 * L + 2 * ph + 1]};
        p.mu_post[ph] = v[2 * L + 4 + ph];
        p.sigma2_pre[ph] = std::exp(v[2 * L + 6 + ph]);
        p.sigma2_post[ph] = std::exp(v[2 * L + 8 + ph]);
    }
    return p;
}

double tap_energy(const AuxChannelParams& p) {
    double e = 0;
    for (cplx h : p.h_aux) e += std::norm(h);
    return e;
}

struct PilotObjective {
    std::span<const double> y;
    std::span<const std::uint32_t> xs;
    const Constellation* cst = nullptr;
    RateOptions opt;

    double eval(const AuxChannelParams& p) const {
        double a = estimate_air(y, xs, *cst, p, opt).air;
        return std::isfinite(a) ? a : -kInf;
    }
};

struct SearchBox {
    std::vector<double> lo, hi, step0;
    double tap_mag_cap = 0; // true magnitude cap per complex tap
};

struct Climb {
    std::vector<double> v;
    double air = -kInf;
    std::vector<double> trace;
    bool converged = false;
};

// greedy coordinate probes, variances first; an accepted move is retried in
// the same direction while it keeps paying off.
Climb climb(const PilotObjective& full, const PilotObjective* screen, int L,
            std::vector<double> v, const SearchBox& box, const FitConfig& cfg) {
    const double accept_eps = 1e-9;
    const double screen_margin = 0.05;
    const int dim = dim_of(L);

    std::vector<int> order;
    for (int c = 2 * L + 6; c < dim; ++c) order.push_back(c);        // log variances
    for (int c = 2 * L + 4; c < 2 * L + 6; ++c) order.push_back(c);  // mu_post
    for (int c = 0; c < 2 * L; ++c) order.push_back(c);              // taps
    for (int c = 2 * L; c < 2 * L + 4; ++c) order.push_back(c);      // mu_pre

    auto tap_ok = [&](const std::vector<double>& w, int c) {
        if (c >= 2 * L) return true;
        int k = c / 2;
        return std::hypot(w[2 * k], w[2 * k + 1]) <= box.tap_mag_cap;
    };

    Climb out;
    double f = full.eval(unpack(L, v));
    double s = screen ? screen->eval(unpack(L, v)) : 0.0;
    out.trace.push_back(f);
    std::vector<double> step = box.step0;
    int lean = 0;

    for (int round = 0; round < cfg.max_iterations; ++round) {
        double f0 = f;
        int accepts = 0;
        for (int c : order) {
            bool took = false;
            for (int sign : {+1, -1}) {
                if (took) break;
                for (int chain = 0; chain < 8; ++chain) {
                    double nv = std::clamp(v[c] + sign * step[c], box.lo[c], box.hi[c]);
                    if (nv == v[c]) break;
                    std::vector<double> cand = v;
                    cand[c] = nv;
                    if (!tap_ok(cand, c)) break;
                    AuxChannelParams cp = unpack(L, cand);
                    double sc = 0.0;
                    if (screen) {
                        sc = screen->eval(cp);
                        if (sc <= s - screen_margin) break;
                    }
                    double fc = full.eval(cp);
                    if (fc <= f + accept_eps) break;
                    v = std::move(cand);
                    f = fc;
                    if (screen) s = sc;
                    out.trace.push_back(f);
                    ++accepts;
                    took = true;
                }
            }
        }
        if (accepts == 0) {
            out.converged = true;
            break;
        }
        if (f - f0 < cfg.tolerance) {
            if (++lean >= 2) {
                out.converged = true;
                break;
            }
            for (double& st : step) st *= 0.5;
        } else {
            lean = 0;
        }
    }
    out.v = std::move(v);
    out.air = f;
    return out;
}

struct DataStats {
    double y_rms = 0;      // sqrt(mean y^2)
    double var_y = 0;      // max over phase classes
    double mean_nu = 0;    // mean predicted intensity under the start params
    double peak_tap = 0;
};

DataStats gather_stats(std::span<const double> y, const AuxChannelParams& start,
                       std::span<const double> x) {
    DataStats st;
    double s2 = 0;
    for (double v : y) s2 += v * v;
    st.y_rms = std::sqrt(s2 / std::max<size_t>(y.size(), 1));
    for (int ph = 0; ph < 2; ++ph) {
        double m1 = 0, m2 = 0;
        size_t cnt = 0;
        for (size_t k = ph; k < y.size(); k += 2) {
            m1 += y[k];
            m2 += y[k] * y[k];
            ++cnt;
        }
        if (cnt) {
            m1 /= (double)cnt;
            m2 /= (double)cnt;
            st.var_y = std::max(st.var_y, m2 - m1 * m1);
        }
    }
    int L = start.L(), m = (L - 1) / 2, dp = (m + 1) / 2;
    int n = (int)x.size();
    std::vector<double> win(m + 1);
    double nu_sum = 0;
    for (int j = 0; j < n; ++j) {
        for (int t = 0; t <= m; ++t) {
            int sidx = j + dp - m + t;
            win[t] = (sidx >= 0 && sidx < n) ? x[sidx] : 0.0;
        }
        nu_sum += std::norm(branch_amplitude(win, start.h_aux, 0));
        nu_sum += std::norm(branch_amplitude(win, start.h_aux, 1));
    }
    st.mean_nu = nu_sum / std::max(2 * n, 1);
    for (cplx h : start.h_aux) st.peak_tap = std::max(st.peak_tap, std::abs(h));
    if (st.peak_tap < kTiny) st.peak_tap = std::max(std::sqrt(st.y_rms), 1.0); // degenerate start
    return st;
}

SearchBox make_box(int L, const DataStats& st, const FitBounds& b) {
    SearchBox box;
    int dim = dim_of(L);
    box.lo.assign(dim, 0);
    box.hi.assign(dim, 0);
    box.step0.assign(dim, 0);
    box.tap_mag_cap = b.tap_peak_scale * st.peak_tap;
    double mu_cap = b.mu_rms_scale * std::max(st.y_rms, kTiny);
    double lv_lo = std::log(b.var_floor);
    double lv_hi = std::log(std::max(b.var_scale * std::max(st.var_y, kTiny), 2 * b.var_floor));
    double amp = std::sqrt(std::max(st.mean_nu, kTiny));
    for (int c = 0; c < 2 * L; ++c) {
        box.lo[c] = -box.tap_mag_cap;
        box.hi[c] = box.tap_mag_cap;
        box.step0[c] = 0.10 * st.peak_tap;
    }
    for (int c = 2 * L; c < 2 * L + 4; ++c) {
        box.lo[c] = -mu_cap;
        box.hi[c] = mu_cap;
        box.step0[c] = 0.10 * amp;
    }
    for (int c = 2 * L + 4; c < 2 * L + 6; ++c) {
        box.lo[c] = -mu_cap;
        box.hi[c] = mu_cap;
        box.step0[c] = 0.10 * std::max(st.y_rms, kTiny);
    }
    for (int c = 2 * L + 6; c < dim; ++c) {
        box.lo[c] = lv_lo;
        box.hi[c] = lv_hi;
        box.step0[c] = 0.4;
    }
    return box;
}

void clamp_into(std::vector<double>& v, int L, const SearchBox& box) {
    for (size_t c = 0; c < v.size(); ++c) v[c] = std::clamp(v[c], box.lo[c], box.hi[c]);
    for (int k = 0; k < L; ++k) {
        double mag = std::hypot(v[2 * k], v[2 * k + 1]);
        if (mag > box.tap_mag_cap && mag > 0) {
            double sc = box.tap_mag_cap / mag;
            v[2 * k] *= sc;
            v[2 * k + 1] *= sc;
        }
    }
}

AuxChannelParams init_from_moments(std::span<const std::uint32_t> idx,
                                   std::span<const double> y,
                                   const Constellation& cst, int L,
                                   const ImpulseResponse& prior,
                                   const FitBounds& bounds) {
    if (L < 1 || L % 2 == 0) throw std::invalid_argument("tap count must be odd and positive");
    int n = (int)idx.size();
    if (y.size() != (size_t)2 * n) throw std::invalid_argument("received length must be twice the pilot count");
    if (n < 2) throw std::invalid_argument("pilot block too short");
    auto [mn, mx] = std::minmax_element(idx.begin(), idx.end());
    if (*mn == *mx) throw std::invalid_argument("constant pilot block");

    int m = (L - 1) / 2, dp = (m + 1) / 2;
    // centered truncation of the physical prior
    std::vector<cplx> h(L, cplx{0, 0});
    int cp = prior.center();
    for (int k = 0; k < L; ++k) {
        int src = cp + (k - m);
        if (src >= 0 && src < (int)prior.taps.size()) h[k] = prior.taps[src];
    }

    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = cst.points[idx[j]];

    // predicted field at every sample under the unit-scale prior
    std::vector<double> nu(2 * n);
    std::vector<double> win(m + 1);
    double nu_max[2] = {0, 0};
    for (int j = 0; j < n; ++j) {
        for (int t = 0; t <= m; ++t) {
            int sidx = j + dp - m + t;
            win[t] = (sidx >= 0 && sidx < n) ? x[sidx] : 0.0;
        }
        nu[2 * j] = std::norm(branch_amplitude(win, h, 0));
        nu[2 * j + 1] = std::norm(branch_amplitude(win, h, 1));
        nu_max[0] = std::max(nu_max[0], nu[2 * j]);
        nu_max[1] = std::max(nu_max[1], nu[2 * j + 1]);
    }

    // post-detector bias from samples where the prior predicts no field
    double mu2[2] = {0, 0};
    for (int ph = 0; ph < 2; ++ph) {
        double acc = 0;
        int cnt = 0;
        for (int k = ph; k < 2 * n; k += 2)
            if (nu[k] <= 1e-6 * nu_max[ph]) {
                acc += y[k];
                ++cnt;
            }
        if (cnt >= 8) mu2[ph] = acc / cnt;
    }

    // least-squares intensity scale: y - mu2 ~ g^2 nu
    double num = 0, den = 0;
    for (int k = 0; k < 2 * n; ++k) {
        num += nu[k] * (y[k] - mu2[k & 1]);
        den += nu[k] * nu[k];
    }
    double g2 = den > kTiny ? std::max(num / den, kTiny) : 1.0;
    double g = std::sqrt(g2);

    AuxChannelParams p;
    p.h_aux.resize(L);
    for (int k = 0; k < L; ++k) p.h_aux[k] = g * h[k];

    // residual moments split by phase class; Var y = s1^4 + 2 s1^2 nu + s2^2
    for (int ph = 0; ph < 2; ++ph) {
        double r1 = 0, r2 = 0, nbar = 0;
        int cnt = 0;
        for (int k = ph; k < 2 * n; k += 2) {
            double r = y[k] - g2 * nu[k] - mu2[ph];
            r1 += r;
            r2 += r * r;
            nbar += g2 * nu[k];
            ++cnt;
        }
        r1 /= std::max(cnt, 1);
        r2 /= std::max(cnt, 1);
        nbar /= std::max(cnt, 1);
        double var_r = std::max(r2 - r1 * r1, 0.0);
        double cap = std::max(bounds.var_scale * var_r, 2 * bounds.var_floor);
        double s1 = std::clamp(r1, bounds.var_floor, cap);
        double s2 = std::clamp(var_r - (s1 * s1 + 2 * s1 * nbar), bounds.var_floor, cap);
        p.sigma2_pre[ph] = s1;
        p.sigma2_post[ph] = s2;
        p.mu_post[ph] = mu2[ph];
        p.mu_pre[ph] = {0, 0};
    }
    return p;
}

FitResult fit_core(const SymbolBlock& pilots, std::span<const double> received,
                   const Constellation& cst, AuxChannelParams start,
                   const FitConfig& cfg, std::string provenance) {
    if (cfg.tolerance <= 0) throw std::invalid_argument("tolerance must be positive");
    if (cfg.max_iterations < 1 || cfg.restart_count < 1 || cfg.pilot_count < 1)
        throw std::invalid_argument("bad fit config");
    if (start.L() != cfg.L_target) throw std::invalid_argument("start taps do not match L_target");
    if (received.size() != 2 * pilots.n())
        throw std::invalid_argument("received length must be twice the pilot count");

    int L = cfg.L_target, m = (L - 1) / 2;
    int P = std::min<int>(cfg.pilot_count, (int)pilots.n());
    if (P < 2 * m + 2) throw std::invalid_argument("pilot block too short for L_target");

    FitResult out;
    out.pilot_block_id = pilots.id;
    out.init_provenance = std::move(provenance);

    double floor_needed = 10.0 * std::pow((double)cst.q, m + 1);
    if ((double)P < floor_needed) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "pilot count %d below recommended floor %.0f for %d taps",
                      P, floor_needed, L);
        out.notes.push_back(buf);
    }

    std::span<const std::uint32_t> xs(pilots.idx.data(), (size_t)P);
    std::span<const double> ys = received.subspan(0, (size_t)2 * P);
    std::vector<double> xvals(P);
    for (int j = 0; j < P; ++j) xvals[j] = cst.points[xs[j]];

    DataStats st = gather_stats(ys, start, xvals);
    SearchBox box = make_box(L, st, cfg.bounds);

    PilotObjective full{ys, xs, &cst, {}};
    full.opt.quad = cfg.quad;
    full.opt.branch_budget = cfg.branch_budget;

    PilotObjective scr = full;
    bool use_screen = cfg.screen_count > 2 * m + 1 && cfg.screen_count < P;
    if (use_screen) {
        scr.y = ys.subspan(0, (size_t)2 * cfg.screen_count);
        scr.xs = xs.subspan(0, (size_t)cfg.screen_count);
    }

    std::vector<double> v0 = pack(start, cfg.bounds.var_floor);
    clamp_into(v0, L, box);

    Climb best;
    for (int r = 0; r < cfg.restart_count; ++r) {
        std::vector<double> v = v0;
        if (r > 0) {
            Rng rng(splitmix64(cfg.seed + (std::uint64_t)r));
            for (int c = 0; c < 2 * L + 6; ++c) v[c] += 1.5 * box.step0[c] * rng.normal();
            for (int c = 2 * L + 6; c < dim_of(L); ++c) v[c] += 0.5 * rng.normal();
            clamp_into(v, L, box);
        }
        Climb cl = climb(full, use_screen ? &scr : nullptr, L, std::move(v), box, cfg);
        bool better = cl.air > best.air + 1e-9;
        if (!better && std::abs(cl.air - best.air) <= 1e-9 && !best.v.empty())
            better = tap_energy(unpack(L, cl.v)) < tap_energy(unpack(L, best.v));
        if (best.v.empty() || better) best = std::move(cl);
    }

    out.params = unpack(L, best.v);
    out.pilot_air = best.air;
    out.trace = std::move(best.trace);
    out.converged = best.converged;
    return out;
}

} // namespace

AuxChannelParams initialize_params(const SymbolBlock& pilots,
                                   std::span<const double> received,
                                   const Constellation& cst, int L,
                                   const ImpulseResponse& prior,
                                   const FitBounds& bounds) {
    return init_from_moments(pilots.idx, received, cst, L, prior, bounds);
}

FitResult fit(const SymbolBlock& pilots, std::span<const double> received,
              const Constellation& cst, const ImpulseResponse& prior,
              const FitConfig& config) {
    if (received.size() != 2 * pilots.n())
        throw std::invalid_argument("received length must be twice the pilot count");
    int P = std::min<int>(config.pilot_count, (int)pilots.n());
    std::span<const std::uint32_t> xs(pilots.idx.data(), (size_t)P);
    AuxChannelParams start = init_from_moments(xs, received.subspan(0, (size_t)2 * P), cst,
                                               config.L_target, prior, config.bounds);
    std::string prov = "moment init, prior '" + prior.provenance + "'";
    return fit_core(pilots, received, cst, std::move(start), config, std::move(prov));
}

FitResult fit_from(const SymbolBlock& pilots, std::span<const double> received,
                   const Constellation& cst, const AuxChannelParams& start,
                   const FitConfig& config, const std::string& provenance) {
    return fit_core(pilots, received, cst, start, config, provenance);
}

RateEstimate cross_validate(const FitResult& fitted,
                            std::span<const double> holdout_received,
                            const SymbolBlock& holdout_symbols,
                            const Constellation& cst, const RateOptions& options) {
    if (holdout_symbols.n() == 0 || holdout_received.empty())
        throw std::invalid_argument("empty holdout block");
    if (holdout_symbols.id == fitted.pilot_block_id)
        throw std::invalid_argument("holdout block overlaps the pilot block");
    RateEstimate e = estimate_air(holdout_received, holdout_symbols.idx, cst, fitted.params, options);
    char buf[32];
    std::snprintf(buf, sizeof buf, "holdout %016llx", (unsigned long long)holdout_symbols.id);
    e.provenance = buf;
    return e;
}

AuxChannelParams embed_taps(const AuxChannelParams& params, int L_new) {
    int L = params.L();
    if (L_new < L || L_new % 2 == 0)
        throw std::invalid_argument("embedding needs an odd tap count >= the current one");
    AuxChannelParams p = params;
    int pad = (L_new - L) / 2;
    p.h_aux.assign((size_t)L_new, cplx{0, 0});
    for (int k = 0; k < L; ++k) p.h_aux[(size_t)(k + pad)] = params.h_aux[(size_t)k];
    return p;
}

} // namespace ddair
