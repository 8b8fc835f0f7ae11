#include "ddair/trellis.hpp"

#include "ddair/mathutil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddair {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.6931471805599453094;

// Everything the per-pair window logic needs, validated once per call.
// Pair j = the sample pair (received[2j], received[2j+1]); its window is the
// m+1 symbols (x_{j+dp-m} .. x_{j+dp}) with dp = ceil(m/2). Reads outside the
// block fall back to the caller-supplied context, then to zero field.
struct BlockView {
    std::span<const double> y;
    std::span<const std::uint32_t> xs;
    const Constellation* cst;
    const AuxChannelParams* params;
    const RateOptions* opt;
    std::vector<std::uint8_t> kn;
    int n, m, dp, q;

    double sym(int t) const {
        if (t < 0) {
            const auto& lc = opt->left_context;
            int k = (int)lc.size() + t;
            return k >= 0 ? lc[k] : 0.0;
        }
        if (t >= n) {
            const auto& rc = opt->right_context;
            int k = t - n;
            return k < (int)rc.size() ? rc[k] : 0.0;
        }
        return cst->points[xs[t]];
    }
};

BlockView make_view(std::span<const double> received,
                    std::span<const std::uint32_t> symbols,
                    const Constellation& cst, const AuxChannelParams& params,
                    const RateOptions& opt) {
    params.validate();
    opt.quad.validate();
    BlockView bv;
    bv.n = (int)symbols.size();
    if (bv.n < 1) throw std::invalid_argument("empty symbol block");
    if (received.size() != 2 * (std::size_t)bv.n)
        throw std::invalid_argument("received length must be twice the symbol count");
    bv.q = (int)cst.points.size();
    if (bv.q < 2) throw std::invalid_argument("constellation must have at least 2 points");
    for (auto v : symbols)
        if (v >= (std::uint32_t)bv.q)
            throw std::invalid_argument("symbol index out of range");
    bv.m = params.memory();
    bv.dp = (bv.m + 1) / 2;
    bv.y = received;
    bv.xs = symbols;
    bv.cst = &cst;
    bv.params = &params;
    bv.opt = &opt;
    if (opt.known.empty()) {
        bv.kn.assign(bv.n, 0);
        for (int i = 0; i < bv.n; ++i)
            if (i < bv.m || i >= bv.n - bv.m) bv.kn[i] = 1;
    } else {
        if ((int)opt.known.size() != bv.n)
            throw std::invalid_argument("known mask length must match the symbol count");
        bv.kn.assign(opt.known.begin(), opt.known.end());
    }
    return bv;
}

double pair_logdensity(const BlockView& bv, int j, std::span<const double> win) {
    cplx s0 = branch_amplitude(win, bv.params->h_aux, 0);
    cplx s1 = branch_amplitude(win, bv.params->h_aux, 1);
    return log_density_sample(bv.y[2 * j], s0, 0, *bv.params, bv.opt->quad) +
           log_density_sample(bv.y[2 * j + 1], s1, 1, *bv.params, bv.opt->quad);
}

// Density of the leading pairs j in [0, floor(m/2)) whose windows read only
// the first m symbols -- exactly the initial trellis state -- plus context.
double start_border(const BlockView& bv, std::uint64_t state, double* win) {
    double tot = 0.0;
    for (int j = 0; j < bv.m / 2; ++j) {
        for (int u = 0; u <= bv.m; ++u) {
            int t = j + bv.dp - bv.m + u;
            if (t < 0)
                win[u] = bv.sym(t);
            else {
                std::uint64_t d = state;
                for (int k = 0; k < t; ++k) d /= bv.q;
                win[u] = bv.cst->points[d % bv.q];
            }
        }
        tot += pair_logdensity(bv, j, {win, (std::size_t)bv.m + 1});
    }
    return tot;
}

// Density of the trailing pairs j in [n - ceil(m/2), n) whose windows read
// only the last m symbols -- the final trellis state -- plus context.
double end_border(const BlockView& bv, std::uint64_t state, double* win) {
    double tot = 0.0;
    for (int j = bv.n - bv.dp; j < bv.n; ++j) {
        for (int u = 0; u <= bv.m; ++u) {
            int t = j + bv.dp - bv.m + u;
            if (t >= bv.n)
                win[u] = bv.sym(t);
            else {
                std::uint64_t d = state;
                for (int k = 0; k < t - (bv.n - bv.m); ++k) d /= bv.q;
                win[u] = bv.cst->points[d % bv.q];
            }
        }
        tot += pair_logdensity(bv, j, {win, (std::size_t)bv.m + 1});
    }
    return tot;
}

} // namespace

TrellisSpec TrellisSpec::make(int q, int taps) {
    if (q < 2) throw std::invalid_argument("constellation order must be at least 2");
    if (taps < 1 || taps % 2 == 0)
        throw std::invalid_argument("tap count must be odd and positive");
    TrellisSpec ts;
    ts.q = q;
    ts.memory = (taps - 1) / 2;
    ts.state_count = 1;
    for (int i = 0; i < ts.memory; ++i) {
        if (ts.state_count > UINT64_MAX / (std::uint64_t)q / (std::uint64_t)q)
            throw std::invalid_argument("trellis size overflows");
        ts.state_count *= q;
    }
    ts.branch_count = ts.state_count * q;
    return ts;
}

double log_conditional(std::span<const double> received,
                       std::span<const std::uint32_t> symbols,
                       const Constellation& cst, const AuxChannelParams& params,
                       const RateOptions& opt) {
    BlockView bv = make_view(received, symbols, cst, params, opt);
    std::vector<double> win(bv.m + 1);
    double tot = 0.0;
    for (int j = 0; j < bv.n; ++j) {
        for (int u = 0; u <= bv.m; ++u) win[u] = bv.sym(j + bv.dp - bv.m + u);
        tot += pair_logdensity(bv, j, win);
    }
    return tot;
}

double forward_log_marginal(std::span<const double> received,
                            std::span<const std::uint32_t> symbols,
                            const Constellation& cst,
                            const AuxChannelParams& params,
                            const RateOptions& opt) {
    BlockView bv = make_view(received, symbols, cst, params, opt);
    if (bv.n < bv.m) throw std::invalid_argument("block shorter than the trellis memory");
    TrellisSpec ts = TrellisSpec::make(bv.q, params.L());
    const std::int64_t S = (std::int64_t)ts.state_count;
    const std::int64_t B = (std::int64_t)ts.branch_count;
    const int q = bv.q, m = bv.m;
    const double logq = std::log((double)q);

    BranchTable tab(cst.points, params, opt.quad, opt.branch_budget);

    // initial distribution over (x_0..x_{m-1}): uniform prior on the free
    // positions, dead where a pinned position disagrees; the leading border
    // pairs depend only on this state so their density folds in here
    std::vector<double> alpha(S), next(S);
#pragma omp parallel for schedule(static) if (S >= 256)
    for (std::int64_t s = 0; s < S; ++s) {
        std::vector<double> win(m + 1);
        double prior = 0.0;
        bool dead = false;
        std::uint64_t d = (std::uint64_t)s;
        for (int u = 0; u < m; ++u, d /= q) {
            if (bv.kn[u]) {
                if (d % q != bv.xs[u]) { dead = true; break; }
            } else {
                prior -= logq;
            }
        }
        alpha[s] = dead ? kNegInf
                        : prior + start_border(bv, (std::uint64_t)s, win.data());
    }

    long double acc = 0.0L;
    auto rescale = [&]() {
        double mx = kNegInf;
        for (std::int64_t s = 0; s < S; ++s) mx = std::max(mx, alpha[s]);
        if (mx == kNegInf) return false;
        acc += (long double)mx;
        for (std::int64_t s = 0; s < S; ++s)
            if (alpha[s] != kNegInf) alpha[s] -= mx;
        return true;
    };
    if (!rescale()) return kNegInf;

    std::vector<double> d0(tab.entry_count(0)), d1(tab.entry_count(1));
    std::vector<double> bsc(B);
    for (int i = m; i < bv.n; ++i) {
        int j = i - bv.dp;
        tab.eval_phase(0, bv.y[2 * j], d0.data());
        tab.eval_phase(1, bv.y[2 * j + 1], d1.data());
#pragma omp parallel for schedule(static) if (B >= 2048)
        for (std::int64_t w = 0; w < B; ++w)
            bsc[w] = d0[tab.entry_of((std::uint64_t)w, 0)] +
                     d1[tab.entry_of((std::uint64_t)w, 1)];

        const bool pinned = bv.kn[i] != 0;
        const std::uint32_t a = bv.xs[i];
        if (m == 0) {
            if (pinned) {
                next[0] = alpha[0] + bsc[a];
            } else {
                double mx = kNegInf;
                for (int r = 0; r < q; ++r) mx = std::max(mx, bsc[r]);
                double sum = 0.0;
                for (int r = 0; r < q; ++r) sum += exp_one(bsc[r] - mx);
                next[0] = alpha[0] + mx + std::log(sum) - logq;
            }
        } else {
            const std::int64_t topdiv = S / q;
#pragma omp parallel for schedule(static) if (S >= 256)
            for (std::int64_t sp = 0; sp < S; ++sp) {
                if (pinned && (std::uint32_t)(sp / topdiv) != a) {
                    next[sp] = kNegInf;
                    continue;
                }
                // incoming branches w = sp*q + r; r is the oldest symbol
                // leaving the window, prev = w mod S
                double mx = kNegInf;
                for (int r = 0; r < q; ++r) {
                    std::int64_t w = sp * q + r;
                    double t = alpha[w % S] + bsc[w];
                    if (t > mx) mx = t;
                }
                if (mx == kNegInf) {
                    next[sp] = kNegInf;
                    continue;
                }
                double sum = 0.0;
                for (int r = 0; r < q; ++r) {
                    std::int64_t w = sp * q + r;
                    sum += exp_one(alpha[w % S] + bsc[w] - mx);
                }
                next[sp] = mx + std::log(sum) + (pinned ? 0.0 : -logq);
            }
        }
        std::swap(alpha, next);
        if (!rescale()) return kNegInf;
    }

    // trailing border pairs depend only on the final state
    std::vector<double> terms(S);
#pragma omp parallel for schedule(static) if (S >= 256)
    for (std::int64_t s = 0; s < S; ++s) {
        std::vector<double> win(m + 1);
        terms[s] = alpha[s] == kNegInf
                       ? kNegInf
                       : alpha[s] + end_border(bv, (std::uint64_t)s, win.data());
    }
    return (double)(acc + (long double)logsumexp(terms));
}

double brute_force_log_marginal(std::span<const double> received,
                                std::span<const std::uint32_t> symbols,
                                const Constellation& cst,
                                const AuxChannelParams& params,
                                const RateOptions& opt) {
    BlockView bv = make_view(received, symbols, cst, params, opt);
    std::vector<int> freep;
    for (int i = 0; i < bv.n; ++i)
        if (!bv.kn[i]) freep.push_back(i);
    const std::uint64_t cap = 1000000;
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < freep.size(); ++k) {
        if (total > cap / (std::uint64_t)bv.q)
            throw BudgetError(total * (std::uint64_t)bv.q, cap);
        total *= (std::uint64_t)bv.q;
    }
    if (total > cap) throw BudgetError(total, cap);

    std::vector<std::uint32_t> xw(symbols.begin(), symbols.end());
    std::vector<double> terms;
    terms.reserve(total);
    for (std::uint64_t t = 0; t < total; ++t) {
        std::uint64_t d = t;
        for (int p : freep) {
            xw[p] = (std::uint32_t)(d % bv.q);
            d /= bv.q;
        }
        terms.push_back(log_conditional(received, xw, cst, params, opt));
    }
    return logsumexp(terms) - (double)freep.size() * std::log((double)bv.q);
}

RateEstimate estimate_air(std::span<const double> received,
                          std::span<const std::uint32_t> symbols,
                          const Constellation& cst, const AuxChannelParams& params,
                          const RateOptions& opt) {
    BlockView bv = make_view(received, symbols, cst, params, opt);
    std::int64_t nfree = 0;
    for (int i = 0; i < bv.n; ++i)
        if (!bv.kn[i]) ++nfree;
    if (nfree == 0) throw std::invalid_argument("no rate-bearing symbols in the block");

    RateEstimate est;
    est.log_q_joint = log_conditional(received, symbols, cst, params, opt);
    est.log_q_marginal = forward_log_marginal(received, symbols, cst, params, opt);
    est.n = nfree;
    est.taps = params.L();
    est.air = (est.log_q_joint - est.log_q_marginal) / ((double)nfree * kLn2);
    est.negative = est.air < 0.0;
    return est;
}

} // namespace ddair
