#include "ddair/trellis.hpp"

#include "ddair/mathutil.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

// Plain serial forward recursion, written for readability rather than speed:
// every branch density is evaluated from scratch, states stay in log domain
// with no rescaling, and windows come from one explicit padded value array.
// test_trellis pins the optimized kernel against this.

namespace ddair {
namespace naive {

double forward_log_marginal(std::span<const double> received,
                            std::span<const std::uint32_t> symbols,
                            const Constellation& cst,
                            const AuxChannelParams& params,
                            const RateOptions& opt) {
    params.validate();
    opt.quad.validate();
    const int n = (int)symbols.size();
    if (n < 1) throw std::invalid_argument("empty symbol block");
    if (received.size() != 2 * (std::size_t)n)
        throw std::invalid_argument("received length must be twice the symbol count");
    const int q = (int)cst.points.size();
    const int m = params.memory();
    if (n < m) throw std::invalid_argument("block shorter than the trellis memory");
    const int dp = (m + 1) / 2;
    const double neg = -std::numeric_limits<double>::infinity();
    const double logq = std::log((double)q);

    std::vector<std::uint8_t> kn(opt.known);
    if (kn.empty()) {
        kn.assign(n, 0);
        for (int i = 0; i < n; ++i)
            if (i < m || i >= n - m) kn[i] = 1;
    } else if ((int)kn.size() != n) {
        throw std::invalid_argument("known mask length must match the symbol count");
    }

    // pad[k] holds the value of symbol k - m; outside the block the supplied
    // context applies, then zero
    std::vector<double> pad(n + 2 * m, 0.0);
    for (int t = -m; t < n + m; ++t) {
        double v = 0.0;
        if (t < 0) {
            int k = (int)opt.left_context.size() + t;
            if (k >= 0) v = opt.left_context[k];
        } else if (t >= n) {
            int k = t - n;
            if (k < (int)opt.right_context.size()) v = opt.right_context[k];
        } else {
            v = cst.points[symbols[t]];
        }
        pad[t + m] = v;
    }

    std::int64_t S = 1;
    for (int i = 0; i < m; ++i) S *= q;

    // density of pair j given explicit window values (oldest first)
    auto pair_density = [&](int j, const std::vector<double>& win) {
        cplx s0 = branch_amplitude(win, params.h_aux, 0);
        cplx s1 = branch_amplitude(win, params.h_aux, 1);
        return log_density_sample(received[2 * j], s0, 0, params, opt.quad) +
               log_density_sample(received[2 * j + 1], s1, 1, params, opt.quad);
    };

    // window of pair j when symbols [lo, lo+m) carry the digits of `state`
    // and everything else reads the padded array
    auto state_window = [&](int j, std::int64_t state, int lo,
                            std::vector<double>& win) {
        for (int u = 0; u <= m; ++u) {
            int t = j + dp - m + u;
            if (t >= lo && t < lo + m) {
                std::int64_t d = state;
                for (int k = 0; k < t - lo; ++k) d /= q;
                win[u] = cst.points[d % q];
            } else {
                win[u] = pad[t + m];
            }
        }
    };

    std::vector<double> alpha(S, neg), win(m + 1), terms;
    for (std::int64_t s = 0; s < S; ++s) {
        double prior = 0.0;
        bool ok = true;
        std::int64_t d = s;
        for (int u = 0; u < m; ++u, d /= q) {
            if (kn[u] && d % q != (std::int64_t)symbols[u]) ok = false;
            if (!kn[u]) prior -= logq;
        }
        if (!ok) continue;
        double border = 0.0;
        for (int j = 0; j < m / 2; ++j) {
            state_window(j, s, 0, win);
            border += pair_density(j, win);
        }
        alpha[s] = prior + border;
    }

    std::vector<double> next(S);
    for (int i = m; i < n; ++i) {
        int j = i - dp;
        for (std::int64_t sp = 0; sp < S; ++sp) {
            terms.clear();
            for (int r = 0; r < q; ++r) {
                std::int64_t w = sp * q + r; // digits = the window, oldest lowest
                if (kn[i] && (std::int64_t)(w / S) != (std::int64_t)symbols[i]) continue;
                if (alpha[w % S] == neg) continue;
                std::int64_t d = w;
                for (int u = 0; u <= m; ++u, d /= q) win[u] = cst.points[d % q];
                terms.push_back(alpha[w % S] + pair_density(j, win));
            }
            next[sp] = terms.empty() ? neg
                                     : logsumexp(terms) - (kn[i] ? 0.0 : logq);
        }
        std::swap(alpha, next);
    }

    terms.clear();
    for (std::int64_t s = 0; s < S; ++s) {
        if (alpha[s] == neg) continue;
        double border = 0.0;
        for (int j = n - dp; j < n; ++j) {
            state_window(j, s, n - m, win);
            border += pair_density(j, win);
        }
        terms.push_back(alpha[s] + border);
    }
    return terms.empty() ? neg : logsumexp(terms);
}

} // namespace naive
} // namespace ddair
