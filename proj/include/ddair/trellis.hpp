#pragma once
#include "ddair/aux_density.hpp"
#include "ddair/constellation.hpp"
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ddair {

struct TrellisSpec {
    int q = 0;
    int memory = 0; // symbols of state, m = (taps-1)/2
    std::uint64_t state_count = 0;  // q^m
    std::uint64_t branch_count = 0; // q^(m+1)
    static TrellisSpec make(int q, int taps);
};

// Options shared by the rate estimator entry points.
//
// known: per-symbol flags, 1 = the symbol is pinned to its value in `symbols`
// when marginalizing. Empty means the default: first and last m symbols
// pinned (pilot borders), everything else free.
//
// left_context / right_context: symbol *values* just outside the block, in
// time order (left_context.back() sits directly before symbol 0,
// right_context.front() directly after symbol n-1). Border samples whose
// response window pokes outside the block read these; absent context
// contributes no field (zero).
struct RateOptions {
    std::vector<std::uint8_t> known;
    std::vector<double> left_context;
    std::vector<double> right_context;
    QuadratureSpec quad{};
    std::uint64_t branch_budget = 1ull << 20;
};

struct RateEstimate {
    double air = 0.0;   // bits per transmitted symbol, raw -- never clipped
    std::int64_t n = 0; // rate-bearing (free) symbols
    int taps = 0;
    double log_q_joint = 0.0;    // log q(y|x), natural log
    double log_q_marginal = 0.0; // log q(y)
    bool negative = false;       // raw air < 0: gross model mismatch
    std::uint64_t seed = 0;
    std::string provenance;
};

// log q(y|x): sum of per-sample log densities over all 2n samples, windows
// taken from the given symbols (borders padded by context/zero).
double log_conditional(std::span<const double> received,
                       std::span<const std::uint32_t> symbols,
                       const Constellation& cst, const AuxChannelParams& params,
                       const RateOptions& opt = {});

// log q(y) by the forward recursion over q^m states. `symbols` supplies the
// values at pinned positions; free positions draw uniformly from the
// constellation.
double forward_log_marginal(std::span<const double> received,
                            std::span<const std::uint32_t> symbols,
                            const Constellation& cst,
                            const AuxChannelParams& params,
                            const RateOptions& opt = {});

// log q(y) by exhaustive enumeration of the free symbols; q^(free count)
// must stay within 1e6 or BudgetError is thrown. Oracle for the recursion.
double brute_force_log_marginal(std::span<const double> received,
                                std::span<const std::uint32_t> symbols,
                                const Constellation& cst,
                                const AuxChannelParams& params,
                                const RateOptions& opt = {});

// air = (log2 q(y|x) - log2 q(y)) / n_free. Raw value, negative kept.
RateEstimate estimate_air(std::span<const double> received,
                          std::span<const std::uint32_t> symbols,
                          const Constellation& cst, const AuxChannelParams& params,
                          const RateOptions& opt = {});

// Straight-line serial implementation of the forward recursion: fresh density
// evaluation per branch per step, no table, no rescaling tricks. Kept as the
// readable cross-check and benchmark baseline for the optimized kernel.
namespace naive {
double forward_log_marginal(std::span<const double> received,
                            std::span<const std::uint32_t> symbols,
                            const Constellation& cst,
                            const AuxChannelParams& params,
                            const RateOptions& opt = {});
}

} // namespace ddair
