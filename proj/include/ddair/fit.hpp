#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <vector>
#include "ddair/aux_density.hpp"
#include "ddair/channel.hpp"
#include "ddair/constellation.hpp"
#include "ddair/trellis.hpp"

// pilot-based estimation of the auxiliary model: start from a moment-matched
// initializer built around a physical impulse-response prior, then climb the
// pilot AIR with a derivative-free coordinate-group pattern search.

namespace ddair {

struct FitBounds {
    double mu_rms_scale = 10.0;  // |mu| <= scale * rms of received
    double var_floor = 1e-10;
    double var_scale = 10.0;     // sigma^2 <= scale * sample variance
    double tap_peak_scale = 10.0; // |h tap| <= scale * initializer peak
};

struct FitConfig {
    int pilot_count = 5000;   // symbols used from the front of the block
    int L_target = 3;         // odd tap count of the fitted model
    int max_iterations = 30;  // full coordinate rounds per restart
    double tolerance = 2e-3;  // bpcu; a round gaining less is "lean"
    int restart_count = 3;    // jittered restarts, best pilot AIR wins
    int screen_count = 0;     // >0: pre-screen probes on this many pilots
    std::uint64_t seed = 1;   // restart jitter stream
    FitBounds bounds{};
    QuadratureSpec quad{};
    std::uint64_t branch_budget = 1ull << 20;
};

struct FitResult {
    AuxChannelParams params;
    double pilot_air = 0.0;          // full pilot objective of `params`
    std::vector<double> trace;       // accepted objective values, non-decreasing
    std::string init_provenance;
    bool converged = false;          // false = max_iterations exhausted
    std::uint64_t pilot_block_id = 0;
    std::vector<std::string> notes;  // e.g. pilot floor warning
};

// moment-matched starting point: h from the centered truncation of `prior`
// scaled by a least-squares intensity match, mu_post from zero-field samples,
// variances from phase-split residual moments, mu_pre zero. Throws on
// constant pilots.
AuxChannelParams initialize_params(const SymbolBlock& pilots,
                                   std::span<const double> received,
                                   const Constellation& cst, int L,
                                   const ImpulseResponse& prior,
                                   const FitBounds& bounds = {});

// maximizes estimate_air over the pilot block. Coordinate groups (log
// variances, post-detector bias, taps, pre-detector bias) are probed with
// +/- steps, accepted moves are retried while they keep improving, and a
// round gaining under `tolerance` halves the steps; a second consecutive
// lean round, or one with no accepted move at all, ends the search.
FitResult fit(const SymbolBlock& pilots, std::span<const double> received,
              const Constellation& cst, const ImpulseResponse& prior,
              const FitConfig& config);

// same search but from an explicit starting point (e.g. a lower-L result
// zero-pad embedded to L_target); `start.h_aux` must have L_target taps.
FitResult fit_from(const SymbolBlock& pilots, std::span<const double> received,
                   const Constellation& cst, const AuxChannelParams& start,
                   const FitConfig& config,
                   const std::string& provenance = "explicit start");

// AIR of fitted params on a disjoint block. Rejects an empty holdout and a
// holdout whose block id matches the fit's pilot block.
RateEstimate cross_validate(const FitResult& fitted,
                            std::span<const double> holdout_received,
                            const SymbolBlock& holdout_symbols,
                            const Constellation& cst,
                            const RateOptions& options = {});

// zero-pad embedding of fitted taps into a longer odd length, for seeding a
// higher-L fit from a lower-L result; everything else copies over.
AuxChannelParams embed_taps(const AuxChannelParams& params, int L_new);

} // namespace ddair
