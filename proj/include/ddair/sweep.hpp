#pragma once
#include <cstdint>
#include <string>
#include <vector>
#include "ddair/channel.hpp"
#include "ddair/constellation.hpp"
#include "ddair/fit.hpp"

// grid sweeps over (constellation, L, attenuation): each rate point simulates
// a capture, fits the auxiliary model on leading pilots, and scores the
// remaining symbols. Rows are independent, seeded from their own coordinates,
// and written as CSV plus a gnuplot-style companion grouped by series.

namespace ddair {

struct SweepConfig {
    std::vector<ConstKind> constellations;
    std::uint32_t q = 4;
    std::vector<int> L_list;
    std::vector<double> attenuation_db;
    std::int64_t n = 10000;     // symbols per rate point (pilots + holdout)
    int pilot_count = 5000;
    std::uint64_t seed = 1;

    PulseParams pulse;          // units: Bd, Sa/s, dB, dBm throughout
    FiberParams fiber;          // length_km = 0 means back-to-back
    RxParams rx;
    NoiseSpec noise;
    MzmParams mzm;
    double launch_dbm = 0.0;    // mean symbol power target (mW units)

    FitConfig fit;              // L_target / pilot_count filled per row
    int workers = 0;            // 0: DDAIR_WORKERS env, else 1
    std::string out_path = "sweep.csv";
    std::string name = "custom";

    void validate() const;
};

struct RatePoint { // one grid cell, self-describing and order-free
    ConstKind kind;
    std::uint32_t q = 4;
    int L = 1;
    double attenuation_db = 0;
    std::uint64_t seed = 0;
};

struct SweepRow {
    ConstKind kind;
    std::uint32_t q = 0;
    int L = 0;
    double attenuation_db = 0;
    double launch_dbm = 0;
    double air = 0;        // holdout rate; NaN when failed
    double pilot_air = 0;
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    std::string fit_id;    // hash of the fitted params, or "failed:<code>"

    bool failed() const { return fit_id.rfind("failed:", 0) == 0; }
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string csv_path;
    std::string plot_path;
};

// deterministic seed for a grid cell, independent of execution order
std::uint64_t rate_point_seed(const SweepConfig& cfg, ConstKind kind, int L,
                              double attenuation_db);

// 16-hex-digit content hash of a fitted parameter set (the fit_id column)
std::string params_digest(const AuxChannelParams& p);

// simulate, fit, and score one cell; errors come back as a failed row
SweepRow run_rate_point(const SweepConfig& cfg, const RatePoint& pt);

// full grid product through a bounded worker pool; writes CSV + plot file
SweepResult run_sweep(const SweepConfig& cfg);

// CSV round trip (schema-stable, bit-preserving doubles)
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::string& path);

// named presets: fig3a (B2B, Q=4), fig3b (20 km SSMF, Q=4), fig3c (B2B, Q=8)
SweepConfig make_preset(const std::string& name);

} // namespace ddair
