// ddair: command line front end. Subcommands: simulate (emit a capture),
// fit (pilots -> parameter file), rate (one rate point, simulated or from a
// capture), sweep (grid -> CSV + plot data), oracle (small-instance
// brute-force cross-checks of the forward recursion).
//
// --preset fig3a|fig3b|fig3c seeds the defaults; --config reads a bracketed
// key=value file ([subcommand] sections); explicit flags win over both.

#include <cinttypes>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddair/capture_io.hpp"
#include "ddair/dsp.hpp"
#include "ddair/sweep.hpp"
#include "ddair/trellis.hpp"

using namespace ddair;

namespace {

// staged per-phase noise flags; only the ones the user set touch the config
struct NoiseFlags {
    std::vector<double> s2pre, s2post, mupost, mupre;

    static double pick(const std::vector<double>& v, int ph) {
        return v.size() == 1 ? v[0] : v[(size_t)ph];
    }

    void apply(NoiseSpec& ns) const {
        if (!mupre.empty() && mupre.size() != 2 && mupre.size() != 4)
            throw std::invalid_argument("--mu-pre wants re,im or re0,im0,re1,im1");
        for (int ph = 0; ph < 2; ++ph) {
            if (!s2pre.empty()) ns.sigma2_pre[ph] = pick(s2pre, ph);
            if (!s2post.empty()) ns.sigma2_post[ph] = pick(s2post, ph);
            if (!mupost.empty()) ns.mu_post[ph] = pick(mupost, ph);
            if (!mupre.empty()) {
                size_t o = mupre.size() == 2 ? 0 : 2 * (size_t)ph;
                ns.mu_pre[ph] = {mupre[o], mupre[o + 1]};
            }
        }
    }
};

struct Staged {
    NoiseFlags noise;
    std::string mzm; // "linear" | "sine"
    std::vector<std::string> kinds;
    std::string kind = "PAM"; // single-cell subcommands
    double att = 10.0;
    int L = 3;

    void apply(SweepConfig& cfg) const {
        noise.apply(cfg.noise);
        if (!mzm.empty())
            cfg.mzm.transfer = mzm == "sine" ? MzmTransfer::sine_field : MzmTransfer::ideal_linear;
        if (!kinds.empty()) {
            cfg.constellations.clear();
            for (const std::string& k : kinds) cfg.constellations.push_back(parse_const_kind(k));
        }
    }
};

void add_channel_flags(CLI::App* sub, SweepConfig& cfg, Staged& st) {
    sub->add_option("--symbol-rate", cfg.pulse.symbol_rate, "symbol rate [Bd]")
        ->capture_default_str();
    sub->add_option("--rolloff", cfg.pulse.rolloff, "RC rolloff")->capture_default_str();
    sub->add_option("--span", cfg.pulse.span_symbols, "RC span, one-sided [symbols]")
        ->capture_default_str();
    sub->add_option("--fiber-km", cfg.fiber.length_km, "SSMF length [km], 0 = back-to-back")
        ->capture_default_str();
    sub->add_option("--dispersion", cfg.fiber.dispersion_ps_nm_km, "[ps/nm/km]")
        ->capture_default_str();
    sub->add_option("--lambda-nm", cfg.fiber.lambda_nm, "carrier wavelength [nm]")
        ->capture_default_str();
    sub->add_option("--fiber-loss", cfg.fiber.atten_db_km, "[dB/km]")->capture_default_str();
    sub->add_option("--rx-bw", cfg.rx.bw_3db_hz, "receiver 3 dB bandwidth [Hz]")
        ->capture_default_str();
    sub->add_option("--launch-dbm", cfg.launch_dbm, "mean launch power [dBm]")
        ->capture_default_str();
    sub->add_option("--mzm", st.mzm, "modulator transfer: linear | sine")
        ->check(CLI::IsMember({"linear", "sine"}));
    sub->add_option("--vpi", cfg.mzm.v_pi, "MZM V_pi")->capture_default_str();
    sub->add_option("--bias", cfg.mzm.bias, "MZM bias voltage")->capture_default_str();
    sub->add_option("--sigma2-pre", st.noise.s2pre, "E|n1|^2 per phase (one or two values)")
        ->delimiter(',')
        ->expected(1, 2);
    sub->add_option("--sigma2-post", st.noise.s2post, "post-detector variance per phase")
        ->delimiter(',')
        ->expected(1, 2);
    sub->add_option("--mu-post", st.noise.mupost, "post-detector offset per phase")
        ->delimiter(',')
        ->expected(1, 2);
    sub->add_option("--mu-pre", st.noise.mupre, "complex pre-detector offset: re,im[,re,im]")
        ->delimiter(',')
        ->expected(2, 4);
}

void add_fit_flags(CLI::App* sub, FitConfig& f) {
    sub->add_option("--max-iterations", f.max_iterations)->capture_default_str();
    sub->add_option("--tolerance", f.tolerance, "stop when a round gains less [bpcu]")
        ->capture_default_str();
    sub->add_option("--restarts", f.restart_count, "jittered restarts")->capture_default_str();
    sub->add_option("--screen", f.screen_count, "pilots used to screen coordinate probes")
        ->capture_default_str();
    sub->add_option("--branch-budget", f.branch_budget, "max trellis branches")
        ->capture_default_str();
    sub->add_option("--quad-nodes", f.quad.nodes, "quadrature nodes")->capture_default_str();
}

void print_row_header() {
    std::printf("%-4s %-2s %-3s %9s %9s %10s %10s %s\n", "kind", "Q", "L", "att[dB]",
                "P[dBm]", "air", "pilot_air", "fit_id");
}

void print_row(const SweepRow& r) {
    std::printf("%-4s %-2u %-3d %9.3f %9.3f %10.5f %10.5f %s\n",
                r.kind == ConstKind::ASK ? "ASK" : "PAM", r.q, r.L, r.attenuation_db,
                r.launch_dbm, r.air, r.pilot_air, r.fit_id.c_str());
}

// band-limited upsample by integer R with a planted delay in output samples;
// zero margins absorb the circular shift. Output rate = R x input rate.
std::vector<double> upsample_with_delay(const std::vector<double>& y, int R, double delay) {
    size_t margin = 80 + (size_t)(std::ceil(std::fabs(delay)) / (double)R);
    size_t n = y.size(), padded = n + 2 * margin;
    size_t n2 = 1;
    while (n2 < padded) n2 <<= 1;
    std::vector<cplx> v(n2, cplx{});
    for (size_t i = 0; i < n; ++i) v[i + margin] = y[i];
    fft_inplace(v, false);

    size_t m = n2 * (size_t)R;
    std::vector<cplx> big(m, cplx{});
    auto ramp = [&](double k) { // delay in output samples -> phase per output bin
        double ph = -2.0 * M_PI * k * delay / (double)m;
        return cplx{std::cos(ph), std::sin(ph)};
    };
    double g = (double)R;
    for (size_t k = 0; k < n2 / 2; ++k) big[k] = v[k] * g * ramp((double)k);
    for (size_t k = 1; k < n2 / 2; ++k)
        big[m - k] = v[n2 - k] * g * ramp(-(double)k);
    if (R == 1) {
        big[n2 / 2] = v[n2 / 2] * ramp((double)(n2 / 2)); // lone Nyquist bin
    } else {
        big[n2 / 2] = v[n2 / 2] * (0.5 * g) * ramp((double)(n2 / 2));
        big[m - n2 / 2] = v[n2 / 2] * (0.5 * g) * ramp(-(double)(n2 / 2));
    }
    fft_inplace(big, true);
    std::vector<double> out((size_t)R * padded);
    for (size_t j = 0; j < out.size(); ++j) out[j] = big[j].real();
    return out;
}

struct Stream {
    SymbolBlock pilots, hold;
    double gain = 0.0;
    ImpulseResponse ir;
};

// symbol blocks + channel shared by simulate / fit / rate: stream seed is
// cfg.seed with the same sub-seed layout the sweep rows use
Stream make_stream(const SweepConfig& cfg, const Constellation& cst, double att) {
    Stream s;
    int P = cfg.pilot_count;
    std::int64_t H = cfg.n - P;
    if (H < 0) throw std::invalid_argument("n must be >= pilot_count");
    s.pilots = draw_symbols(cst, (size_t)P, splitmix64(cfg.seed + 1));
    s.hold = draw_symbols(cst, (size_t)H, splitmix64(cfg.seed + 2));
    s.gain = std::sqrt(std::pow(10.0, cfg.launch_dbm / 10.0) / cst.mean_power());
    s.ir = build_impulse_response(cfg.pulse, cfg.fiber, cfg.rx, att);
    return s;
}

ReceivedBlock simulate_stream(const SweepConfig& cfg, const Constellation& cst, const Stream& s) {
    size_t n = s.pilots.n() + s.hold.n();
    std::vector<double> x(2 * n, 0.0);
    for (size_t i = 0; i < s.pilots.n(); ++i)
        x[2 * i] = mzm_field(s.gain * cst.points[s.pilots.idx[i]], cfg.mzm);
    for (size_t i = 0; i < s.hold.n(); ++i)
        x[2 * (s.pilots.n() + i)] = mzm_field(s.gain * cst.points[s.hold.idx[i]], cfg.mzm);
    auto field = apply_channel(x, s.ir);
    return simulate_capture(field, cfg.noise, cfg.pulse.symbol_rate, splitmix64(cfg.seed + 3));
}

// align a capture to the 2 samples/symbol pilot grid. Returns the aligned
// stream plus the number of leading symbols lost to the resampler trim.
std::pair<std::vector<double>, size_t> align_capture(const Capture& cap, const SweepConfig& cfg,
                                                     const Constellation& cst, const Stream& s) {
    if (cap.complex_field)
        throw std::invalid_argument("capture holds a complex field, expected detected samples");
    double fs = cfg.pulse.symbol_rate;
    bool aligned = cap.phase_aligned_2sps &&
                   std::fabs(cap.sample_rate - 2 * fs) <= 1e-9 * cap.sample_rate;
    if (aligned) return {cap.samples, 0};

    // expected pilot intensity at 2 sps is the sync template
    std::vector<double> xp(2 * s.pilots.n(), 0.0);
    for (size_t i = 0; i < s.pilots.n(); ++i)
        xp[2 * i] = mzm_field(s.gain * cst.points[s.pilots.idx[i]], cfg.mzm);
    auto fp = apply_channel(xp, s.ir);
    std::vector<double> tmpl(fp.size());
    for (size_t k = 0; k < fp.size(); ++k) {
        int ph = (int)(k & 1);
        cplx e = fp[k] + cfg.noise.mu_pre[ph];
        tmpl[k] = std::norm(e) + cfg.noise.sigma2_pre[ph] + cfg.noise.mu_post[ph];
    }

    auto pass1 = resample_to_2sps(cap.samples, cap.sample_rate, fs, 0.0);
    auto est = synchronize(pass1.y, tmpl);
    double ratio = cap.sample_rate / (2 * fs);
    double d_in = ((double)pass1.trimmed_front + est.delay) * ratio;
    auto pass2 = resample_to_2sps(cap.samples, cap.sample_rate, fs, d_in);
    std::printf("sync: delay %.3f samples at 2 sps (peak %.3f), input delay %.3f, "
                "front trim %d samples\n",
                est.delay, est.peak, d_in, (int)pass2.trimmed_front);
    return {std::move(pass2.y), (size_t)(pass2.trimmed_front / 2)};
}

SymbolBlock slice_block(const SymbolBlock& b, size_t from, size_t count, std::uint64_t salt) {
    SymbolBlock out;
    out.idx.assign(b.idx.begin() + (std::ptrdiff_t)from,
                   b.idx.begin() + (std::ptrdiff_t)(from + count));
    out.seed = b.seed;
    out.source = b.source;
    out.id = splitmix64(b.id + salt);
    return out;
}

int run_simulate(const SweepConfig& cfg, const Staged& st, const std::string& out, int oversample,
                 double delay) {
    auto cst = make_constellation(parse_const_kind(st.kind), cfg.q);
    auto stream = make_stream(cfg, cst, st.att);
    auto blk = simulate_stream(cfg, cst, stream);

    Capture cap;
    cap.complex_field = false;
    cap.symbol_rate = cfg.pulse.symbol_rate;
    if (oversample <= 1 && delay == 0.0) {
        cap.phase_aligned_2sps = true;
        cap.sample_rate = 2 * cfg.pulse.symbol_rate;
        cap.samples = blk.y;
    } else {
        int r = oversample < 1 ? 1 : oversample;
        cap.phase_aligned_2sps = false;
        cap.sample_rate = 2 * cfg.pulse.symbol_rate * r;
        cap.samples = upsample_with_delay(blk.y, r, delay);
    }
    write_capture(out, cap);
    std::printf("wrote %s: %zu samples at %.6g Sa/s, %s\n", out.c_str(), cap.samples.size(),
                cap.sample_rate, cap.phase_aligned_2sps ? "phase-aligned 2 sps" : "raw");
    std::printf("stream: %s Q=%u n=%" PRId64 " pilots=%d seed=%" PRIu64 " att=%g dB\n",
                cst.name(), cfg.q, cfg.n, cfg.pilot_count, cfg.seed, st.att);
    return 0;
}

int run_fit_cmd(SweepConfig cfg, const Staged& st, const std::string& capture_path,
                const std::string& out, const std::string& init_path) {
    auto cst = make_constellation(parse_const_kind(st.kind), cfg.q);
    auto cap = read_capture(capture_path);
    cfg.pulse.symbol_rate = cap.symbol_rate; // header wins on rate
    auto stream = make_stream(cfg, cst, st.att);
    auto [y2, sym0] = align_capture(cap, cfg, cst, stream);

    size_t P = (size_t)cfg.pilot_count;
    if (sym0 >= P) throw std::invalid_argument("sync trim consumed the pilot block");
    size_t pa = P - sym0;
    if (y2.size() < 2 * pa) pa = y2.size() / 2;
    auto pb = slice_block(stream.pilots, sym0, pa, 0x9e3779b97f4a7c15ull);

    FitConfig fc = cfg.fit;
    fc.L_target = st.L;
    fc.pilot_count = (int)pa;
    fc.seed = splitmix64(cfg.seed + 4);
    std::span<const double> y(y2.data(), 2 * pa);

    FitResult res;
    if (!init_path.empty()) {
        AuxChannelParams start = read_params(init_path);
        if (start.L() < st.L) start = embed_taps(start, st.L);
        res = fit_from(pb, y, cst, start, fc, "file: " + init_path);
    } else {
        res = fit(pb, y, cst, stream.ir, fc);
    }
    write_params(out, res.params);
    std::printf("fit: %zu pilots, start = %s\n", pa, res.init_provenance.c_str());
    std::printf("pilot air trace:");
    for (double a : res.trace) std::printf(" %.5f", a);
    std::printf("\nconverged: %s", res.converged ? "yes" : "no");
    for (const std::string& note : res.notes) std::printf(" | %s", note.c_str());
    std::printf("\n");
    std::printf("wrote %s (fit_id %s)\n", out.c_str(), params_digest(res.params).c_str());
    return 0;
}

int run_rate_cmd(SweepConfig cfg, const Staged& st, const std::string& capture_path,
                 const std::string& out) {
    ConstKind kind = parse_const_kind(st.kind);
    SweepRow row;
    if (capture_path.empty()) {
        RatePoint pt{kind, cfg.q, st.L, st.att, rate_point_seed(cfg, kind, st.L, st.att)};
        row = run_rate_point(cfg, pt);
    } else {
        auto cst = make_constellation(kind, cfg.q);
        auto cap = read_capture(capture_path);
        cfg.pulse.symbol_rate = cap.symbol_rate; // header wins on rate
        auto stream = make_stream(cfg, cst, st.att);
        auto [y2, sym0] = align_capture(cap, cfg, cst, stream);

        size_t P = (size_t)cfg.pilot_count;
        if (sym0 >= P) throw std::invalid_argument("sync trim consumed the pilot block");
        size_t pa = P - sym0;
        size_t avail = y2.size() / 2;
        if (avail < pa + 1) throw std::invalid_argument("capture too short for pilots + holdout");
        size_t ha = std::min(avail - pa, stream.hold.n());
        auto pb = slice_block(stream.pilots, sym0, pa, 0x9e3779b97f4a7c15ull);
        auto hb = slice_block(stream.hold, 0, ha, 0xd1b54a32d192ed03ull);

        FitConfig fc = cfg.fit;
        fc.L_target = st.L;
        fc.pilot_count = (int)pa;
        fc.seed = splitmix64(cfg.seed + 4);
        std::span<const double> y(y2);
        auto fitted = fit(pb, y.subspan(0, 2 * pa), cst, stream.ir, fc);

        RateOptions opt; // holdout scored at the full default quadrature
        opt.branch_budget = fc.branch_budget;
        int m = (st.L - 1) / 2;
        for (size_t i = pa >= (size_t)m ? pa - (size_t)m : 0; i < pa; ++i)
            opt.left_context.push_back(cst.points[pb.idx[i]]);
        auto cv = cross_validate(fitted, y.subspan(2 * pa, 2 * ha), hb, cst, opt);

        row.kind = kind;
        row.q = cfg.q;
        row.L = st.L;
        row.attenuation_db = st.att;
        row.launch_dbm = cfg.launch_dbm;
        row.air = cv.air;
        row.pilot_air = fitted.pilot_air;
        row.n = (std::int64_t)(pa + ha);
        row.seed = cfg.seed;
        row.fit_id = params_digest(fitted.params);
    }
    print_row_header();
    print_row(row);
    if (!out.empty()) {
        write_sweep_csv(out, {row});
        std::printf("wrote %s\n", out.c_str());
    }
    return row.failed() ? 1 : 0;
}

int run_sweep_cmd(SweepConfig cfg) {
    auto res = run_sweep(cfg);
    print_row_header();
    int bad = 0;
    for (const SweepRow& r : res.rows) {
        print_row(r);
        bad += r.failed();
    }
    std::printf("wrote %s and %s\n", res.csv_path.c_str(), res.plot_path.c_str());
    if (bad) std::printf("%d row(s) failed\n", bad);
    return bad ? 1 : 0;
}

int run_oracle(int instances, std::uint64_t seed, double tol, int max_q, int max_n, int max_l,
               bool verbose) {
    Rng rng(splitmix64(seed));
    double worst_brute = 0.0, worst_naive = 0.0;
    for (int inst = 0; inst < instances; ++inst) {
        std::vector<int> orders;
        for (int cand : {2, 4, 8, 16})
            if (cand <= max_q) orders.push_back(cand);
        if (orders.empty()) throw std::invalid_argument("--max-q below 2");
        int q = orders[rng.uniform_idx((std::uint32_t)orders.size())];
        int max_m = std::min((max_l - 1) / 2, (max_n - 1) / 2);
        int m = (int)rng.uniform_idx((std::uint32_t)(max_m + 1));
        int L = 2 * m + 1;
        int n = 2 * m + 1 + (int)rng.uniform_idx((std::uint32_t)(max_n - 2 * m));

        AuxChannelParams p;
        p.h_aux.resize((size_t)L);
        for (cplx& h : p.h_aux) h = rng.cnormal(1.0);
        p.h_aux[(size_t)m] += 1.0; // keep the window centered on a real peak
        for (int ph = 0; ph < 2; ++ph) {
            p.mu_pre[ph] = rng.cnormal(0.04);
            p.mu_post[ph] = 0.2 * rng.normal();
            p.sigma2_pre[ph] = 0.05 + 0.45 * rng.uniform01();
            p.sigma2_post[ph] = 0.05 + 0.45 * rng.uniform01();
        }

        auto cst = make_constellation(rng.uniform01() < 0.5 ? ConstKind::ASK : ConstKind::PAM,
                                      (std::uint32_t)q);
        auto blk = draw_symbols(cst, (size_t)n, rng.raw());
        auto x2 = upsample(cst, blk);
        ImpulseResponse ir;
        ir.taps = p.h_aux;
        ir.sample_rate = 2.0;
        auto f = apply_channel(x2, ir);
        std::vector<double> y(2 * (size_t)n);
        for (size_t k = 0; k < y.size(); ++k) {
            int ph = (int)(k & 1);
            cplx e = f[k] + p.mu_pre[ph] + rng.cnormal(p.sigma2_pre[ph]);
            y[k] = std::norm(e) + p.mu_post[ph] + std::sqrt(p.sigma2_post[ph]) * rng.normal();
        }

        double fwd = forward_log_marginal(y, blk.idx, cst, p);
        double brute = brute_force_log_marginal(y, blk.idx, cst, p);
        double nv = naive::forward_log_marginal(y, blk.idx, cst, p);
        worst_brute = std::max(worst_brute, std::fabs(fwd - brute));
        worst_naive = std::max(worst_naive, std::fabs(fwd - nv));
        if (verbose)
            std::printf("#%-3d %s Q=%d L=%d n=%d  fwd=%.12f  |fwd-brute|=%.3e  |fwd-naive|=%.3e\n",
                        inst, cst.name(), q, L, n, fwd, std::fabs(fwd - brute),
                        std::fabs(fwd - nv));
    }
    bool pass = worst_brute <= tol && worst_naive <= tol;
    std::printf("%d instances: max |forward-brute| = %.3e, max |forward-naive| = %.3e -> %s\n",
                instances, worst_brute, worst_naive, pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
}

// --preset must be applied before option defaults bind, so scan argv by hand
std::string scan_preset(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--preset" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--preset=", 0) == 0) return a.substr(9);
    }
    return "";
}

} // namespace

int main(int argc, char** argv) {
    SweepConfig cfg;
    std::string preset = scan_preset(argc, argv);
    try {
        if (!preset.empty()) cfg = make_preset(preset);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    CLI::App app{"oversampled direct-detection rate toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "bracketed key=value file; explicit flags override");
    std::string preset_opt; // consumed here, applied by the prescan above
    app.add_option("--preset", preset_opt, "defaults: fig3a | fig3b | fig3c");

    Staged st;
    int rc = 0;

    auto* sim = app.add_subcommand("simulate", "simulate a capture file")->configurable();
    std::string sim_out = "capture.bin";
    int sim_oversample = 0;
    double sim_delay = 0.0;
    sim->add_option("--kind", st.kind, "ASK | PAM")->capture_default_str();
    sim->add_option("--q", cfg.q, "constellation order")->capture_default_str();
    sim->add_option("--n", cfg.n, "symbols (pilots + payload)")->capture_default_str();
    sim->add_option("--pilots", cfg.pilot_count, "leading pilot symbols")->capture_default_str();
    sim->add_option("--seed", cfg.seed, "stream seed")->capture_default_str();
    sim->add_option("--att", st.att, "VOA attenuation [dB]")->capture_default_str();
    sim->add_option("--out", sim_out, "capture path")->capture_default_str();
    sim->add_option("--oversample", sim_oversample,
                    "emit raw capture at this multiple of 2 sps (0 = aligned)");
    sim->add_option("--delay", sim_delay, "planted delay in output samples");
    add_channel_flags(sim, cfg, st);

    auto* fitc = app.add_subcommand("fit", "fit aux params on a capture's pilots")->configurable();
    std::string fit_cap, fit_out = "params.txt", fit_init;
    fitc->add_option("--capture", fit_cap, "capture path")->required();
    fitc->add_option("--out", fit_out, "parameter file path")->capture_default_str();
    fitc->add_option("--init", fit_init, "warm-start parameter file (taps embed if shorter)");
    fitc->add_option("--kind", st.kind, "ASK | PAM")->capture_default_str();
    fitc->add_option("--q", cfg.q)->capture_default_str();
    fitc->add_option("--L", st.L, "aux model taps (odd)")->capture_default_str();
    fitc->add_option("--n", cfg.n, "symbols in the capture stream")->capture_default_str();
    fitc->add_option("--pilots", cfg.pilot_count)->capture_default_str();
    fitc->add_option("--seed", cfg.seed, "stream seed used at simulate time")
        ->capture_default_str();
    fitc->add_option("--att", st.att, "attenuation the capture was made with [dB]")
        ->capture_default_str();
    add_channel_flags(fitc, cfg, st);
    add_fit_flags(fitc, cfg.fit);

    auto* rate = app.add_subcommand("rate", "one rate point: simulate or score a capture")
                     ->configurable();
    std::string rate_cap, rate_out;
    rate->add_option("--capture", rate_cap, "score this capture instead of simulating");
    rate->add_option("--out", rate_out, "also write the row as CSV");
    rate->add_option("--kind", st.kind, "ASK | PAM")->capture_default_str();
    rate->add_option("--q", cfg.q)->capture_default_str();
    rate->add_option("--L", st.L)->capture_default_str();
    rate->add_option("--att", st.att, "[dB]")->capture_default_str();
    rate->add_option("--n", cfg.n)->capture_default_str();
    rate->add_option("--pilots", cfg.pilot_count)->capture_default_str();
    rate->add_option("--seed", cfg.seed)->capture_default_str();
    add_channel_flags(rate, cfg, st);
    add_fit_flags(rate, cfg.fit);

    auto* sw = app.add_subcommand("sweep", "grid sweep -> CSV + plot data")->configurable();
    sw->add_option("--kinds", st.kinds, "constellations, e.g. ASK,PAM")->delimiter(',');
    sw->add_option("--q", cfg.q)->capture_default_str();
    sw->add_option("--L", cfg.L_list, "tap counts, e.g. 3,11")->delimiter(',');
    sw->add_option("--att", cfg.attenuation_db, "attenuation grid [dB]")->delimiter(',');
    sw->add_option("--n", cfg.n)->capture_default_str();
    sw->add_option("--pilots", cfg.pilot_count)->capture_default_str();
    sw->add_option("--seed", cfg.seed)->capture_default_str();
    sw->add_option("--workers", cfg.workers, "0 = DDAIR_WORKERS env, else 1")
        ->capture_default_str();
    sw->add_option("--out", cfg.out_path, "CSV path")->capture_default_str();
    sw->add_option("--name", cfg.name, "series label for the plot file")->capture_default_str();
    add_channel_flags(sw, cfg, st);
    add_fit_flags(sw, cfg.fit);

    auto* orc = app.add_subcommand("oracle", "brute-force cross-checks on small instances")
                    ->configurable();
    int orc_n = 50, orc_maxq = 4, orc_maxn = 6, orc_maxl = 5;
    std::uint64_t orc_seed = 1;
    double orc_tol = 1e-10;
    bool orc_verbose = false;
    orc->add_option("--instances", orc_n)->capture_default_str();
    orc->add_option("--seed", orc_seed)->capture_default_str();
    orc->add_option("--tol", orc_tol)->capture_default_str();
    orc->add_option("--max-q", orc_maxq)->capture_default_str();
    orc->add_option("--max-n", orc_maxn)->capture_default_str();
    orc->add_option("--max-L", orc_maxl)->capture_default_str();
    orc->add_flag("--verbose", orc_verbose, "print one line per instance");

    // accept --preset in subcommand position as well (the prescan already
    // applied it; registering just makes the parser swallow it)
    for (CLI::App* s : {sim, fitc, rate, sw, orc})
        s->add_option("--preset", preset_opt, "defaults: fig3a | fig3b | fig3c");

    // dispatch after parsing rather than via callbacks: a config-file section
    // plus the command-line subcommand would fire a callback twice
    try {
        app.parse(argc, argv);
        st.apply(cfg);
        if (app.got_subcommand(sim)) {
            rc = run_simulate(cfg, st, sim_out, sim_oversample, sim_delay);
        } else if (app.got_subcommand(fitc)) {
            rc = run_fit_cmd(cfg, st, fit_cap, fit_out, fit_init);
        } else if (app.got_subcommand(rate)) {
            rc = run_rate_cmd(cfg, st, rate_cap, rate_out);
        } else if (app.got_subcommand(sw)) {
            rc = run_sweep_cmd(cfg);
        } else if (app.got_subcommand(orc)) {
            rc = run_oracle(orc_n, orc_seed, orc_tol, orc_maxq, orc_maxn, orc_maxl, orc_verbose);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return rc;
}
