#include "ddair/capture_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

namespace ddair {

namespace {

constexpr char kMagic[6] = {'D', 'D', 'C', 'A', 'P', '1'};
constexpr std::uint16_t kFlagComplex = 1u << 0;
constexpr std::uint16_t kFlagAligned2sps = 1u << 1;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(CaptureErrc c, const std::string& what) {
    throw CaptureIoError(c, what);
}

void check_rates(double sample_rate, double symbol_rate) {
    if (!(sample_rate > 0) || !(symbol_rate > 0) || sample_rate < 2.0 * symbol_rate)
        fail(CaptureErrc::rate_inconsistent, "sample_rate must be positive and >= 2 * symbol_rate");
}

} // namespace

// header and payload are raw little-endian IEEE-754; this targets the
// little-endian hosts the artifact runs on
void write_capture(const std::string& path, const Capture& cap) {
    check_rates(cap.sample_rate, cap.symbol_rate);
    if (cap.complex_field && cap.samples.size() % 2 != 0)
        fail(CaptureErrc::count_mismatch, "interleaved complex payload has odd length");

    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) fail(CaptureErrc::io, "cannot open for write: " + path);

    std::uint16_t flags = (cap.complex_field ? kFlagComplex : 0) |
                          (cap.phase_aligned_2sps ? kFlagAligned2sps : 0);
    std::uint64_t count = cap.sample_count();
    unsigned char head[32];
    std::memcpy(head, kMagic, 6);
    std::memcpy(head + 6, &flags, 2);
    std::memcpy(head + 8, &cap.sample_rate, 8);
    std::memcpy(head + 16, &cap.symbol_rate, 8);
    std::memcpy(head + 24, &count, 8);
    if (std::fwrite(head, 1, sizeof head, f.get()) != sizeof head)
        fail(CaptureErrc::io, "short header write: " + path);
    size_t n = cap.samples.size();
    if (n && std::fwrite(cap.samples.data(), sizeof(double), n, f.get()) != n)
        fail(CaptureErrc::io, "short payload write: " + path);
}

Capture read_capture(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail(CaptureErrc::io, "cannot open: " + path);

    unsigned char head[32];
    if (std::fread(head, 1, sizeof head, f.get()) != sizeof head)
        fail(CaptureErrc::truncated_header, "header shorter than 32 bytes: " + path);
    if (std::memcmp(head, kMagic, 6) != 0)
        fail(CaptureErrc::bad_magic, "not a DDCAP1 file: " + path);

    Capture cap;
    std::uint16_t flags;
    std::uint64_t count;
    std::memcpy(&flags, head + 6, 2);
    std::memcpy(&cap.sample_rate, head + 8, 8);
    std::memcpy(&cap.symbol_rate, head + 16, 8);
    std::memcpy(&count, head + 24, 8);
    cap.complex_field = flags & kFlagComplex;
    cap.phase_aligned_2sps = flags & kFlagAligned2sps;
    check_rates(cap.sample_rate, cap.symbol_rate);

    std::uint64_t doubles = count * (cap.complex_field ? 2 : 1);
    if (doubles > (1ull << 32))
        fail(CaptureErrc::count_mismatch, "implausible sample_count in header");
    cap.samples.resize(doubles);
    size_t got = doubles ? std::fread(cap.samples.data(), sizeof(double), doubles, f.get()) : 0;
    if (got != doubles)
        fail(CaptureErrc::truncated_payload, "payload shorter than header sample_count: " + path);
    unsigned char extra;
    if (std::fread(&extra, 1, 1, f.get()) == 1)
        fail(CaptureErrc::count_mismatch, "payload longer than header sample_count: " + path);
    return cap;
}

void write_params(const std::string& path, const AuxChannelParams& params) {
    params.validate();
    std::ofstream out(path);
    if (!out) fail(CaptureErrc::io, "cannot open for write: " + path);
    char buf[96];
    out << "# auxiliary model parameters; taps are re,im at T/2 spacing\n";
    out << "taps = " << params.L() << "\n";
    for (int k = 0; k < params.L(); ++k) {
        std::snprintf(buf, sizeof buf, "h%d = %.17g,%.17g", k, params.h_aux[k].real(),
                      params.h_aux[k].imag());
        out << buf << "\n";
    }
    for (int ph = 0; ph < 2; ++ph) {
        std::snprintf(buf, sizeof buf, "mu_pre%d = %.17g,%.17g", ph,
                      params.mu_pre[ph].real(), params.mu_pre[ph].imag());
        out << buf << "\n";
        std::snprintf(buf, sizeof buf, "mu_post%d = %.17g", ph, params.mu_post[ph]);
        out << buf << "\n";
        std::snprintf(buf, sizeof buf, "sigma2_pre%d = %.17g", ph, params.sigma2_pre[ph]);
        out << buf << "\n";
        std::snprintf(buf, sizeof buf, "sigma2_post%d = %.17g", ph, params.sigma2_post[ph]);
        out << buf << "\n";
    }
    if (!out.flush()) fail(CaptureErrc::io, "short write: " + path);
}

namespace {

cplx parse_cplx(const std::string& v) {
    size_t comma = v.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("expected re,im pair: " + v);
    return {std::stod(v.substr(0, comma)), std::stod(v.substr(comma + 1))};
}

} // namespace

AuxChannelParams read_params(const std::string& path) {
    auto kv = parse_kv_file(path);
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = kv.find(k);
        if (it == kv.end()) throw std::invalid_argument("parameter file misses key: " + k);
        return it->second;
    };
    AuxChannelParams p;
    int L = std::stoi(need("taps"));
    if (L < 1 || L % 2 == 0) throw std::invalid_argument("taps must be odd and positive");
    p.h_aux.resize(L);
    for (int k = 0; k < L; ++k) p.h_aux[k] = parse_cplx(need("h" + std::to_string(k)));
    for (int ph = 0; ph < 2; ++ph) {
        std::string s = std::to_string(ph);
        p.mu_pre[ph] = parse_cplx(need("mu_pre" + s));
        p.mu_post[ph] = std::stod(need("mu_post" + s));
        p.sigma2_pre[ph] = std::stod(need("sigma2_pre" + s));
        p.sigma2_post[ph] = std::stod(need("sigma2_post" + s));
    }
    p.validate();
    return p;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(CaptureErrc::io, "cannot open: " + path);
    std::map<std::string, std::string> kv;
    std::string line, section;
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r");
        size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument("unterminated section header at line " +
                                            std::to_string(lineno));
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("expected key = value at line " + std::to_string(lineno));
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("empty key at line " + std::to_string(lineno));
        if (!section.empty()) key = section + "." + key;
        kv[key] = val;
    }
    return kv;
}

} // namespace ddair
