#include "ddair/constellation.hpp"
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace ddair {

double Constellation::mean_power() const {
    double s = 0.0;
    for (double p : points) s += p * p;
    return s / points.size();
}

uint32_t Constellation::gray_label(uint32_t idx) const {
    return idx ^ (idx >> 1);
}

uint32_t Constellation::index_of(double value) const {
    for (uint32_t k = 0; k < points.size(); ++k)
        if (points[k] == value) return k;
    throw std::invalid_argument("index_of: value is not a constellation level");
}

Constellation make_constellation(ConstKind kind, uint32_t q) {
    if (q != 2 && q != 4 && q != 8 && q != 16)
        throw std::invalid_argument("constellation order must be one of {2,4,8,16}");
    Constellation c{kind, q, {}};
    c.points.reserve(q);
    if (kind == ConstKind::PAM) {
        for (uint32_t k = 0; k < q; ++k) c.points.push_back(double(k));
    } else {
        for (int32_t v = -int32_t(q) + 1; v <= int32_t(q) - 1; v += 2)
            c.points.push_back(double(v));
    }
    return c;
}

ConstKind parse_const_kind(const std::string& s) {
    if (s == "ASK" || s == "ask") return ConstKind::ASK;
    if (s == "PAM" || s == "pam") return ConstKind::PAM;
    throw std::invalid_argument("unknown constellation kind: " + s);
}

static uint64_t block_id(const Constellation& c, size_t n, uint64_t seed, BlockSource src) {
    char buf[64];
    int len = std::snprintf(buf, sizeof buf, "%d|%u|%zu|%llu|%d", int(c.kind), c.q, n,
                            (unsigned long long)seed, int(src));
    return fnv1a64({buf, size_t(len)});
}

SymbolBlock draw_symbols(const Constellation& c, size_t n, uint64_t seed) {
    SymbolBlock b;
    b.idx.resize(n);
    b.seed = seed;
    b.source = BlockSource::raw;
    Rng rng(seed);
    for (size_t i = 0; i < n; ++i) b.idx[i] = rng.uniform_idx(c.q);
    b.id = block_id(c, n, seed, b.source);
    return b;
}

SymbolBlock differential_precode(const Constellation& c, const SymbolBlock& in) {
    SymbolBlock out = in;
    out.source = BlockSource::precoded;
    if (c.kind == ConstKind::ASK) {
        double prev_sign = 1.0; // s_0 = +1 reference before the block
        for (size_t i = 0; i < in.idx.size(); ++i) {
            double x = c.points[in.idx[i]];
            double s = prev_sign * (x < 0 ? -1.0 : 1.0);
            out.idx[i] = c.index_of(s * std::fabs(x));
            prev_sign = s;
        }
    }
    out.id = block_id(c, in.idx.size(), in.seed, out.source);
    return out;
}

SymbolBlock differential_decode(const Constellation& c, const SymbolBlock& in) {
    SymbolBlock out = in;
    out.source = BlockSource::raw;
    if (c.kind == ConstKind::ASK) {
        double prev_sign = 1.0;
        for (size_t i = 0; i < in.idx.size(); ++i) {
            double s = c.points[in.idx[i]];
            double cur_sign = s < 0 ? -1.0 : 1.0;
            out.idx[i] = c.index_of(prev_sign * cur_sign * std::fabs(s));
            prev_sign = cur_sign;
        }
    }
    out.id = block_id(c, in.idx.size(), in.seed, out.source);
    return out;
}

std::vector<double> upsample(const Constellation& c, const SymbolBlock& b) {
    std::vector<double> x(2 * b.idx.size(), 0.0);
    for (size_t i = 0; i < b.idx.size(); ++i) x[2 * i] = c.points[b.idx[i]];
    return x;
}

} // namespace ddair
