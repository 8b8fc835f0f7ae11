#pragma once
#include <cstdint>
#include <string>
#include <vector>
#include "ddair/mathutil.hpp"

namespace ddair {

enum class ConstKind { ASK, PAM };

// ASK: odd bipolar levels {-(Q-1), ..., -1, +1, ..., Q-1}
// PAM: unipolar levels {0, 1, ..., Q-1}
struct Constellation {
    ConstKind kind;
    uint32_t q;
    std::vector<double> points; // ascending

    double mean_power() const;
    uint32_t gray_label(uint32_t idx) const; // binary-reflected
    uint32_t index_of(double value) const;   // exact level lookup
    const char* name() const { return kind == ConstKind::ASK ? "ASK" : "PAM"; }
};

Constellation make_constellation(ConstKind kind, uint32_t q);
ConstKind parse_const_kind(const std::string& s);

enum class BlockSource { raw, precoded };

struct SymbolBlock {
    std::vector<uint32_t> idx;
    uint64_t seed = 0;
    BlockSource source = BlockSource::raw;
    uint64_t id = 0;

    size_t n() const { return idx.size(); }
};

SymbolBlock draw_symbols(const Constellation& c, size_t n, uint64_t seed);

// sign(s_i) = sign(s_{i-1}) * sign(x_i), s_0 = +1, |s_i| = |x_i|.
// PAM passes through unchanged (marked precoded).
SymbolBlock differential_precode(const Constellation& c, const SymbolBlock& in);
SymbolBlock differential_decode(const Constellation& c, const SymbolBlock& in);

// 2 samples/symbol: [x_0, 0, x_1, 0, ...]
std::vector<double> upsample(const Constellation& c, const SymbolBlock& b);

} // namespace ddair
