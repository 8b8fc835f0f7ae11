#include "doctest.h"
#include "ddair/constellation.hpp"
#include <cmath>
#include <set>

using namespace ddair;

TEST_CASE("constellation levels") {
    auto pam = make_constellation(ConstKind::PAM, 4);
    CHECK(pam.points == std::vector<double>{0, 1, 2, 3});
    auto ask = make_constellation(ConstKind::ASK, 4);
    CHECK(ask.points == std::vector<double>{-3, -1, 1, 3});
    auto ask8 = make_constellation(ConstKind::ASK, 8);
    CHECK(ask8.points == std::vector<double>{-7, -5, -3, -1, 1, 3, 5, 7});
    CHECK(pam.mean_power() == doctest::Approx(3.5));
    CHECK(ask.mean_power() == doctest::Approx(5.0));
    CHECK_THROWS(make_constellation(ConstKind::ASK, 3));
    CHECK_THROWS(make_constellation(ConstKind::PAM, 32));
}

TEST_CASE("gray labels differ in one bit between adjacent levels") {
    for (uint32_t q : {2u, 4u, 8u, 16u}) {
        auto c = make_constellation(ConstKind::ASK, q);
        for (uint32_t k = 0; k + 1 < q; ++k) {
            uint32_t d = c.gray_label(k) ^ c.gray_label(k + 1);
            CHECK((d & (d - 1)) == 0);
            CHECK(d != 0);
        }
    }
}

TEST_CASE("precoder worked example: signs (+,-,-,+) -> (+,-,+,+)") {
    auto c = make_constellation(ConstKind::ASK, 4);
    SymbolBlock b;
    b.idx = {c.index_of(1), c.index_of(-3), c.index_of(-1), c.index_of(3)};
    auto p = differential_precode(c, b);
    CHECK(c.points[p.idx[0]] == 1);
    CHECK(c.points[p.idx[1]] == -3);
    CHECK(c.points[p.idx[2]] == 1);
    CHECK(c.points[p.idx[3]] == 3);
    CHECK(p.source == BlockSource::precoded);
}

TEST_CASE("precode/decode round trip preserves data and magnitudes") {
    for (uint32_t q : {2u, 4u, 8u}) {
        auto c = make_constellation(ConstKind::ASK, q);
        auto b = draw_symbols(c, 500, 123 + q);
        auto p = differential_precode(c, b);
        for (size_t i = 0; i < b.n(); ++i)
            CHECK(std::fabs(c.points[p.idx[i]]) == std::fabs(c.points[b.idx[i]]));
        auto d = differential_decode(c, p);
        CHECK(d.idx == b.idx);
    }
    // PAM passes through
    auto c = make_constellation(ConstKind::PAM, 4);
    auto b = draw_symbols(c, 100, 5);
    auto p = differential_precode(c, b);
    CHECK(p.idx == b.idx);
    CHECK(p.source == BlockSource::precoded);
}

TEST_CASE("draw_symbols is deterministic, uniform-ish, and id-stamped") {
    auto c = make_constellation(ConstKind::PAM, 4);
    auto a = draw_symbols(c, 40000, 99);
    auto b = draw_symbols(c, 40000, 99);
    CHECK(a.idx == b.idx);
    CHECK(a.id == b.id);
    auto d = draw_symbols(c, 40000, 100);
    CHECK(a.idx != d.idx);
    CHECK(a.id != d.id);
    int counts[4] = {0};
    for (auto k : a.idx) counts[k]++;
    for (int k = 0; k < 4; ++k) CHECK(std::fabs(counts[k] - 10000.0) < 500.0);
}

TEST_CASE("upsample interleaves zeros at odd positions") {
    auto c = make_constellation(ConstKind::ASK, 4);
    SymbolBlock b;
    b.idx = {0, 3, 2};
    auto x = upsample(c, b);
    CHECK(x == std::vector<double>{-3, 0, 3, 0, 1, 0});
}
