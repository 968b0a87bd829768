#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsc/mixing.hpp"
#include "dsc/rng.hpp"

using namespace dsc;

namespace {

double max_gram_deviation(const MixingMatrix& Q) {
    const int b = Q.size();
    double dev = 0.0;
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
            double dot = 0.0;
            for (int l = 0; l < b; ++l) dot += Q.entry(i, l) * Q.entry(j, l);
            dev = std::max(dev, std::fabs(dot - (i == j ? 1.0 : 0.0)));
        }
    return dev;
}

std::vector<double> random_vector(int len, std::uint64_t stream) {
    SubstreamRng rng(42, stream);
    std::vector<double> v(len);
    for (int i = 0; i < len; ++i) v[i] = rng.normal(static_cast<std::uint64_t>(i));
    return v;
}

}  // namespace

TEST_CASE("mixing matrix rejects invalid sizes") {
    CHECK_THROWS_AS(MixingMatrix::build(3), std::invalid_argument);
    CHECK_THROWS_AS(MixingMatrix::build(1), std::invalid_argument);
    CHECK_THROWS_AS(MixingMatrix::build(0), std::invalid_argument);
    CHECK_THROWS_AS(MixingMatrix::build(-4), std::invalid_argument);
    CHECK_THROWS_AS(MixingMatrix::build(8192), std::invalid_argument);
}

TEST_CASE("b=2 matrix is the exact hand value") {
    const MixingMatrix Q = MixingMatrix::build(2);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(Q.entry(0, 0) == doctest::Approx(r).epsilon(1e-12));
    CHECK(Q.entry(0, 1) == doctest::Approx(r).epsilon(1e-12));
    CHECK(Q.entry(1, 0) == doctest::Approx(r).epsilon(1e-12));
    CHECK(Q.entry(1, 1) == doctest::Approx(-r).epsilon(1e-12));
}

TEST_CASE("b=4 matrix matches the closed form row by row") {
    const MixingMatrix Q = MixingMatrix::build(4);
    const double r = 1.0 / std::sqrt(2.0);
    const double expect[4][4] = {{0.5, 0.5, 0.5, 0.5},
                                 {r, 0.0, -r, 0.0},
                                 {0.5, -0.5, 0.5, -0.5},
                                 {0.0, r, 0.0, -r}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::fabs(Q.entry(i, j) - expect[i][j]) <= 1e-12);
}

TEST_CASE("unitarity across sizes") {
    for (int b : {2, 4, 8, 64, 256}) {
        const MixingMatrix Q = MixingMatrix::build(b);
        CHECK(max_gram_deviation(Q) <= 1e-10);
    }
}

TEST_CASE("every row but the first sums to zero") {
    for (int b : {4, 16, 64}) {
        const MixingMatrix Q = MixingMatrix::build(b);
        for (int i = 1; i < b; ++i) {
            double s = 0.0;
            for (int j = 0; j < b; ++j) s += Q.entry(i, j);
            CHECK(std::fabs(s) <= 1e-10);
        }
    }
}

TEST_CASE("norm preservation on random vectors") {
    for (int b : {2, 8, 64}) {
        const MixingMatrix Q = MixingMatrix::build(b);
        for (int rep = 0; rep < 200; ++rep) {
            const auto x = random_vector(b, static_cast<std::uint64_t>(b * 1000 + rep));
            const auto y = Q.apply(x);
            double nx = 0.0, ny = 0.0;
            for (int j = 0; j < b; ++j) {
                nx += x[j] * x[j];
                ny += y[j] * y[j];
            }
            CHECK(std::fabs(std::sqrt(ny) - std::sqrt(nx)) / std::sqrt(nx) <= 1e-9);
        }
    }
}

TEST_CASE("apply examples") {
    const MixingMatrix Q2 = MixingMatrix::build(2);
    const std::vector<double> ones = {1.0, 1.0};
    const auto y = Q2.apply(ones);
    CHECK(y[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    const std::vector<double> zero = {0.0, 0.0};
    const auto z = Q2.apply(zero);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);

    // first column of the b=4 matrix
    const MixingMatrix Q4 = MixingMatrix::build(4);
    const std::vector<double> e1 = {1.0, 0.0, 0.0, 0.0};
    const auto c = Q4.apply(e1);
    CHECK(c[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(c[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c[3] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(Q4.apply(ones), std::invalid_argument);
}

TEST_CASE("inverse mixing round trip") {
    const MixingMatrix Q = MixingMatrix::build(8);
    const auto x = random_vector(8, 7);
    const auto y = Q.apply(x);
    const auto back = Q.apply_inverse(y);
    for (int j = 0; j < 8; ++j) CHECK(std::fabs(back[j] - x[j]) <= 1e-12);

    const MixingMatrix Q2 = MixingMatrix::build(2);
    const std::vector<double> v = {std::sqrt(2.0), 0.0};
    const auto inv = Q2.apply_inverse(v);
    CHECK(inv[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(inv[1] == doctest::Approx(1.0).epsilon(1e-12));

    const MixingMatrix Q4 = MixingMatrix::build(4);
    const std::vector<double> col = {0.5, 1.0 / std::sqrt(2.0), 0.5, 0.0};
    const auto e1 = Q4.apply_inverse(col);
    CHECK(e1[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int j = 1; j < 4; ++j) CHECK(std::fabs(e1[j]) <= 1e-12);
}

TEST_CASE("interleave patterns and round trip") {
    {
        const std::vector<double> s = {10, 11, 12, 13};
        const auto blocks = interleave(s, 2, 2);
        CHECK(blocks.vectors[0] == std::vector<double>{10, 12});
        CHECK(blocks.vectors[1] == std::vector<double>{11, 13});
        CHECK(deinterleave(blocks) == s);
    }
    {
        std::vector<double> s(12);
        for (int i = 0; i < 12; ++i) s[static_cast<std::size_t>(i)] = i;
        const auto blocks = interleave(s, 3, 4);
        CHECK(blocks.vectors[0] == std::vector<double>{0, 4, 8});
        CHECK(blocks.vectors[1] == std::vector<double>{1, 5, 9});
        CHECK(blocks.vectors[2] == std::vector<double>{2, 6, 10});
        CHECK(blocks.vectors[3] == std::vector<double>{3, 7, 11});
    }
    {
        // degenerate n=1: each vector is a singleton
        const std::vector<double> s = {5, 6, 7, 8};
        const auto blocks = interleave(s, 1, 4);
        for (int l = 0; l < 4; ++l) CHECK(blocks.vectors[l] == std::vector<double>{s[l]});
        CHECK(deinterleave(blocks) == s);
    }
    {
        // exact round trip on a random stream, n=5, b=8
        const auto s = random_vector(40, 99);
        CHECK(deinterleave(interleave(s, 5, 8)) == s);
    }
    CHECK_THROWS_AS(interleave(std::vector<double>(5), 2, 2), std::invalid_argument);
}

TEST_CASE("mixed-radix packing") {
    {
        const std::vector<std::uint64_t> idx = {0, 0, 0};
        const std::vector<std::uint64_t> rad = {7, 5, 3};
        const auto p = PackedIndex::pack(idx, rad);
        CHECK(p.limbs().empty());
        CHECK(p.to_decimal() == "0");
        CHECK(p.unpack() == idx);
    }
    {
        const std::vector<std::uint64_t> idx = {1, 2};
        const std::vector<std::uint64_t> rad = {4, 4};
        const auto p = PackedIndex::pack(idx, rad);
        CHECK(p.limbs().size() == 1);
        CHECK(p.limbs()[0] == 6);
        CHECK(p.unpack() == idx);
    }
    {
        // round trip on random digits, mixed radices
        SubstreamRng rng(3, 0);
        const std::vector<std::uint64_t> rad = {3, 5, 7};
        for (int rep = 0; rep < 50; ++rep) {
            std::vector<std::uint64_t> idx(3);
            for (int j = 0; j < 3; ++j)
                idx[static_cast<std::size_t>(j)] =
                    rng.block(static_cast<std::uint64_t>(rep * 3 + j))[0] % rad[static_cast<std::size_t>(j)];
            CHECK(PackedIndex::pack(idx, rad).unpack() == idx);
        }
    }
    {
        // 256 binary digits: the value needs 8 limbs
        std::vector<std::uint64_t> idx(256), rad(256, 2);
        SubstreamRng rng(11, 1);
        for (int j = 0; j < 256; ++j) idx[static_cast<std::size_t>(j)] = rng.block(j)[1] & 1;
        const auto p = PackedIndex::pack(idx, rad);
        CHECK(p.unpack() == idx);
        CHECK(p.limbs().size() <= 8);
    }
    {
        // decimal rendering: digits in base 10 read back verbatim
        const std::vector<std::uint64_t> idx = {1, 2, 3};
        const std::vector<std::uint64_t> rad = {10, 10, 10};
        CHECK(PackedIndex::pack(idx, rad).to_decimal() == "123");
    }
    {
        // large radices force multi-limb carries
        const std::uint64_t big = std::uint64_t{1} << 62;
        const std::vector<std::uint64_t> idx = {big - 1, big - 2, big - 3};
        const std::vector<std::uint64_t> rad = {big, big, big};
        const auto p = PackedIndex::pack(idx, rad);
        CHECK(p.unpack() == idx);
        CHECK(p.limbs().size() == 6);  // ~2^186
    }
    {
        const std::vector<std::uint64_t> idx = {4};
        const std::vector<std::uint64_t> rad = {4};
        CHECK_THROWS_AS(PackedIndex::pack(idx, rad), std::invalid_argument);
    }
}

TEST_CASE("large mixing lengths stay orthonormal") {
    const MixingMatrix Q = MixingMatrix::build(1024);
    const auto x = random_vector(1024, 123);
    const auto y = Q.apply(x);
    double nx = 0.0, ny = 0.0;
    for (int j = 0; j < 1024; ++j) {
        nx += x[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        ny += y[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(j)];
    }
    CHECK(std::fabs(std::sqrt(ny) - std::sqrt(nx)) / std::sqrt(nx) <= 1e-9);
    const auto back = Q.apply_inverse(y);
    for (int j = 0; j < 1024; ++j)
        CHECK(std::fabs(back[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)]) <= 1e-11);
}

TEST_CASE("philox reference vectors") {
    // known-answer tests for philox4x32-10
    auto r0 = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(r0[0] == 0x6627e8d5u);
    CHECK(r0[1] == 0xe169c58du);
    CHECK(r0[2] == 0xbc57ac4cu);
    CHECK(r0[3] == 0x9b00dbd8u);
    auto r1 = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                         {0xffffffffu, 0xffffffffu});
    CHECK(r1[0] == 0x408f276du);
    CHECK(r1[1] == 0x41c83b0eu);
    CHECK(r1[2] == 0xa20bc7c6u);
    CHECK(r1[3] == 0x6d5451fdu);
    auto r2 = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                         {0xa4093822u, 0x299f31d0u});
    CHECK(r2[0] == 0xd16cfe09u);
    CHECK(r2[1] == 0x94fdccebu);
    CHECK(r2[2] == 0x5001e420u);
    CHECK(r2[3] == 0x24126ea1u);
}
