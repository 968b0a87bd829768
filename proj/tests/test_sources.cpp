#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsc/sources.hpp"
#include "dsc/stats.hpp"

using namespace dsc;

namespace {

CovarianceMatrix cov2(double a, double b, double c, double d) {
    return CovarianceMatrix(2, {a, b, c, d});
}

}  // namespace

TEST_CASE("covariance matrix validation") {
    CHECK_THROWS_AS(CovarianceMatrix(2, {1.0, 0.5, 0.2, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(CovarianceMatrix(2, {1.0, 0.5, 0.5}), std::invalid_argument);
    CHECK_NOTHROW(cov2(1.0, 0.9, 0.9, 1.0));
}

TEST_CASE("covariance factor reconstructs K") {
    SUBCASE("identity") {
        const auto S = covariance_factor(CovarianceMatrix::identity(3));
        for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 3; ++v)
                CHECK(std::fabs(S[static_cast<std::size_t>(u) * 3 + v] - (u == v ? 1.0 : 0.0)) <= 1e-12);
    }
    SUBCASE("correlated") {
        const auto K = cov2(1.0, 0.9, 0.9, 1.0);
        const auto S = covariance_factor(K);
        for (int u = 0; u < 2; ++u)
            for (int v = 0; v < 2; ++v) {
                double acc = 0.0;
                for (int l = 0; l < 2; ++l)
                    acc += S[static_cast<std::size_t>(u) * 2 + l] * S[static_cast<std::size_t>(v) * 2 + l];
                CHECK(std::fabs(acc - K.at(u, v)) <= 1e-10);
            }
    }
    SUBCASE("rank deficient") {
        const auto K = cov2(1.0, 1.0, 1.0, 1.0);
        const auto S = covariance_factor(K);
        for (int u = 0; u < 2; ++u)
            for (int v = 0; v < 2; ++v) {
                double acc = 0.0;
                for (int l = 0; l < 2; ++l)
                    acc += S[static_cast<std::size_t>(u) * 2 + l] * S[static_cast<std::size_t>(v) * 2 + l];
                CHECK(std::fabs(acc - K.at(u, v)) <= 1e-10);
            }
    }
    SUBCASE("indefinite rejected") {
        CHECK_THROWS_AS(covariance_factor(cov2(1.0, 2.0, 2.0, 1.0)), std::invalid_argument);
    }
}

TEST_CASE("sampling is deterministic") {
    SourceSpec spec{Family::laplace, cov2(1.0, 0.5, 0.5, 1.0), 123};
    const auto a = sample_iid(spec, 500);
    const auto b = sample_iid(spec, 500);
    CHECK(a.data == b.data);
    spec.seed = 124;
    const auto c = sample_iid(spec, 500);
    CHECK(a.data != c.data);
}

TEST_CASE("rademacher hits the exact support") {
    SourceSpec spec{Family::rademacher, CovarianceMatrix::scaled_identity(1, 4.0), 9};
    const auto block = sample_iid(spec, 20000);
    std::int64_t pos = 0;
    for (double v : block.row(0)) {
        CHECK((std::fabs(v - 2.0) <= 1e-15 || std::fabs(v + 2.0) <= 1e-15));
        if (v > 0) ++pos;
    }
    // equal frequency within 4 sigma of binomial noise
    CHECK(std::fabs(pos / 20000.0 - 0.5) < 4.0 * 0.5 / std::sqrt(20000.0));
}

TEST_CASE("uniform support and variance") {
    SourceSpec spec{Family::uniform, CovarianceMatrix::identity(1), 2};
    const auto block = sample_iid(spec, 100000);
    double var = 0.0;
    for (double v : block.row(0)) {
        CHECK(std::fabs(v) <= std::sqrt(3.0) + 1e-12);
        var += v * v;
    }
    var /= 100000.0;
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("two-point family has the configured skew structure") {
    SourceSpec spec{Family::two_point, CovarianceMatrix::identity(1), 5, 0.9};
    const auto block = sample_iid(spec, 100000);
    double mean = 0.0, var = 0.0;
    const double a = std::sqrt(0.1 / 0.9), c = -std::sqrt(0.9 / 0.1);
    for (double v : block.row(0)) {
        CHECK((std::fabs(v - a) <= 1e-12 || std::fabs(v - c) <= 1e-12));
        mean += v;
        var += v * v;
    }
    mean /= 100000.0;
    var /= 100000.0;
    CHECK(std::fabs(mean) <= 3.0 / std::sqrt(100000.0));
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("empirical covariance basics") {
    SUBCASE("constant zero block") {
        SourceBlock z;
        z.k = 2;
        z.L = 4;
        z.data.assign(8, 0.0);
        const auto C = empirical_covariance(z);
        for (int u = 0; u < 2; ++u)
            for (int v = 0; v < 2; ++v) CHECK(C.at(u, v) == 0.0);
    }
    SUBCASE("identity columns") {
        SourceBlock e;
        e.k = 3;
        e.L = 3;
        e.data.assign(9, 0.0);
        for (int i = 0; i < 3; ++i) e.data[static_cast<std::size_t>(i) * 3 + i] = 1.0;
        const auto C = empirical_covariance(e);
        for (int u = 0; u < 3; ++u)
            for (int v = 0; v < 3; ++v)
                CHECK(C.at(u, v) == doctest::Approx(u == v ? 1.0 / 3.0 : 0.0).scale(1.0).epsilon(1e-15));
    }
    SUBCASE("L too small") {
        SourceBlock one;
        one.k = 1;
        one.L = 1;
        one.data = {1.0};
        CHECK_THROWS_AS(empirical_covariance(one), std::invalid_argument);
    }
}

TEST_CASE("every family realizes the covariance within Monte Carlo error") {
    const auto K = cov2(1.0, 0.5, 0.5, 1.0);
    const std::int64_t L = 100000;
    for (Family fam : all_families()) {
        SourceSpec spec{fam, K, 77};
        const auto block = sample_iid(spec, L);
        const auto C = empirical_covariance(block);
        for (int u = 0; u < 2; ++u) {
            // component means
            double mean = 0.0;
            for (double v : block.row(u)) mean += v;
            mean /= static_cast<double>(L);
            CHECK(std::fabs(mean) <= 3.0 / std::sqrt(static_cast<double>(L)));
            for (int v = 0; v < 2; ++v) {
                // stderr of the (u,v) product moment
                double s2 = 0.0;
                for (std::int64_t i = 0; i < L; ++i) {
                    const double p = block.at(u, i) * block.at(v, i) - C.at(u, v);
                    s2 += p * p;
                }
                const double se = std::sqrt(s2 / (L - 1.0) / L);
                CHECK(std::fabs(C.at(u, v) - K.at(u, v)) <= 3.0 * se);
            }
        }
    }
}

TEST_CASE("gaussian projections are exactly normal") {
    const auto K = cov2(1.0, 0.5, 0.5, 1.0);
    SourceSpec spec{Family::gaussian, K, 31};
    const auto block = sample_iid(spec, 100000);
    for (const auto& t : {std::vector<double>{1.0, 0.0}, std::vector<double>{1.0, -1.0},
                          std::vector<double>{0.3, 0.7}}) {
        const auto proj = cramer_wold_projection(block, t, K);
        CHECK(ks_distance_to_normal(proj) < ks_critical_value(0.01, proj.values.size()));
    }
}

TEST_CASE("marginal support bounds") {
    SourceSpec spec{Family::rademacher, cov2(1.0, 0.8, 0.8, 1.0), 0};
    const auto S = covariance_factor(spec.K);
    const double expect = std::fabs(S[0]) + std::fabs(S[1]);
    CHECK(marginal_support_bound(spec, 0) == doctest::Approx(expect));
    spec.family = Family::gaussian;
    CHECK(std::isinf(marginal_support_bound(spec, 0)));

    // box half-widths keep the stated tail mass
    spec.family = Family::gaussian;
    const double half = marginal_box_halfwidth(spec, 0, 1e-4);
    CHECK(2.0 * (1.0 - normal_cdf(half)) <= 1e-4 * 1.0001);
    spec.family = Family::uniform;
    CHECK(marginal_box_halfwidth(spec, 0, 0.5) >= marginal_support_bound(spec, 0));
}

TEST_CASE("unknown family name rejected") {
    CHECK_THROWS_AS(family_from_string("cauchy"), std::invalid_argument);
    CHECK(family_from_string("two-point-mixture") == Family::two_point);
    CHECK(family_name(Family::laplace) == "laplace");
}
