#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "dsc/codecs.hpp"
#include "dsc/sources.hpp"

using namespace dsc;

namespace {

// Independent Lloyd-Max oracle using exact Gaussian cell moments via erf
// (the implementation integrates a density grid instead). Unit variance.
struct ErfLloyd {
    std::vector<double> levels;
    double mse;
};

ErfLloyd erf_lloyd_oracle(int rate) {
    auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
    auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    const int L = 1 << rate;
    std::vector<double> lv(L);
    for (int i = 0; i < L; ++i) lv[static_cast<std::size_t>(i)] = -2.0 + 4.0 * (i + 0.5) / L;
    for (int it = 0; it < 20000; ++it) {
        double move = 0.0;
        for (int i = 0; i < L; ++i) {
            const double a = i == 0 ? -40.0 : 0.5 * (lv[i - 1] + lv[i]);
            const double b = i == L - 1 ? 40.0 : 0.5 * (lv[i] + lv[i + 1]);
            const double centroid = (phi(a) - phi(b)) / (Phi(b) - Phi(a));
            move = std::max(move, std::fabs(centroid - lv[static_cast<std::size_t>(i)]));
            lv[static_cast<std::size_t>(i)] = centroid;
        }
        if (move < 1e-14) break;
    }
    double mse = 1.0;
    for (int i = 0; i < L; ++i) {
        const double a = i == 0 ? -40.0 : 0.5 * (lv[i - 1] + lv[i]);
        const double b = i == L - 1 ? 40.0 : 0.5 * (lv[i] + lv[i + 1]);
        const double m0 = Phi(b) - Phi(a);
        const double m1 = phi(a) - phi(b);
        mse += -2.0 * lv[static_cast<std::size_t>(i)] * m1 +
               lv[static_cast<std::size_t>(i)] * lv[static_cast<std::size_t>(i)] * m0;
    }
    return {lv, mse};
}

SourceSpec unit_spec(Family f, std::uint64_t seed) {
    return SourceSpec{f, CovarianceMatrix::identity(1), seed};
}

}  // namespace

TEST_CASE("one-bit Lloyd-Max matches the closed form") {
    const ScalarCodebook cb = lloyd_max_train(1.0, 1);
    const double level = std::sqrt(2.0 / std::numbers::pi);  // 0.7978845608...
    REQUIRE(cb.levels.size() == 2);
    CHECK(cb.levels[1] == doctest::Approx(level).epsilon(1e-6));
    CHECK(cb.levels[0] == doctest::Approx(-level).epsilon(1e-6));
    CHECK(cb.thresholds[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(cb.train_mse == doctest::Approx(1.0 - 2.0 / std::numbers::pi).epsilon(1e-5));
}

TEST_CASE("codebooks scale with the standard deviation") {
    const ScalarCodebook unit = lloyd_max_train(1.0, 1);
    const ScalarCodebook wide = lloyd_max_train(4.0, 1);
    CHECK(wide.levels[1] == doctest::Approx(2.0 * unit.levels[1]).epsilon(1e-9));
    CHECK(wide.train_mse == doctest::Approx(4.0 * unit.train_mse).epsilon(1e-9));
}

TEST_CASE("two-bit Lloyd-Max agrees with the erf oracle") {
    const ErfLloyd oracle = erf_lloyd_oracle(2);
    // frozen from the oracle: levels +-0.4528, +-1.5104, MSE 0.117482
    CHECK(oracle.mse == doctest::Approx(0.1174818478).epsilon(1e-6));
    const ScalarCodebook cb = lloyd_max_train(1.0, 2);
    REQUIRE(cb.levels.size() == 4);
    for (int i = 0; i < 4; ++i)
        CHECK(cb.levels[static_cast<std::size_t>(i)] ==
              doctest::Approx(oracle.levels[static_cast<std::size_t>(i)]).epsilon(2e-5));
    CHECK(cb.train_mse == doctest::Approx(oracle.mse).epsilon(1e-4));
}

TEST_CASE("lloyd parameter validation") {
    CHECK_THROWS_AS(lloyd_max_train(0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(lloyd_max_train(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(lloyd_max_train(-1.0, 2), std::invalid_argument);
}

TEST_CASE("non-convergence carries the last iterate") {
    try {
        lloyd_max_train(1.0, 4, 2, 1e-16);
        FAIL("expected lloyd_convergence_error");
    } catch (const lloyd_convergence_error& e) {
        CHECK(e.last_iterate.levels.size() == 16);
        CHECK(e.movement > 1e-16);
    }
}

TEST_CASE("codebook encode ties go to the upper cell") {
    const ScalarCodebook cb = lloyd_max_train(1.0, 1);
    const double th = cb.thresholds[0];
    CHECK(std::fabs(th) <= 1e-9);     // symmetric book
    CHECK(cb.encode(th) == 1);        // exactly at the threshold
    CHECK(cb.encode(th - 1e-9) == 0);
    CHECK(cb.encode(0.3) == 1);
    CHECK(cb.decode(1) == doctest::Approx(0.7978845608).epsilon(1e-4));
}

TEST_CASE("codebook serialization round trip") {
    const ScalarCodebook cb = lloyd_max_train(1.0, 2);
    std::stringstream ss;
    save_codebook(cb, ss);
    CHECK(ss.str().rfind("levels 4\n", 0) == 0);
    const ScalarCodebook back = load_codebook(ss);
    REQUIRE(back.levels.size() == cb.levels.size());
    for (std::size_t i = 0; i < cb.levels.size(); ++i) CHECK(back.levels[i] == cb.levels[i]);
    for (std::size_t i = 0; i < cb.thresholds.size(); ++i)
        CHECK(back.thresholds[i] == doctest::Approx(cb.thresholds[i]).epsilon(1e-15));
}

TEST_CASE("product quantizer code") {
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 1)};
    const MultiterminalCode code = scalar_code_as_multiterminal(books, 2);
    CHECK(code.index_sizes[0] == 4);
    CHECK(code.rates[0] == doctest::Approx(1.0));

    // inputs at exact levels reconstruct exactly
    const std::vector<double> x = {books[0].levels[1], books[0].levels[0]};
    const std::uint64_t idx = code.encoders[0](x);
    const std::vector<std::uint64_t> tuple = {idx};
    const auto rec = code.decoders[0](tuple);
    CHECK(rec[0] == x[0]);
    CHECK(rec[1] == x[1]);

    // n=1 single-symbol nearest level
    const MultiterminalCode one = scalar_code_as_multiterminal(books, 1);
    const std::vector<double> x1 = {0.3};
    const std::vector<std::uint64_t> t1 = {one.encoders[0](x1)};
    CHECK(one.decoders[0](t1)[0] == doctest::Approx(0.7978845608).epsilon(1e-4));

    // index overflow guard: 63 one-bit symbols do not fit
    CHECK_THROWS_AS(scalar_code_as_multiterminal(books, 63), std::invalid_argument);
}

TEST_CASE("lmmse decoder: diagonal covariance shrinks each coordinate") {
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 1), lloyd_max_train(1.0, 1)};
    const MultiterminalCode code = build_lmmse_decoder_code(CovarianceMatrix::identity(2), books, 1);
    const double q = books[0].train_mse;
    const double c = books[0].levels[1];
    const std::vector<std::uint64_t> tuple = {1, 0};
    const auto r0 = code.decoders[0](tuple);
    const auto r1 = code.decoders[1](tuple);
    CHECK(r0[0] == doctest::Approx(c / (1.0 + q)).epsilon(1e-9));
    CHECK(r1[0] == doctest::Approx(-c / (1.0 + q)).epsilon(1e-9));
}

TEST_CASE("lmmse decoder beats the independent decoder on correlated gaussians") {
    // paired comparison on identical samples: the per-trial difference is the
    // quantity with small variance
    const CovarianceMatrix K(2, {1.0, 0.9, 0.9, 1.0});
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 1), lloyd_max_train(1.0, 1)};
    const MultiterminalCode joint = build_lmmse_decoder_code(K, books, 1);
    const MultiterminalCode indep = scalar_code_as_multiterminal(books, 1);
    const SourceSpec spec{Family::gaussian, K, 17};
    const int trials = 100000;
    std::vector<double> dsum(2, 0.0), dsq(2, 0.0);
    std::vector<std::uint64_t> idx(2);
    for (int t = 0; t < trials; ++t) {
        const SourceBlock block = sample_iid(spec, 1, static_cast<std::uint64_t>(t) * 2);
        for (int m = 0; m < 2; ++m) idx[static_cast<std::size_t>(m)] = joint.encoders[m](block.row(m));
        for (int m = 0; m < 2; ++m) {
            const double rj = block.at(m, 0) - joint.decoders[m](idx)[0];
            const double ri = block.at(m, 0) - indep.decoders[m](idx)[0];
            const double diff = rj * rj - ri * ri;
            dsum[static_cast<std::size_t>(m)] += diff;
            dsq[static_cast<std::size_t>(m)] += diff * diff;
        }
    }
    for (int m = 0; m < 2; ++m) {
        const double mean = dsum[static_cast<std::size_t>(m)] / trials;
        const double var = (dsq[static_cast<std::size_t>(m)] - trials * mean * mean) / (trials - 1.0);
        const double se = std::sqrt(var / trials);
        CHECK(mean + 3.0 * se < 0.0);  // joint decoder strictly better
    }
}

TEST_CASE("lmmse decoder approaches identity as q -> 0") {
    // a fine quantizer stands in for the q -> 0 limit
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 6, 20000)};
    const MultiterminalCode code = build_lmmse_decoder_code(CovarianceMatrix::identity(1), books, 1);
    const std::vector<double> x = {0.5};
    const std::vector<std::uint64_t> tuple = {code.encoders[0](x)};
    const double y = books[0].levels[books[0].encode(0.5)];
    CHECK(books[0].train_mse < 1e-3);
    CHECK(code.decoders[0](tuple)[0] == doctest::Approx(y).epsilon(2e-3));
}

TEST_CASE("rate-0 code distortion equals the source variance") {
    const MultiterminalCode zero = rate_zero_code(1, 1);
    const auto est = evaluate_distortion(zero, unit_spec(Family::gaussian, 3), 50000);
    CHECK(std::fabs(est.mse[0] - 1.0) <= 3.0 * est.se[0]);
}

TEST_CASE("one-bit distortion matches the Lloyd oracle on gaussian input") {
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 1)};
    const MultiterminalCode code = scalar_code_as_multiterminal(books, 1);
    const auto est = evaluate_distortion(code, unit_spec(Family::gaussian, 4), 100000);
    CHECK(est.mse[0] == doctest::Approx(0.3633802276).epsilon(0.014));
    CHECK(std::fabs(est.mse[0] - 0.3633802276) <= 3.5 * est.se[0]);
}

TEST_CASE("gaussian-designed one-bit code on a rademacher source") {
    // Rademacher hits +-1 exactly, so the distortion is (1 - level)^2
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 1)};
    const MultiterminalCode code = scalar_code_as_multiterminal(books, 1);
    const auto est = evaluate_distortion(code, unit_spec(Family::rademacher, 5), 100000);
    const double expect = std::pow(1.0 - std::sqrt(2.0 / std::numbers::pi), 2.0);  // 0.0408507
    CHECK(est.mse[0] == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("shannon lower bound sanity") {
    for (int rate : {1, 2}) {
        const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, rate)};
        const auto est = evaluate_distortion(scalar_code_as_multiterminal(books, 1),
                                             unit_spec(Family::gaussian, 6), 30000);
        CHECK(est.mse[0] >= std::pow(2.0, -2.0 * rate) - 3.0 * est.se[0]);
    }
}

TEST_CASE("distortion estimates are stable across seeds") {
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 1)};
    const MultiterminalCode code = scalar_code_as_multiterminal(books, 1);
    const auto a = evaluate_distortion(code, unit_spec(Family::gaussian, 100), 50000);
    const auto b = evaluate_distortion(code, unit_spec(Family::gaussian, 200), 50000);
    CHECK(std::fabs(a.mse[0] - b.mse[0]) <= 3.0 * std::sqrt(a.se[0] * a.se[0] + b.se[0] * b.se[0]));
}

TEST_CASE("scale equivariance of the measured distortion") {
    const std::vector<ScalarCodebook> unit = {lloyd_max_train(1.0, 1)};
    const std::vector<ScalarCodebook> wide = {lloyd_max_train(9.0, 1)};
    const auto a = evaluate_distortion(scalar_code_as_multiterminal(unit, 1),
                                       unit_spec(Family::laplace, 8), 30000);
    SourceSpec scaled{Family::laplace, CovarianceMatrix::scaled_identity(1, 9.0), 8};
    const auto b = evaluate_distortion(scalar_code_as_multiterminal(wide, 1), scaled, 30000);
    CHECK(b.mse[0] == doctest::Approx(9.0 * a.mse[0]).epsilon(1e-9));
}

TEST_CASE("evaluate_distortion validates its inputs") {
    const MultiterminalCode zero = rate_zero_code(2, 1);
    CHECK_THROWS_AS(evaluate_distortion(zero, unit_spec(Family::gaussian, 0), 99),
                    std::invalid_argument);  // trials < 100
    CHECK_THROWS_AS(evaluate_distortion(zero, unit_spec(Family::gaussian, 0), 1000),
                    std::invalid_argument);  // k mismatch
}

TEST_CASE("rate-distortion point assembly") {
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 1)};
    const MultiterminalCode code = scalar_code_as_multiterminal(books, 1);
    const auto est = evaluate_distortion(code, unit_spec(Family::gaussian, 44), 1000);
    const RateDistortionVector rd = rate_distortion_point(code, est);
    CHECK(rd.rates == std::vector<double>{1.0});
    CHECK(rd.distortions[0] == est.mse[0]);
    RateDistortionVector bad;
    bad.rates = {1.0};
    bad.distortions = {-0.1};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("estimates do not depend on the worker count") {
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 1)};
    const MultiterminalCode code = scalar_code_as_multiterminal(books, 1);
    const auto spec = unit_spec(Family::laplace, 71);
    const auto one = evaluate_distortion(code, spec, 5000, 0, 1);
    const auto four = evaluate_distortion(code, spec, 5000, 0, 4);
    CHECK(one.mse == four.mse);  // bit-identical
    CHECK(one.se == four.se);
}

TEST_CASE("encoder determinism") {
    const std::vector<ScalarCodebook> books = {lloyd_max_train(1.0, 2)};
    const MultiterminalCode code = scalar_code_as_multiterminal(books, 2);
    const std::vector<double> x = {0.123, -1.7};
    CHECK(code.encoders[0](x) == code.encoders[0](x));
}
