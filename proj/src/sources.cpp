#include "dsc/sources.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dsc/rng.hpp"

namespace dsc {

Family family_from_string(std::string_view name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "rademacher") return Family::rademacher;
    if (name == "uniform") return Family::uniform;
    if (name == "laplace") return Family::laplace;
    if (name == "two-point-mixture" || name == "two-point" || name == "two_point")
        return Family::two_point;
    throw std::invalid_argument("unknown source family '" + std::string(name) + "'");
}

std::string family_name(Family f) {
    switch (f) {
        case Family::gaussian: return "gaussian";
        case Family::rademacher: return "rademacher";
        case Family::uniform: return "uniform";
        case Family::laplace: return "laplace";
        case Family::two_point: return "two-point-mixture";
    }
    return "?";
}

const std::vector<Family>& all_families() {
    static const std::vector<Family> fams = {Family::gaussian, Family::rademacher, Family::uniform,
                                             Family::laplace, Family::two_point};
    return fams;
}

CovarianceMatrix::CovarianceMatrix(int k, std::vector<double> entries)
    : k_(k), entries_(std::move(entries)) {
    if (k < 1) throw std::invalid_argument("covariance dimension must be >= 1");
    if (entries_.size() != static_cast<std::size_t>(k) * k)
        throw std::invalid_argument("covariance entry count does not match dimension");
    for (int u = 0; u < k; ++u)
        for (int v = u + 1; v < k; ++v)
            if (std::fabs(at(u, v) - at(v, u)) > 1e-12)
                throw std::invalid_argument("covariance matrix is not symmetric");
}

CovarianceMatrix CovarianceMatrix::identity(int k) { return scaled_identity(k, 1.0); }

CovarianceMatrix CovarianceMatrix::scaled_identity(int k, double variance) {
    std::vector<double> e(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) e[static_cast<std::size_t>(i) * k + i] = variance;
    return CovarianceMatrix(k, std::move(e));
}

CovarianceMatrix CovarianceMatrix::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open covariance file '" + path + "'");
    int k = 0;
    if (!(in >> k) || k < 1)
        throw std::invalid_argument("covariance file '" + path + "': bad dimension line");
    std::vector<double> e(static_cast<std::size_t>(k) * k);
    for (auto& v : e)
        if (!(in >> v))
            throw std::invalid_argument("covariance file '" + path + "': expected " +
                                        std::to_string(k * k) + " entries");
    return CovarianceMatrix(k, std::move(e));
}

double CovarianceMatrix::quadratic_form(std::span<const double> t) const {
    if (static_cast<int>(t.size()) != k_)
        throw std::invalid_argument("quadratic_form: direction length mismatch");
    double acc = 0.0;
    for (int u = 0; u < k_; ++u)
        for (int v = 0; v < k_; ++v) acc += t[u] * t[v] * at(u, v);
    return acc;
}

std::vector<double> covariance_factor(const CovarianceMatrix& K) {
    const int k = K.dim();
    Eigen::MatrixXd M(k, k);
    for (int u = 0; u < k; ++u)
        for (int v = 0; v < k; ++v) M(u, v) = K.at(u, v);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("covariance_factor: eigendecomposition failed");
    Eigen::VectorXd lam = es.eigenvalues();
    for (int i = 0; i < k; ++i) {
        if (lam(i) < -1e-10)
            throw std::invalid_argument("covariance matrix is not positive semidefinite "
                                        "(eigenvalue " +
                                        std::to_string(lam(i)) + ")");
        if (lam(i) < 0.0) lam(i) = 0.0;
    }
    Eigen::MatrixXd S =
        es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    std::vector<double> out(static_cast<std::size_t>(k) * k);
    for (int u = 0; u < k; ++u)
        for (int v = 0; v < k; ++v) out[static_cast<std::size_t>(u) * k + v] = S(u, v);
    return out;
}

double unit_draw(Family family, double two_point_p, const SubstreamRng& rng, std::uint64_t i) {
    switch (family) {
        case Family::gaussian: return rng.normal(i);
        case Family::rademacher: return rng.uniform(i) < 0.5 ? -1.0 : 1.0;
        case Family::uniform: return (2.0 * rng.uniform(i) - 1.0) * std::sqrt(3.0);
        case Family::laplace: {
            // inverse CDF, scale 1/sqrt(2) so the variance is 1
            double u = rng.uniform(i) - 0.5;
            double mag = std::log(1.0 - 2.0 * std::fabs(u));
            return (u < 0 ? mag : -mag) / std::sqrt(2.0);
        }
        case Family::two_point: {
            const double p = two_point_p;
            const double a = std::sqrt((1.0 - p) / p);   // positive point, prob p
            const double c = -std::sqrt(p / (1.0 - p));  // negative point, prob 1-p
            return rng.uniform(i) < p ? a : c;
        }
    }
    throw std::invalid_argument("unknown family");
}

double family_support_bound(Family family, double two_point_p) {
    switch (family) {
        case Family::gaussian:
        case Family::laplace: return std::numeric_limits<double>::infinity();
        case Family::rademacher: return 1.0;
        case Family::uniform: return std::sqrt(3.0);
        case Family::two_point: {
            const double p = two_point_p;
            return std::max(std::sqrt((1.0 - p) / p), std::sqrt(p / (1.0 - p)));
        }
    }
    return std::numeric_limits<double>::infinity();
}

SourceBlock sample_iid(const SourceSpec& spec, std::int64_t L, std::uint64_t stream0) {
    if (L < 1) throw std::invalid_argument("sample_iid: L must be >= 1");
    if (spec.family == Family::two_point && (spec.two_point_p <= 0.0 || spec.two_point_p >= 1.0))
        throw std::invalid_argument("two-point-mixture requires 0 < p < 1");
    const int k = spec.dim();
    const std::vector<double> S = covariance_factor(spec.K);

    SourceBlock block;
    block.k = k;
    block.L = L;
    block.data.assign(static_cast<std::size_t>(k) * L, 0.0);

    // raw unit draws, one substream per component
    std::vector<double> w(static_cast<std::size_t>(k));
    std::vector<SubstreamRng> rngs;
    rngs.reserve(k);
    for (int m = 0; m < k; ++m) rngs.emplace_back(spec.seed, stream0 + static_cast<std::uint64_t>(m));
    for (std::int64_t i = 0; i < L; ++i) {
        for (int m = 0; m < k; ++m)
            w[m] = unit_draw(spec.family, spec.two_point_p, rngs[m], static_cast<std::uint64_t>(i));
        for (int m = 0; m < k; ++m) {
            const double* srow = S.data() + static_cast<std::size_t>(m) * k;
            double acc = 0.0;
            for (int j = 0; j < k; ++j) acc += srow[j] * w[j];
            block.data[static_cast<std::size_t>(m) * L + i] = acc;
        }
    }
    return block;
}

CovarianceMatrix empirical_covariance(const SourceBlock& block) {
    if (block.L < 2) throw std::invalid_argument("empirical_covariance: need L >= 2");
    const int k = block.k;
    std::vector<double> e(static_cast<std::size_t>(k) * k, 0.0);
    for (int u = 0; u < k; ++u) {
        for (int v = u; v < k; ++v) {
            double acc = 0.0;
            const double* ru = block.data.data() + static_cast<std::size_t>(u) * block.L;
            const double* rv = block.data.data() + static_cast<std::size_t>(v) * block.L;
            for (std::int64_t i = 0; i < block.L; ++i) acc += ru[i] * rv[i];
            acc /= static_cast<double>(block.L);
            e[static_cast<std::size_t>(u) * k + v] = acc;
            e[static_cast<std::size_t>(v) * k + u] = acc;
        }
    }
    return CovarianceMatrix(k, std::move(e));
}

double marginal_support_bound(const SourceSpec& spec, int m) {
    const double w = family_support_bound(spec.family, spec.two_point_p);
    if (!std::isfinite(w)) return w;
    const int k = spec.dim();
    const std::vector<double> S = covariance_factor(spec.K);
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += std::fabs(S[static_cast<std::size_t>(m) * k + j]);
    return acc * w;
}

double marginal_box_halfwidth(const SourceSpec& spec, int m, double tail_mass) {
    if (tail_mass <= 0.0 || tail_mass >= 1.0)
        throw std::invalid_argument("marginal_box_halfwidth: tail mass must be in (0,1)");
    const double bound = marginal_support_bound(spec, m);
    if (std::isfinite(bound)) return bound * (1.0 + 1e-9) + 1e-12;

    const int k = spec.dim();
    const double sigma = std::sqrt(spec.K.at(m, m));
    if (spec.family == Family::gaussian) {
        // two-sided tail of N(0, sigma^2)
        double z = 0.0;
        {
            // bisection on erfc is plenty here
            double lo = 0.0, hi = 64.0;
            for (int it = 0; it < 200; ++it) {
                z = 0.5 * (lo + hi);
                double p = std::erfc(z / std::sqrt(2.0));  // two-sided tail of N(0,1)
                (p > tail_mass ? lo : hi) = z;
            }
        }
        return sigma * z;
    }
    // laplace mixture: |sum_j S_mj w_j| > c implies |S_mj w_j| > c/k for some j;
    // P(|w| > t) = exp(-sqrt(2) t) gives a union bound.
    const std::vector<double> S = covariance_factor(spec.K);
    double amax = 0.0;
    for (int j = 0; j < k; ++j)
        amax = std::max(amax, std::fabs(S[static_cast<std::size_t>(m) * k + j]));
    if (amax == 0.0) return 1e-12;
    return k * amax * std::log(static_cast<double>(k) / tail_mass) / std::sqrt(2.0);
}

std::vector<double> sample_marginal(const SourceSpec& spec, int m, std::int64_t L,
                                    std::uint64_t stream0) {
    if (m < 0 || m >= spec.dim()) throw std::invalid_argument("sample_marginal: bad component");
    const int k = spec.dim();
    const std::vector<double> S = covariance_factor(spec.K);
    const double* srow = S.data() + static_cast<std::size_t>(m) * k;
    std::vector<SubstreamRng> rngs;
    rngs.reserve(k);
    for (int j = 0; j < k; ++j) rngs.emplace_back(spec.seed, stream0 + static_cast<std::uint64_t>(j));
    std::vector<double> out(static_cast<std::size_t>(L));
    for (std::int64_t i = 0; i < L; ++i) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j)
            acc += srow[j] *
                   unit_draw(spec.family, spec.two_point_p, rngs[j], static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

}  // namespace dsc
