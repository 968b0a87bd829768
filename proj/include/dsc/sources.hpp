#ifndef DSC_SOURCES_HPP
#define DSC_SOURCES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsc {

// Marginal families, all standardized to zero mean and unit variance before
// the covariance factor is applied: rademacher = +-1, uniform on
// (-sqrt(3), sqrt(3)), laplace with scale 1/sqrt(2), two-point-mixture with a
// configurable probability p of the positive value.
enum class Family { gaussian, rademacher, uniform, laplace, two_point };

Family family_from_string(std::string_view name);  // throws on unknown family
std::string family_name(Family f);
const std::vector<Family>& all_families();

class CovarianceMatrix {
  public:
    // entries row-major k*k; must be symmetric within 1e-12
    CovarianceMatrix(int k, std::vector<double> entries);
    static CovarianceMatrix identity(int k);
    static CovarianceMatrix scaled_identity(int k, double variance);
    // plain-text file: first line k, then k whitespace-separated rows
    static CovarianceMatrix load(const std::string& path);

    int dim() const { return k_; }
    double at(int u, int v) const { return entries_[static_cast<std::size_t>(u) * k_ + v]; }
    std::span<const double> data() const { return entries_; }

    // t' K t
    double quadratic_form(std::span<const double> t) const;

  private:
    int k_;
    std::vector<double> entries_;
};

struct SourceSpec {
    Family family = Family::gaussian;
    CovarianceMatrix K = CovarianceMatrix::identity(1);
    std::uint64_t seed = 0;
    double two_point_p = 0.9;  // probability of the positive support point

    int dim() const { return K.dim(); }
};

// k x L block of samples; row m holds the L samples seen by encoder m.
struct SourceBlock {
    int k = 0;
    std::int64_t L = 0;
    std::vector<double> data;  // row-major k x L

    double at(int m, std::int64_t i) const { return data[static_cast<std::size_t>(m) * L + i]; }
    std::span<const double> row(int m) const {
        return {data.data() + static_cast<std::size_t>(m) * L, static_cast<std::size_t>(L)};
    }
};

// Symmetric square root S of K (eigendecomposition based, so semidefinite K
// is fine): S*S' = K within 1e-10. Throws if an eigenvalue is below -1e-10.
std::vector<double> covariance_factor(const CovarianceMatrix& K);

// i.i.d. columns of S*w with w per-entry i.i.d. unit draws of the family.
// Component m consumes substream stream0+m of spec.seed; deterministic.
SourceBlock sample_iid(const SourceSpec& spec, std::int64_t L, std::uint64_t stream0 = 0);

// (1/L) * data * data' (zero-mean convention; no mean subtraction). L >= 2.
CovarianceMatrix empirical_covariance(const SourceBlock& block);

// One unit-variance draw of the family (used by samplers and the Lindeberg gate).
double unit_draw(Family family, double two_point_p, const class SubstreamRng& rng, std::uint64_t i);

// sup|w| of the unit-variance family; +infinity for unbounded families.
double family_support_bound(Family family, double two_point_p);

// Support bound of component m's marginal sum_j S_mj * w_j; +infinity when unbounded.
double marginal_support_bound(const SourceSpec& spec, int m);

// Half-width c with P(|x_m| > c) <= tail_mass (exact for bounded families,
// analytic tail bounds for gaussian and laplace).
double marginal_box_halfwidth(const SourceSpec& spec, int m, double tail_mass);

// L samples of component m's marginal alone (n-fold products of this are what
// the rectangle machinery needs). Consumes the same substream layout as
// sample_iid.
std::vector<double> sample_marginal(const SourceSpec& spec, int m, std::int64_t L,
                                    std::uint64_t stream0 = 0);

}  // namespace dsc

#endif
