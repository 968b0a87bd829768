#ifndef DSC_STATS_HPP
#define DSC_STATS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "dsc/sources.hpp"

namespace dsc {

double normal_cdf(double x);       // standard normal Phi
double normal_quantile(double p);  // Phi^{-1}, p in (0,1)

// KS acceptance threshold at significance alpha for N samples,
// via the asymptotic c(alpha)/sqrt(N) formula (c(0.01) ~ 1.63).
double ks_critical_value(double alpha, std::size_t n);

// A Cramer-Wold projection: values[i] = sum_m t_m x_m[i] with the exact
// sigma^2 = t'Kt it should have.
struct ProjectionSample {
    std::vector<double> t;
    std::vector<double> values;
    double sigma2 = 0.0;
};

ProjectionSample cramer_wold_projection(const SourceBlock& block, std::span<const double> t,
                                        const CovarianceMatrix& K);

// sup_x |empirical CDF - Phi(x/sigma)| over the sample; needs >= 1000 values.
double ks_distance_to_normal(const ProjectionSample& sample);

// Projection samples of the mixed source: each component's stream is mixed
// with Q per length-b block, then projected along t. row >= 0 keeps only
// coordinate `row` of each mixed block; row = -1 pools all b coordinates
// (the full interleaved stream). b = 1 means no mixing (raw source).
ProjectionSample mixed_projection_sample(const SourceSpec& spec, std::span<const double> t, int b,
                                         std::int64_t n_samples, int row = -1,
                                         std::uint64_t stream0 = 0);

// Monte Carlo estimate of the Lindeberg sum
//   (1/s_b^2) sum_j E[Y_j^2 1{|Y_j| >= eps*s_b}],  Y_j = sqrt(b)(sum_m t_m x_m[j]) Q(row,j),
// with the exact s_b^2 = b*t'Kt. For bounded-support families the indicator
// is analytically dead once eps*s_b exceeds sqrt(b)*max_j|Q(row,j)|*sum_m|t_m|*bound_m,
// and the estimate is exactly zero.
struct LindebergResult {
    double sum = 0.0;
    double s_b2 = 0.0;
    double threshold = 0.0;      // eps * s_b
    double envelope = 0.0;       // analytic sup|Y| (infinite for unbounded families)
    bool analytically_zero = false;
};
LindebergResult lindeberg_sum(const SourceSpec& spec, std::span<const double> t, int b, int row,
                              double epsilon, int trials, std::uint64_t stream0 = 0);

// Worst row of the Lindeberg sum (mirrors monitoring the max-distortion block).
struct LindebergScan {
    std::vector<LindebergResult> per_row;
    int worst_row = 0;
};
LindebergScan lindeberg_scan(const SourceSpec& spec, std::span<const double> t, int b,
                             double epsilon, int trials, std::uint64_t stream0 = 0);

// Default Cramer-Wold directions: the k axes, then all-ones and alternating
// signs (deduplicated for k = 1).
std::vector<std::vector<double>> default_directions(int k);

}  // namespace dsc

#endif
