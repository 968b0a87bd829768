#ifndef DSC_CONFIG_HPP
#define DSC_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsc/sources.hpp"

namespace dsc {

class config_error : public std::runtime_error {
  public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Line-based key = value format, '#' comments. Matrices are inline
// semicolon-separated rows ("1, 0.8; 0.8, 1") or "file:<path>" pointing at a
// plain-text matrix file.
struct ExperimentConfig {
    int k = 1;
    int n = 1;
    std::vector<int> rates;        // bits per symbol, one per encoder
    Family family = Family::gaussian;
    CovarianceMatrix K = CovarianceMatrix::identity(1);
    std::vector<int> b_list = {4, 16, 64, 256};
    int trials = 100000;
    std::uint64_t seed = 0;
    double delta = 0.0;            // > 0 enables the rectangle audit
    double epsilon = 0.02;         // distortion-gap tolerance at the largest b
    double epsilon_prime = 0.1;    // per-symbol slack the M*sqrt(delta) budget must fit
    double two_point_p = 0.9;
    std::string out_dir = "out";
    std::string decoder = "lmmse";  // or "product"
    std::int64_t ks_samples = 100000;
    int rect_resolution = 0;        // 0 = default per dimension

    SourceSpec source_spec() const;
    SourceSpec gaussian_reference_spec() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace dsc

#endif
