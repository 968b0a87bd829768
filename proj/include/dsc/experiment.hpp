#ifndef DSC_EXPERIMENT_HPP
#define DSC_EXPERIMENT_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "dsc/codecs.hpp"
#include "dsc/config.hpp"

namespace dsc {

// End-to-end run: train the base codes, measure the Gaussian reference,
// sweep the wrapped code over b_list, run the gaussianity sweep, and (when
// delta > 0 and n <= 2) the rectangle audit. Writes convergence.csv,
// gaussianity.csv, rect_audit.csv and summary.csv under cfg.out_dir.
// Returns 0 when every tolerance check passes, 1 otherwise.
struct RunOutcome {
    int exit_code = 0;
    std::vector<std::string> failures;
};

RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// Codebooks the runner trains (exposed for the CLI's distortion command).
std::vector<ScalarCodebook> train_codebooks(const ExperimentConfig& cfg);
MultiterminalCode build_base_code(const ExperimentConfig& cfg);

}  // namespace dsc

#endif
