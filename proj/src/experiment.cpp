#include "dsc/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "dsc/csvio.hpp"
#include "dsc/gaussianize.hpp"
#include "dsc/rectangles.hpp"
#include "dsc/stats.hpp"

namespace dsc {

namespace {

// substream bases for the runner's phases, far apart so nothing overlaps
constexpr std::uint64_t kConvergenceStream = 0;
constexpr std::uint64_t kGaussianityStream = std::uint64_t{1} << 48;
constexpr std::uint64_t kRectStream = std::uint64_t{1} << 52;
constexpr std::uint64_t kEventAStream = std::uint64_t{1} << 53;
constexpr std::uint64_t kRobustEvalStream = std::uint64_t{1} << 54;

std::ofstream open_csv(const std::filesystem::path& dir, const std::string& name,
                       const std::string& header) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);  // binary: identical bytes on every platform
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << header << "\n";
    return out;
}

int default_rect_resolution(int dim) { return dim == 1 ? 32768 : 1024; }

}  // namespace

std::vector<ScalarCodebook> train_codebooks(const ExperimentConfig& cfg) {
    std::vector<ScalarCodebook> books;
    for (int m = 0; m < cfg.k; ++m)
        books.push_back(lloyd_max_train(cfg.K.at(m, m), cfg.rates[static_cast<std::size_t>(m)]));
    return books;
}

MultiterminalCode build_base_code(const ExperimentConfig& cfg) {
    const auto books = train_codebooks(cfg);
    if (cfg.decoder == "lmmse") return build_lmmse_decoder_code(cfg.K, books, cfg.n);
    return scalar_code_as_multiterminal(books, cfg.n);
}

RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    RunOutcome outcome;
    auto fail = [&](const std::string& msg) {
        outcome.failures.push_back(msg);
        outcome.exit_code = 1;
    };
    const std::filesystem::path dir(cfg.out_dir);
    const SourceSpec spec = cfg.source_spec();

    log << "training " << cfg.k << " Lloyd-Max codebook(s), decoder=" << cfg.decoder << "\n";
    const MultiterminalCode base = build_base_code(cfg);

    // --- wrapped-distortion sweep against the Gaussian reference ---
    log << "distortion sweep over b_list (" << cfg.trials << " trials)\n";
    const auto rows =
        distortion_convergence(base, spec, cfg.b_list, cfg.trials, kConvergenceStream);
    {
        auto csv = open_csv(dir, "convergence.csv", "b,encoder,distortion,stderr,gaussian_ref,ref_stderr");
        for (const auto& r : rows)
            csv << r.b << "," << r.encoder << "," << csv_num(r.distortion) << ","
                << csv_num(r.se) << "," << csv_num(r.gaussian_ref) << "," << csv_num(r.ref_se)
                << "\n";
    }
    const int b_final = cfg.b_list.back();
    for (const auto& r : rows) {
        log << "  b=" << r.b << " encoder=" << r.encoder << " D=" << csv_num(r.distortion)
            << " ref=" << csv_num(r.gaussian_ref) << "\n";
        if (cfg.family == Family::gaussian) {
            const double tol = 3.0 * std::sqrt(r.se * r.se + r.ref_se * r.ref_se);
            if (std::fabs(r.distortion - r.gaussian_ref) > tol)
                fail("gaussian fixed point violated at b=" + std::to_string(r.b) + " encoder " +
                     std::to_string(r.encoder));
        } else if (r.b == b_final) {
            if (r.distortion > r.gaussian_ref + cfg.epsilon)
                fail("wrapped distortion exceeds Gaussian reference + epsilon at b=" +
                     std::to_string(r.b) + " encoder " + std::to_string(r.encoder));
        }
    }

    // --- gaussianity sweep (pooled mixed coordinates, Cramer-Wold directions) ---
    log << "gaussianity sweep (" << cfg.ks_samples << " samples per cell)\n";
    {
        auto csv = open_csv(dir, "gaussianity.csv", "b,direction_id,ks_stat,n_samples,seed");
        const auto dirs = default_directions(cfg.k);
        std::uint64_t stream = kGaussianityStream;
        for (int b : cfg.b_list) {
            for (std::size_t d = 0; d < dirs.size(); ++d) {
                const auto sample =
                    mixed_projection_sample(spec, dirs[d], b, cfg.ks_samples, -1, stream);
                const double ks = ks_distance_to_normal(sample);
                csv << b << "," << d << "," << csv_num(ks) << "," << sample.values.size() << ","
                    << cfg.seed << "\n";
                stream += std::uint64_t{1} << 32;
            }
        }
    }

    // --- rectangle audit (erasure-robustness bookkeeping, Gaussian source) ---
    if (cfg.delta > 0.0 && cfg.n <= 2) {
        log << "rectangle audit at delta=" << cfg.delta << "\n";
        const SourceSpec gspec = cfg.gaussian_reference_spec();
        const int res = cfg.rect_resolution > 0 ? cfg.rect_resolution
                                                : default_rect_resolution(cfg.n);
        const RobustCode robust = build_robust_code(base, gspec, cfg.delta, cfg.epsilon_prime,
                                                    res, 400000, kRectStream);
        const int ev_trials = std::max(10000, cfg.trials);
        const EventAEstimate ev = estimate_event_A(base, robust, gspec, ev_trials, kEventAStream);
        const DistortionEstimate base_d =
            evaluate_distortion(base, gspec, cfg.trials, kRobustEvalStream);
        const DistortionEstimate rob_d =
            evaluate_distortion(robust.code, gspec, cfg.trials, kRobustEvalStream);

        auto csv = open_csv(dir, "rect_audit.csv",
                            "encoder,cells,rectangles,max_sym_diff,delta,pr_a,pr_a_se,pr_a_bound,"
                            "base_distortion,robust_distortion,inflation_bound");
        for (int m = 0; m < cfg.k; ++m) {
            const auto& part = robust.partitions[static_cast<std::size_t>(m)];
            double max_sd = 0.0;
            for (double v : part.sym_diff_estimate()) max_sd = std::max(max_sd, v);
            csv << m << "," << part.cells() << "," << part.rectangle_count() << ","
                << csv_num(max_sd) << "," << csv_num(cfg.delta) << "," << csv_num(ev.probability)
                << "," << csv_num(ev.se) << "," << csv_num(ev.union_bound) << ","
                << csv_num(base_d.mse[m]) << "," << csv_num(rob_d.mse[m]) << ","
                << csv_num(robust.inflation_bound[m]) << "\n";
            const double comb_se = std::sqrt(base_d.se[m] * base_d.se[m] + rob_d.se[m] * rob_d.se[m]);
            if (rob_d.mse[m] > base_d.mse[m] + robust.inflation_bound[m] + 3.0 * comb_se)
                fail("robust distortion exceeds M*sqrt(delta)/n bound for encoder " +
                     std::to_string(m));
        }
        log << "  Pr[A]=" << csv_num(ev.probability) << " bound=" << csv_num(ev.union_bound)
            << "\n";
        if (ev.probability > ev.union_bound + 3.0 * ev.se)
            fail("event-A probability exceeds the union bound");
    }

    // --- summary ---
    {
        auto csv = open_csv(dir, "summary.csv", "status,message");
        if (outcome.failures.empty()) {
            csv << "PASS,all checks within tolerance\n";
        } else {
            for (const auto& f : outcome.failures) csv << "FAIL," << f << "\n";
        }
    }
    if (outcome.failures.empty()) {
        log << "all checks passed\n";
    } else {
        for (const auto& f : outcome.failures) log << "FAIL: " << f << "\n";
    }
    return outcome;
}

}  // namespace dsc
