// dscsim: multiterminal source coding experiments with unitary mixing.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dsc/csvio.hpp"
#include "dsc/experiment.hpp"
#include "dsc/gaussianize.hpp"
#include "dsc/mixing.hpp"
#include "dsc/rectangles.hpp"
#include "dsc/stats.hpp"

namespace {

struct CommonOpts {
    std::string family = "gaussian";
    std::string K;           // inline "1,0.8;0.8,1" or "file:path"; empty = identity
    int k = 1;
    int n = 1;
    std::string rates;       // comma list of bits, default "1" per encoder
    std::string decoder = "lmmse";
    double two_point_p = 0.9;
    int trials = 100000;
    std::uint64_t seed = 0;
    std::string out;         // directory; empty = stdout
    std::string b_list = "4,16,64,256";
};

void add_source_options(CLI::App* cmd, CommonOpts& o, bool with_b_list = true) {
    cmd->add_option("--family", o.family, "source family (gaussian, rademacher, uniform, laplace, two-point-mixture)");
    cmd->add_option("--K", o.K, "covariance: inline rows 'a,b;c,d' or file:<path> (default identity)");
    cmd->add_option("--k", o.k, "number of encoders");
    cmd->add_option("--n", o.n, "base blocklength");
    cmd->add_option("--rates", o.rates, "bits per symbol, comma separated (default 1 per encoder)");
    cmd->add_option("--decoder", o.decoder, "decoder type: lmmse or product");
    cmd->add_option("--two-point-p", o.two_point_p, "positive-point probability of the two-point family");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--out", o.out, "output directory (default: CSV to stdout)");
    if (with_b_list) cmd->add_option("--b-list", o.b_list, "mixing lengths, comma separated (1 = raw)");
}

// single validation path: assemble config text and reuse the config parser
dsc::ExperimentConfig to_config(const CommonOpts& o) {
    std::ostringstream cfg;
    cfg << "k = " << o.k << "\n";
    cfg << "n = " << o.n << "\n";
    cfg << "family = " << o.family << "\n";
    if (!o.K.empty()) cfg << "K = " << o.K << "\n";
    if (!o.rates.empty()) cfg << "rates = " << o.rates << "\n";
    cfg << "decoder = " << o.decoder << "\n";
    cfg << "two_point_p = " << o.two_point_p << "\n";
    cfg << "trials = " << o.trials << "\n";
    cfg << "seed = " << o.seed << "\n";
    cfg << "b_list = " << o.b_list << "\n";
    if (!o.out.empty()) cfg << "out = " << o.out << "\n";
    return dsc::parse_config_text(cfg.str());
}

// CSV sink: stdout or <out>/<name>
class Sink {
  public:
    Sink(const std::string& out_dir, const std::string& name) {
        if (!out_dir.empty()) {
            std::filesystem::create_directories(out_dir);
            file_.open(std::filesystem::path(out_dir) / name, std::ios::binary);
            if (!file_) throw std::runtime_error("cannot write output file " + name);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

int cmd_gen_matrix(int b, const std::string& out) {
    const dsc::MixingMatrix Q = dsc::MixingMatrix::build(b);
    Sink sink(out, "mixing_matrix.csv");
    auto& os = sink.stream();
    os << "row";
    for (int j = 0; j < b; ++j) os << ",c" << j;
    os << "\n";
    for (int i = 0; i < b; ++i) {
        os << i;
        for (int j = 0; j < b; ++j) os << "," << dsc::csv_num(Q.entry(i, j));
        os << "\n";
    }
    return 0;
}

int cmd_distortion(const CommonOpts& o, int b) {
    const auto cfg = to_config(o);
    const dsc::MultiterminalCode base = dsc::build_base_code(cfg);
    const dsc::SourceSpec spec = cfg.source_spec();
    dsc::DistortionEstimate est;
    if (b <= 1)
        est = dsc::evaluate_distortion(base, spec, cfg.trials);
    else
        est = dsc::evaluate_distortion(dsc::wrap_code(base, b), spec, cfg.trials);
    Sink sink(o.out, "distortion.csv");
    auto& os = sink.stream();
    os << "encoder,rate,b,distortion,stderr\n";
    for (int m = 0; m < cfg.k; ++m)
        os << m << "," << cfg.rates[static_cast<std::size_t>(m)] << "," << (b <= 1 ? 1 : b) << ","
           << dsc::csv_num(est.mse[m]) << "," << dsc::csv_num(est.se[m]) << "\n";
    return 0;
}

int cmd_sweep_b(const CommonOpts& o) {
    const auto cfg = to_config(o);
    const dsc::MultiterminalCode base = dsc::build_base_code(cfg);
    const auto rows = dsc::distortion_convergence(base, cfg.source_spec(), cfg.b_list, cfg.trials);
    Sink sink(o.out, "convergence.csv");
    auto& os = sink.stream();
    os << "b,encoder,distortion,stderr,gaussian_ref,ref_stderr\n";
    for (const auto& r : rows)
        os << r.b << "," << r.encoder << "," << dsc::csv_num(r.distortion) << ","
           << dsc::csv_num(r.se) << "," << dsc::csv_num(r.gaussian_ref) << ","
           << dsc::csv_num(r.ref_se) << "\n";
    return 0;
}

std::vector<double> parse_direction(const std::string& arg, int k) {
    std::vector<double> t;
    std::istringstream ts(arg);
    std::string item;
    while (std::getline(ts, item, ',')) t.push_back(std::stod(item));
    if (static_cast<int>(t.size()) != k)
        throw dsc::config_error("direction length must equal k");
    return t;
}

int cmd_gaussianity(const CommonOpts& o, std::int64_t samples, int row, const std::string& t_arg) {
    const auto cfg = to_config(o);
    const dsc::SourceSpec spec = cfg.source_spec();
    std::vector<std::vector<double>> dirs;
    if (t_arg.empty())
        dirs = dsc::default_directions(cfg.k);
    else
        dirs.push_back(parse_direction(t_arg, cfg.k));
    Sink sink(o.out, "gaussianity.csv");
    auto& os = sink.stream();
    os << "b,direction_id,ks_stat,n_samples,seed\n";
    std::uint64_t stream = 0;
    for (int b : cfg.b_list) {
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            const auto sample = dsc::mixed_projection_sample(spec, dirs[d], b, samples, row, stream);
            os << b << "," << d << "," << dsc::csv_num(dsc::ks_distance_to_normal(sample)) << ","
               << sample.values.size() << "," << cfg.seed << "\n";
            stream += std::uint64_t{1} << 32;
        }
    }
    return 0;
}

int cmd_lindeberg(const CommonOpts& o, double epsilon, int row, bool scan,
                  const std::string& t_arg) {
    const auto cfg = to_config(o);
    const dsc::SourceSpec spec = cfg.source_spec();
    std::vector<double> t(static_cast<std::size_t>(cfg.k), 1.0);
    if (!t_arg.empty()) t = parse_direction(t_arg, cfg.k);
    Sink sink(o.out, "lindeberg.csv");
    auto& os = sink.stream();
    os << "b,row,epsilon,lindeberg_sum,s_b2,analytic_zero\n";
    std::uint64_t stream = 0;
    for (int b : cfg.b_list) {
        if (scan) {
            const auto sc = dsc::lindeberg_scan(spec, t, b, epsilon, cfg.trials, stream);
            const auto& worst = sc.per_row[static_cast<std::size_t>(sc.worst_row)];
            os << b << "," << sc.worst_row << "," << dsc::csv_num(epsilon) << ","
               << dsc::csv_num(worst.sum) << "," << dsc::csv_num(worst.s_b2) << ","
               << (worst.analytically_zero ? 1 : 0) << "\n";
        } else {
            if (row >= b) throw dsc::config_error("lindeberg: row >= b");
            const auto r = dsc::lindeberg_sum(spec, t, b, row, epsilon, cfg.trials, stream);
            os << b << "," << row << "," << dsc::csv_num(epsilon) << "," << dsc::csv_num(r.sum)
               << "," << dsc::csv_num(r.s_b2) << "," << (r.analytically_zero ? 1 : 0) << "\n";
        }
        stream += std::uint64_t{1} << 32;
    }
    return 0;
}

int cmd_rect_audit(const CommonOpts& o, double delta, double epsilon_prime, int resolution,
                   std::int64_t audit_samples, const std::string& eta_arg) {
    const auto cfg = to_config(o);
    const dsc::MultiterminalCode base = dsc::build_base_code(cfg);
    const dsc::SourceSpec gspec = cfg.gaussian_reference_spec();
    if (resolution <= 0) resolution = cfg.n == 1 ? 32768 : 1024;
    const dsc::RobustCode robust =
        dsc::build_robust_code(base, gspec, delta, epsilon_prime, resolution, audit_samples);
    const int ev_trials = std::max(10000, cfg.trials);
    const auto ev = dsc::estimate_event_A(base, robust, gspec, ev_trials, std::uint64_t{1} << 32);
    const auto base_d = dsc::evaluate_distortion(base, gspec, cfg.trials, std::uint64_t{1} << 33);
    const auto rob_d =
        dsc::evaluate_distortion(robust.code, gspec, cfg.trials, std::uint64_t{1} << 33);

    Sink sink(o.out, "rect_audit.csv");
    auto& os = sink.stream();
    os << "encoder,cells,rectangles,max_sym_diff,delta,pr_a,pr_a_se,pr_a_bound,base_distortion,"
          "robust_distortion,inflation_bound\n";
    for (int m = 0; m < cfg.k; ++m) {
        const auto& part = robust.partitions[static_cast<std::size_t>(m)];
        double max_sd = 0.0;
        for (double v : part.sym_diff_estimate()) max_sd = std::max(max_sd, v);
        os << m << "," << part.cells() << "," << part.rectangle_count() << ","
           << dsc::csv_num(max_sd) << "," << dsc::csv_num(delta) << ","
           << dsc::csv_num(ev.probability) << "," << dsc::csv_num(ev.se) << ","
           << dsc::csv_num(ev.union_bound) << "," << dsc::csv_num(base_d.mse[m]) << ","
           << dsc::csv_num(rob_d.mse[m]) << "," << dsc::csv_num(robust.inflation_bound[m]) << "\n";
    }

    if (!eta_arg.empty()) {
        std::vector<double> etas;
        std::istringstream es(eta_arg);
        std::string item;
        while (std::getline(es, item, ',')) etas.push_back(std::stod(item));
        Sink bsink(o.out, "boundary_scan.csv");
        auto& bs = bsink.stream();
        bs << "encoder,eta,fraction,stderr\n";
        for (int m = 0; m < cfg.k; ++m) {
            const auto scan_rows =
                dsc::boundary_mass_scan(robust.partitions[static_cast<std::size_t>(m)], gspec, m,
                                        etas, cfg.trials, std::uint64_t{1} << 34);
            for (const auto& r : scan_rows)
                bs << m << "," << dsc::csv_num(r.eta) << "," << dsc::csv_num(r.fraction) << ","
                   << dsc::csv_num(r.se) << "\n";
        }
    }
    return 0;
}

int cmd_run(const std::string& config_path, std::uint64_t seed, bool seed_set,
            const std::string& out, int trials) {
    dsc::ExperimentConfig cfg = dsc::parse_config_file(config_path);
    if (seed_set) cfg.seed = seed;
    if (!out.empty()) cfg.out_dir = out;
    if (trials != 0) {
        if (trials < 100) throw dsc::config_error("run: --trials must be >= 100");
        cfg.trials = trials;
    }
    const dsc::RunOutcome outcome = dsc::run_experiment(cfg, std::cout);
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiterminal source coding with DFT mixing: experiments and diagnostics"};
    app.require_subcommand(1);

    // gen-matrix
    auto* gen = app.add_subcommand("gen-matrix", "print the orthonormal mixing matrix Q");
    int gen_b = 4;
    std::string gen_out;
    gen->add_option("--b", gen_b, "mixing length (even)")->required();
    gen->add_option("--out", gen_out, "output directory (default stdout)");

    // distortion
    auto* dist = app.add_subcommand("distortion", "Monte Carlo distortion of the base or wrapped code");
    CommonOpts dist_o;
    int dist_b = 1;
    add_source_options(dist, dist_o, false);
    dist->add_option("--b", dist_b, "wrap with this mixing length (1 = raw base code)");

    // sweep-b
    auto* sweep = app.add_subcommand("sweep-b", "wrapped distortion across b against the Gaussian reference");
    CommonOpts sweep_o;
    add_source_options(sweep, sweep_o);

    // gaussianity
    auto* gauss = app.add_subcommand("gaussianity", "KS distance of mixed projections to the normal law");
    CommonOpts gauss_o;
    std::int64_t gauss_samples = 100000;
    int gauss_row = -1;
    std::string gauss_t;
    add_source_options(gauss, gauss_o);
    gauss->add_option("--samples", gauss_samples, "projection samples per (b, direction)");
    gauss->add_option("--row", gauss_row, "mixed coordinate to keep (-1 = pool all rows)");
    gauss->add_option("--t", gauss_t, "single projection direction, comma separated (default: standard set)");

    // lindeberg
    auto* lind = app.add_subcommand("lindeberg", "Monte Carlo Lindeberg sums");
    CommonOpts lind_o;
    double lind_eps = 0.1;
    int lind_row = 0;
    bool lind_scan = false;
    std::string lind_t;
    add_source_options(lind, lind_o);
    lind->add_option("--epsilon", lind_eps, "Lindeberg epsilon");
    lind->add_option("--row", lind_row, "mixing-matrix row");
    lind->add_flag("--scan", lind_scan, "report the worst row instead of a fixed one");
    lind->add_option("--t", lind_t, "projection direction, comma separated (default all-ones)");

    // rect-audit
    auto* rect = app.add_subcommand("rect-audit", "rectangle approximation audit with erasure bookkeeping");
    CommonOpts rect_o;
    double rect_delta = 1e-4, rect_eps_prime = 0.1;
    int rect_res = 0;
    std::int64_t rect_audit_samples = 400000;
    std::string rect_etas;
    add_source_options(rect, rect_o, false);
    rect->add_option("--delta", rect_delta, "per-cell symmetric-difference budget");
    rect->add_option("--epsilon-prime", rect_eps_prime, "distortion slack the M*sqrt(delta) bound must fit");
    rect->add_option("--resolution", rect_res, "grid resolution per axis (0 = default)");
    rect->add_option("--audit-samples", rect_audit_samples, "Monte Carlo samples for the budget audit");
    rect->add_option("--eta-list", rect_etas, "descending eta values for the boundary-mass scan");

    // run
    auto* run = app.add_subcommand("run", "full experiment from a config file");
    std::string run_config, run_out;
    std::uint64_t run_seed = 0;
    int run_trials = 0;
    run->add_option("--config", run_config, "config file path")->required();
    auto* seed_opt = run->add_option("--seed", run_seed, "override the config seed");
    run->add_option("--out", run_out, "override the output directory");
    run->add_option("--trials", run_trials, "override the trial count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_matrix(gen_b, gen_out);
        if (dist->parsed()) return cmd_distortion(dist_o, dist_b);
        if (sweep->parsed()) return cmd_sweep_b(sweep_o);
        if (gauss->parsed()) return cmd_gaussianity(gauss_o, gauss_samples, gauss_row, gauss_t);
        if (lind->parsed()) return cmd_lindeberg(lind_o, lind_eps, lind_row, lind_scan, lind_t);
        if (rect->parsed())
            return cmd_rect_audit(rect_o, rect_delta, rect_eps_prime, rect_res,
                                  rect_audit_samples, rect_etas);
        if (run->parsed())
            return cmd_run(run_config, run_seed, seed_opt->count() > 0, run_out, run_trials);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
