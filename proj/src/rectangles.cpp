#include "dsc/rectangles.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

namespace dsc {

std::size_t RectPartition::rectangle_count() const {
    std::size_t n = 0;
    for (const auto& c : rects_) n += c.size();
    return n;
}

int RectPartition::classify(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("classify: point dimension mismatch");
    if (grid_res_ > 0) {
        std::array<int, 2> idx{0, 0};
        for (int d = 0; d < dim_; ++d) {
            if (x[d] < box_lo_[d] || x[d] >= box_hi_[d]) return 0;
            const double step = (box_hi_[d] - box_lo_[d]) / grid_res_;
            int i = static_cast<int>(std::floor((x[d] - box_lo_[d]) / step));
            if (i < 0) i = 0;
            if (i >= grid_res_) i = grid_res_ - 1;
            idx[d] = i;
        }
        const std::size_t flat = dim_ == 1
                                     ? static_cast<std::size_t>(idx[0])
                                     : static_cast<std::size_t>(idx[1]) * grid_res_ + idx[0];
        return grid_[flat];
    }
    // no lookup grid (loaded partition): scan the rectangles, half-open cells
    for (int j = 0; j < cells_; ++j)
        for (const auto& r : rects_[static_cast<std::size_t>(j)]) {
            bool inside = true;
            for (int d = 0; d < dim_; ++d)
                if (!(x[d] >= r.lo[d] && x[d] < r.hi[d])) {
                    inside = false;
                    break;
                }
            if (inside) return j + 1;
        }
    return 0;
}

double RectPartition::boundary_distance(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("boundary_distance: point dimension mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cell : rects_) {
        for (const auto& r : cell) {
            if (dim_ == 1) {
                best = std::min({best, std::fabs(x[0] - r.lo[0]), std::fabs(x[0] - r.hi[0])});
                continue;
            }
            const bool in_x = x[0] >= r.lo[0] && x[0] <= r.hi[0];
            const bool in_y = x[1] >= r.lo[1] && x[1] <= r.hi[1];
            if (in_x && in_y) {
                best = std::min({best, x[0] - r.lo[0], r.hi[0] - x[0], x[1] - r.lo[1],
                                 r.hi[1] - x[1]});
            } else {
                const double dx = in_x ? 0.0 : std::min(std::fabs(x[0] - r.lo[0]),
                                                        std::fabs(x[0] - r.hi[0]));
                const double dy = in_y ? 0.0 : std::min(std::fabs(x[1] - r.lo[1]),
                                                        std::fabs(x[1] - r.hi[1]));
                best = std::min(best, std::hypot(dx, dy));
            }
        }
    }
    return best;
}

void RectPartition::save(std::ostream& out) const {
    out.precision(17);
    for (int j = 0; j < cells_; ++j)
        for (const auto& r : rects_[static_cast<std::size_t>(j)]) {
            out << (j + 1) << " " << r.lo[0] << " " << r.hi[0];
            if (dim_ == 2) out << " " << r.lo[1] << " " << r.hi[1];
            out << "\n";
        }
}

RectPartition RectPartition::load(std::istream& in) {
    std::vector<std::vector<Rectangle>> rects;
    int dim = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        int cell_id;
        Rectangle r;
        if (!(ls >> cell_id >> r.lo[0] >> r.hi[0]))
            throw std::invalid_argument("partition file: bad rectangle line '" + line + "'");
        int line_dim = 1;
        if (ls >> r.lo[1] >> r.hi[1]) line_dim = 2;
        if (dim == 0) dim = line_dim;
        if (dim != line_dim)
            throw std::invalid_argument("partition file: mixed rectangle dimensions");
        if (cell_id < 1) throw std::invalid_argument("partition file: cell ids start at 1");
        if (rects.size() < static_cast<std::size_t>(cell_id)) rects.resize(cell_id);
        rects[static_cast<std::size_t>(cell_id - 1)].push_back(r);
    }
    if (rects.empty()) throw std::invalid_argument("partition file: no rectangles");
    const int cells = static_cast<int>(rects.size());
    return from_rectangles(dim, cells, std::move(rects));
}

RectPartition RectPartition::from_rectangles(int dim, int cells,
                                             std::vector<std::vector<Rectangle>> rects) {
    if (dim < 1 || dim > 2) throw std::invalid_argument("partition dimension must be 1 or 2");
    if (static_cast<int>(rects.size()) != cells)
        throw std::invalid_argument("cell count does not match rectangle lists");
    RectPartition p;
    p.dim_ = dim;
    p.cells_ = cells;
    p.rects_ = std::move(rects);
    for (int d = 0; d < dim; ++d) {
        p.box_lo_[d] = std::numeric_limits<double>::infinity();
        p.box_hi_[d] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& cell : p.rects_)
        for (const auto& r : cell)
            for (int d = 0; d < dim; ++d) {
                if (!(r.lo[d] < r.hi[d]))
                    throw std::invalid_argument("rectangle is empty or unbounded");
                p.box_lo_[d] = std::min(p.box_lo_[d], r.lo[d]);
                p.box_hi_[d] = std::max(p.box_hi_[d], r.hi[d]);
            }
    return p;
}

RectPartition rectangularize(const std::function<int(std::span<const double>)>& encoder, int dim,
                             int cells, const SourceSpec& spec, int component, double delta,
                             int grid_resolution, std::int64_t audit_samples,
                             std::uint64_t stream0) {
    if (dim < 1 || dim > 2) throw std::invalid_argument("rectangularize: dimension must be 1 or 2");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("rectangularize: delta must be in (0,1)");
    if (cells < 1) throw std::invalid_argument("rectangularize: need at least one cell");
    if (grid_resolution < 2) throw std::invalid_argument("rectangularize: resolution must be >= 2");
    if (dim == 2 && grid_resolution > 1 << 13)
        throw std::invalid_argument("rectangularize: 2-D resolution capped at 8192");
    if (audit_samples < 1000)
        throw std::invalid_argument("rectangularize: need >= 1000 audit samples");

    RectPartition p;
    p.dim_ = dim;
    p.cells_ = cells;
    const double half = marginal_box_halfwidth(spec, component, delta / (4.0 * dim));
    for (int d = 0; d < dim; ++d) {
        p.box_lo_[d] = -half;
        p.box_hi_[d] = half;
    }
    const int G = grid_resolution;
    p.grid_res_ = G;
    const double step = 2.0 * half / G;

    // label every grid rectangle by the encoder value at its center
    std::array<double, 2> pt{0.0, 0.0};
    if (dim == 1) {
        p.grid_.resize(static_cast<std::size_t>(G));
        for (int i = 0; i < G; ++i) {
            pt[0] = -half + (i + 0.5) * step;
            const int label = encoder(std::span<const double>(pt.data(), 1));
            if (label < 0 || label >= cells)
                throw std::invalid_argument("rectangularize: encoder label out of range");
            p.grid_[static_cast<std::size_t>(i)] = label + 1;
        }
    } else {
        p.grid_.resize(static_cast<std::size_t>(G) * G);
        for (int iy = 0; iy < G; ++iy) {
            pt[1] = -half + (iy + 0.5) * step;
            for (int ix = 0; ix < G; ++ix) {
                pt[0] = -half + (ix + 0.5) * step;
                const int label = encoder(std::span<const double>(pt.data(), 2));
                if (label < 0 || label >= cells)
                    throw std::invalid_argument("rectangularize: encoder label out of range");
                p.grid_[static_cast<std::size_t>(iy) * G + ix] = label + 1;
            }
        }
    }

    // merge same-label neighbours into rectangles
    p.rects_.assign(static_cast<std::size_t>(cells), {});
    auto edge = [&](int i) { return -half + i * step; };
    if (dim == 1) {
        int run_start = 0;
        for (int i = 1; i <= G; ++i) {
            if (i == G || p.grid_[static_cast<std::size_t>(i)] != p.grid_[static_cast<std::size_t>(run_start)]) {
                Rectangle r;
                r.lo[0] = edge(run_start);
                r.hi[0] = edge(i);
                p.rects_[static_cast<std::size_t>(p.grid_[static_cast<std::size_t>(run_start)] - 1)]
                    .push_back(r);
                run_start = i;
            }
        }
    } else {
        struct Run {
            int x0, x1, label;  // [x0, x1) in grid cells
        };
        struct Open {
            Run run;
            int y0;
        };
        std::vector<Open> open;
        auto close = [&](const Open& o, int y_end) {
            Rectangle r;
            r.lo[0] = edge(o.run.x0);
            r.hi[0] = edge(o.run.x1);
            r.lo[1] = edge(o.y0);
            r.hi[1] = edge(y_end);
            p.rects_[static_cast<std::size_t>(o.run.label - 1)].push_back(r);
        };
        for (int iy = 0; iy <= G; ++iy) {
            std::vector<Run> runs;
            if (iy < G) {
                int run_start = 0;
                const std::int32_t* row = p.grid_.data() + static_cast<std::size_t>(iy) * G;
                for (int ix = 1; ix <= G; ++ix) {
                    if (ix == G || row[ix] != row[run_start]) {
                        runs.push_back({run_start, ix, row[run_start]});
                        run_start = ix;
                    }
                }
            }
            std::vector<Open> next;
            std::vector<bool> matched(runs.size(), false);
            for (const auto& o : open) {
                bool extended = false;
                for (std::size_t ri = 0; ri < runs.size(); ++ri) {
                    if (!matched[ri] && runs[ri].x0 == o.run.x0 && runs[ri].x1 == o.run.x1 &&
                        runs[ri].label == o.run.label) {
                        matched[ri] = true;
                        next.push_back(o);
                        extended = true;
                        break;
                    }
                }
                if (!extended) close(o, iy);
            }
            for (std::size_t ri = 0; ri < runs.size(); ++ri)
                if (!matched[ri]) next.push_back({runs[ri], iy});
            open = std::move(next);
        }
    }

    // Monte Carlo audit of Pr[x in B_j sym-diff Btilde_j] per cell
    const std::int64_t N = audit_samples;
    std::vector<double> marg =
        sample_marginal(spec, component, N * dim, stream0);
    std::vector<std::int64_t> count(static_cast<std::size_t>(cells), 0);
    for (std::int64_t s = 0; s < N; ++s) {
        std::span<const double> x(marg.data() + s * dim, static_cast<std::size_t>(dim));
        const int truth = encoder(x) + 1;
        if (truth < 1 || truth > cells)
            throw std::invalid_argument("rectangularize: encoder label out of range");
        const int approx = p.classify(x);
        if (truth != approx) {
            ++count[static_cast<std::size_t>(truth - 1)];
            if (approx != 0) ++count[static_cast<std::size_t>(approx - 1)];
        }
    }
    p.sym_diff_.resize(static_cast<std::size_t>(cells));
    p.sym_diff_se_.resize(static_cast<std::size_t>(cells));
    bool ok = true;
    for (int j = 0; j < cells; ++j) {
        const double est = static_cast<double>(count[static_cast<std::size_t>(j)]) / N;
        const double se = std::sqrt(std::max(0.0, est * (1.0 - est) / N));
        p.sym_diff_[static_cast<std::size_t>(j)] = est;
        p.sym_diff_se_[static_cast<std::size_t>(j)] = se;
        if (!(est + 3.0 * se < delta)) ok = false;
    }
    if (!ok) throw budget_error(delta, p.sym_diff_, p.sym_diff_se_);
    return p;
}

namespace {

double max_decoder_norm_sq(const MultiterminalCode& base, int m) {
    // enumerate all index tuples (finite codebook)
    unsigned __int128 total = 1;
    for (std::uint64_t s : base.index_sizes) {
        total *= s;
        if (total > 1000000) throw std::invalid_argument("decoder enumeration too large (> 1e6 tuples)");
    }
    const std::uint64_t count = static_cast<std::uint64_t>(total);
    std::vector<std::uint64_t> tuple(static_cast<std::size_t>(base.k), 0);
    double best = 0.0;
    for (std::uint64_t it = 0; it < count; ++it) {
        std::uint64_t v = it;
        for (int e = base.k - 1; e >= 0; --e) {
            tuple[static_cast<std::size_t>(e)] = v % base.index_sizes[static_cast<std::size_t>(e)];
            v /= base.index_sizes[static_cast<std::size_t>(e)];
        }
        const std::vector<double> g = base.decoders[static_cast<std::size_t>(m)](tuple);
        double n2 = 0.0;
        for (double x : g) n2 += x * x;
        best = std::max(best, n2);
    }
    return best;
}

}  // namespace

RobustCode build_robust_code(const MultiterminalCode& base, const SourceSpec& spec, double delta,
                             double epsilon_prime, int grid_resolution,
                             std::int64_t audit_samples, std::uint64_t stream0) {
    if (base.n > 2) throw std::invalid_argument("build_robust_code: supports blocklength n <= 2");
    if (!(epsilon_prime > 0.0))
        throw std::invalid_argument("build_robust_code: epsilon_prime must be positive");
    const int k = base.k, n = base.n;

    RobustCode rc;
    rc.delta = delta;
    double size_sum = 0.0;
    for (std::uint64_t s : base.index_sizes) size_sum += static_cast<double>(s);
    rc.event_a_bound = delta * size_sum;

    for (int m = 0; m < k; ++m) {
        const auto& f = base.encoders[static_cast<std::size_t>(m)];
        auto enc = [&f](std::span<const double> x) { return static_cast<int>(f(x)); };
        rc.partitions.push_back(rectangularize(
            enc, n, static_cast<int>(base.index_sizes[static_cast<std::size_t>(m)]), spec, m,
            delta, grid_resolution, audit_samples,
            stream0 + (static_cast<std::uint64_t>(m) << 24)));
    }

    // M from the Cauchy-Schwarz chain: (2 sqrt(E||x||^4) + 2 max||g||^2) sqrt(sum_m 2^{nR_m})
    for (int m = 0; m < k; ++m) {
        const std::int64_t N = audit_samples;
        std::vector<double> marg = sample_marginal(spec, m, N * n,
                                                   stream0 + (std::uint64_t{1} << 40));
        double fourth = 0.0;
        for (std::int64_t s = 0; s < N; ++s) {
            double n2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double x = marg[static_cast<std::size_t>(s * n + j)];
                n2 += x * x;
            }
            fourth += n2 * n2;
        }
        fourth /= static_cast<double>(N);
        const double gmax = max_decoder_norm_sq(base, m);
        const double M = (2.0 * std::sqrt(fourth) + 2.0 * gmax) * std::sqrt(size_sum);
        rc.m_constant.push_back(M);
        rc.inflation_bound.push_back(M * std::sqrt(delta) / n);
        if (M * std::sqrt(delta) > n * epsilon_prime)
            throw std::invalid_argument(
                "build_robust_code: delta too large for epsilon_prime (M sqrt(delta) = " +
                std::to_string(M * std::sqrt(delta)) + " > n*eps' = " +
                std::to_string(n * epsilon_prime) + ")");
    }

    rc.code.k = k;
    rc.code.n = n;
    rc.code.rates = base.rates;
    for (std::uint64_t s : base.index_sizes) rc.code.index_sizes.push_back(s + 1);
    auto parts = std::make_shared<const std::vector<RectPartition>>(rc.partitions);
    auto base_decoders = std::make_shared<
        const std::vector<std::function<std::vector<double>(std::span<const std::uint64_t>)>>>(
        base.decoders);
    for (int m = 0; m < k; ++m) {
        rc.code.encoders.push_back([parts, m](std::span<const double> x) {
            return static_cast<std::uint64_t>((*parts)[static_cast<std::size_t>(m)].classify(x));
        });
        rc.code.decoders.push_back(
            [base_decoders, m, k, n](std::span<const std::uint64_t> idx) {
                for (int e = 0; e < k; ++e)
                    if (idx[static_cast<std::size_t>(e)] == 0) return std::vector<double>(n, 0.0);
                std::vector<std::uint64_t> shifted(static_cast<std::size_t>(k));
                for (int e = 0; e < k; ++e)
                    shifted[static_cast<std::size_t>(e)] = idx[static_cast<std::size_t>(e)] - 1;
                return (*base_decoders)[static_cast<std::size_t>(m)](shifted);
            });
    }
    return rc;
}

EventAEstimate estimate_event_A(const MultiterminalCode& base, const RobustCode& robust,
                                const SourceSpec& spec, int trials, std::uint64_t stream0) {
    if (trials < 10000) throw std::invalid_argument("estimate_event_A: need trials >= 10^4");
    if (spec.dim() != base.k) throw std::invalid_argument("estimate_event_A: dimension mismatch");
    const int k = base.k, n = base.n;
    std::int64_t hits = 0;
    std::vector<std::uint64_t> bi(static_cast<std::size_t>(k)), ri(static_cast<std::size_t>(k));
    for (int t = 0; t < trials; ++t) {
        SourceBlock block = sample_iid(spec, n, stream0 + static_cast<std::uint64_t>(t) * k);
        for (int m = 0; m < k; ++m) {
            bi[static_cast<std::size_t>(m)] = base.encoders[static_cast<std::size_t>(m)](block.row(m));
            ri[static_cast<std::size_t>(m)] =
                robust.code.encoders[static_cast<std::size_t>(m)](block.row(m));
        }
        bool differs = false;
        for (int m = 0; m < k && !differs; ++m) {
            const std::vector<double> g = base.decoders[static_cast<std::size_t>(m)](bi);
            const std::vector<double> gt = robust.code.decoders[static_cast<std::size_t>(m)](ri);
            if (g != gt) differs = true;
        }
        if (differs) ++hits;
    }
    EventAEstimate est;
    est.trials = trials;
    est.probability = static_cast<double>(hits) / trials;
    est.se = std::sqrt(std::max(0.0, est.probability * (1.0 - est.probability) / trials));
    est.union_bound = robust.event_a_bound;
    return est;
}

std::vector<BoundaryMassRow> boundary_mass_scan(const RectPartition& partition,
                                                const SourceSpec& spec, int component,
                                                std::span<const double> eta_list, int trials,
                                                std::uint64_t stream0) {
    if (eta_list.empty()) throw std::invalid_argument("boundary_mass_scan: empty eta list");
    for (std::size_t i = 0; i < eta_list.size(); ++i) {
        if (eta_list[i] < 0.0) throw std::invalid_argument("boundary_mass_scan: eta must be >= 0");
        if (i > 0 && eta_list[i] > eta_list[i - 1])
            throw std::invalid_argument("boundary_mass_scan: eta values must be descending");
    }
    if (trials < 1000) throw std::invalid_argument("boundary_mass_scan: need trials >= 1000");

    const int dim = partition.dim();
    std::vector<double> marg = sample_marginal(spec, component, static_cast<std::int64_t>(trials) * dim,
                                               stream0);
    std::vector<std::int64_t> counts(eta_list.size(), 0);
    for (int s = 0; s < trials; ++s) {
        std::span<const double> x(marg.data() + static_cast<std::size_t>(s) * dim,
                                  static_cast<std::size_t>(dim));
        const double d = partition.boundary_distance(x);
        for (std::size_t i = 0; i < eta_list.size(); ++i)
            if (d <= eta_list[i]) ++counts[i];
    }
    std::vector<BoundaryMassRow> rows;
    for (std::size_t i = 0; i < eta_list.size(); ++i) {
        const double p = static_cast<double>(counts[i]) / trials;
        rows.push_back({eta_list[i], p, std::sqrt(std::max(0.0, p * (1.0 - p) / trials))});
    }
    return rows;
}

}  // namespace dsc
