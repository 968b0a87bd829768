#ifndef DSC_RECTANGLES_HPP
#define DSC_RECTANGLES_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "dsc/codecs.hpp"
#include "dsc/sources.hpp"

namespace dsc {

// Axis-aligned bounded rectangle in 1 or 2 dimensions (lo/hi[1] unused in 1-D).
struct Rectangle {
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{0.0, 0.0};
};

// An encoder's cells approximated by finite unions of disjoint bounded
// rectangles over a high-probability box. classify() returns cell ids 1..J on
// the rectangles and 0 (the erasure symbol) outside the box. Cell boundaries
// are finite unions of rectangle edges, hence Lebesgue-null.
class RectPartition {
  public:
    int dim() const { return dim_; }
    int cells() const { return cells_; }
    std::array<double, 2> box_lo() const { return box_lo_; }
    std::array<double, 2> box_hi() const { return box_hi_; }
    const std::vector<std::vector<Rectangle>>& cell_rectangles() const { return rects_; }
    std::size_t rectangle_count() const;

    // 0 = erasure (outside the box), else 1..J
    int classify(std::span<const double> x) const;

    // Euclidean distance from x to the nearest rectangle edge.
    double boundary_distance(std::span<const double> x) const;

    // audit results recorded by rectangularize
    const std::vector<double>& sym_diff_estimate() const { return sym_diff_; }
    const std::vector<double>& sym_diff_se() const { return sym_diff_se_; }

    // one rectangle per line: "cell_id xmin xmax [ymin ymax]"
    void save(std::ostream& out) const;
    static RectPartition load(std::istream& in);

    // direct construction (deserialization, tests)
    static RectPartition from_rectangles(int dim, int cells,
                                         std::vector<std::vector<Rectangle>> rects);

  private:
    friend RectPartition rectangularize(const std::function<int(std::span<const double>)>&, int,
                                        int, const SourceSpec&, int, double, int, std::int64_t,
                                        std::uint64_t);

    int dim_ = 1;
    int cells_ = 0;
    std::array<double, 2> box_lo_{0.0, 0.0}, box_hi_{0.0, 0.0};
    std::vector<std::vector<Rectangle>> rects_;  // rects_[j] holds cell j+1
    // uniform lookup grid (labels 1..J); classification is exact because the
    // rectangles are unions of grid cells
    int grid_res_ = 0;
    std::vector<std::int32_t> grid_;
    std::vector<double> sym_diff_, sym_diff_se_;
};

// Raised when the measured symmetric difference cannot be certified below the
// budget; carries the per-cell estimates so the caller can refine.
class budget_error : public std::runtime_error {
  public:
    budget_error(double delta, std::vector<double> per_cell, std::vector<double> per_cell_se)
        : std::runtime_error("rectangularize: symmetric-difference budget " +
                             std::to_string(delta) + " not met; refine the grid resolution"),
          delta(delta),
          per_cell(std::move(per_cell)),
          per_cell_se(std::move(per_cell_se)) {}

    double delta;
    std::vector<double> per_cell;
    std::vector<double> per_cell_se;
};

// Grid-approximates the cells of `encoder` (labels 0..cells-1 over R^dim,
// dim <= 2) on a box holding all but delta/4 of the mass of component
// `component`'s dim-fold marginal: every grid rectangle takes the label of
// its center, same-label neighbours are merged, and a Monte Carlo audit
// certifies Pr[x in B_j sym-diff Btilde_j] < delta per cell (estimate plus
// three standard errors), else budget_error.
RectPartition rectangularize(const std::function<int(std::span<const double>)>& encoder, int dim,
                             int cells, const SourceSpec& spec, int component, double delta,
                             int grid_resolution, std::int64_t audit_samples = 400000,
                             std::uint64_t stream0 = 0);

// The erasure-augmented code: encoder m reports partition.classify()
// (0 = erasure), the decoder returns the zero vector if any received index is
// 0 and defers to the base decoder otherwise. Index sizes are base + 1.
struct RobustCode {
    MultiterminalCode code;
    std::vector<RectPartition> partitions;
    double delta = 0.0;
    std::vector<double> m_constant;        // per encoder, from the Cauchy-Schwarz chain
    std::vector<double> inflation_bound;   // M*sqrt(delta)/n per encoder
    double event_a_bound = 0.0;            // delta * sum_m 2^{nR_m}
};

// Builds the robust code; epsilon_prime is the per-symbol distortion slack the
// M*sqrt(delta) budget must fit in (throws if M*sqrt(delta) > n*epsilon_prime).
RobustCode build_robust_code(const MultiterminalCode& base, const SourceSpec& spec, double delta,
                             double epsilon_prime, int grid_resolution,
                             std::int64_t audit_samples = 400000, std::uint64_t stream0 = 0);

// Monte Carlo frequency of the event that any decoder output differs between
// the base and robust codes, with its union bound delta * sum_m 2^{nR_m}.
struct EventAEstimate {
    double probability = 0.0;
    double se = 0.0;
    double union_bound = 0.0;
    int trials = 0;
};
EventAEstimate estimate_event_A(const MultiterminalCode& base, const RobustCode& robust,
                                const SourceSpec& spec, int trials, std::uint64_t stream0 = 0);

// Fraction of samples within eta of any cell boundary, for each eta
// (descending). eta = 0 reports the probability of landing exactly on a
// boundary, which is zero.
struct BoundaryMassRow {
    double eta;
    double fraction;
    double se;
};
std::vector<BoundaryMassRow> boundary_mass_scan(const RectPartition& partition,
                                                const SourceSpec& spec, int component,
                                                std::span<const double> eta_list, int trials,
                                                std::uint64_t stream0 = 0);

}  // namespace dsc

#endif
