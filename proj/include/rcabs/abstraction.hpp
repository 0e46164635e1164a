#pragma once

#include "rcabs/error.hpp"
#include "rcabs/gaussian.hpp"
#include "rcabs/imdp.hpp"
#include "rcabs/partition.hpp"
#include "rcabs/system.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rcabs {

/// Grid sizes for the state space (eta), the control set (rho) and the mean
/// precision of the transition-set over-approximation (k).
struct AbstractionParams {
    double eta = 0.0;
    double rho = 0.0;
    double k = 0.0;
};

/// Raised when the cell bisection cannot reach the requested mean precision.
class RefinementError : public Error {
public:
    RefinementError(double required, double achieved);
    double required() const noexcept { return required_; }
    double achieved() const noexcept { return achieved_; }

private:
    double required_;
    double achieved_;
};

/// Covers {N(f(x, a), diag(b(x)^2)) : x in cell} by boxes of Gaussians. The
/// cell is bisected along its widest axis until every mean box is at most k
/// wide (and the std box is strictly positive).
std::vector<GaussSet> overapprox_transition_set(const SystemSpec& spec, const Box& cell,
                                                std::span<const double> action, double k);
std::vector<GaussSet> overapprox_transition_set(const SystemSpec& spec, const Partition& part,
                                                StateId cell, std::span<const double> action,
                                                double k);

/// Entries whose upper bound falls below this are dropped from stored rows;
/// their mass is added to the sink's upper bound.
inline constexpr double kSparseFloor = 1e-12;

/// Interval row over the partition (sink last) for a union of Gaussian boxes.
/// Cell entries are [min, max] of the cell mass over all members; the sink
/// entry bounds the mass leaving W.
std::vector<TransitionEntry> row_bounds(const Partition& part, std::span<const GaussSet> sets);

/// Exact (sparse) discrete row of a single Gaussian; mass outside the stored
/// cells is lumped on the sink.
std::vector<TransitionEntry> exact_row(const Partition& part, const DiagGauss& g);

struct SnappedReference {
    std::vector<double> mean;     // eta * floor(m / eta)
    std::vector<double> variance; // eta^2 * floor(s^2 / eta^2), or s^2 if that is 0
    bool variance_replaced = false;
};

SnappedReference snap_reference(std::span<const double> mean, std::span<const double> variance,
                                double eta);

/// Index of the eta-lattice point at or below v. Values within a relative
/// 1e-9 of a lattice point snap to it.
long long lattice_floor(double v, double step);

struct ReferenceMeasure {
    std::vector<double> mean;
    std::vector<double> variance;
    bool variance_replaced = false;
    /// Extra std deviation tolerated by a replaced (sub-lattice) variance.
    double variance_deviation = 0.0;
    std::vector<TransitionEntry> row; // lo == hi, sink last
};

/// Snapped reference measures per (action, cell).
struct RefRecord {
    std::size_t num_cells = 0;
    std::size_t num_actions = 0;
    std::vector<std::vector<ReferenceMeasure>> refs; // index action * num_cells + cell

    const std::vector<ReferenceMeasure>& at(std::size_t action, std::size_t cell) const {
        return refs[action * num_cells + cell];
    }
};

/// Reference measures covering every member of the given Gaussian boxes.
std::vector<ReferenceMeasure> reference_measures(const Partition& part,
                                                 std::span<const GaussSet> sets, double eta);

struct BuildOptions {
    bool record_references = true;
    std::size_t threads = 0; // 0: default_thread_count()
};

struct Abstraction {
    Imdp imdp;
    RefRecord refs;
};

/// Builds the interval MDP (and reference record) for every (cell, action).
/// Output is identical for any thread count.
Abstraction build_imdp(const SystemSpec& spec, const Partition& part, const ControlGrid& grid,
                       double k, const BuildOptions& options = {});

/// Robust-completeness inequality 2 eta + tv/2 + L_u rho + k <= theta2 - theta1.
struct CompletenessCertificate {
    double eta = 0.0;
    double rho = 0.0;
    double k = 0.0;
    int n = 0;
    double lipschitz_u = 0.0;
    double ws = 0.0;
    double tv = 0.0;
    double lhs = 0.0;
    double gap = 0.0;
    bool holds = false;
};

CompletenessCertificate check_certificate(int n, double lipschitz_u, double gap,
                                          const AbstractionParams& params);
/// Throws ConfigError when the system has no theta2.
CompletenessCertificate check_certificate(const SystemSpec& spec, const AbstractionParams& params);

/// Splits the gap in three equal budgets (state grid, control grid, mean
/// precision) with a 1% margin on k.
AbstractionParams suggest_parameters(const SystemSpec& spec);
AbstractionParams suggest_parameters(int n, double lipschitz_u, double gap);

void write_refrecord(std::ostream& os, const RefRecord& rec, const std::string& manifest);

} // namespace rcabs
