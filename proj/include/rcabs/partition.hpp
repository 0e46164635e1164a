#pragma once

#include "rcabs/interval.hpp"
#include "rcabs/system.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace rcabs {

using StateId = std::size_t;

/// Rectangular partition of the working space plus the sink state.
///
/// Per axis, the cut set is the union of the eta-lattice {k * eta} inside W
/// and every label-region boundary, so each cell lies in exactly one label
/// region. Cells are lower-closed / upper-open, except that the upper faces
/// of W belong to the last cell. Cell ids are row-major (last axis fastest);
/// the sink has id num_cells().
class Partition {
public:
    Partition(const SystemSpec& spec, double eta);

    std::size_t dim() const noexcept { return cuts_.size(); }
    std::size_t num_cells() const noexcept { return num_cells_; }
    std::size_t num_states() const noexcept { return num_cells_ + 1; }
    StateId sink() const noexcept { return num_cells_; }
    double eta() const noexcept { return eta_; }
    double effective_eta() const noexcept { return effective_eta_; }
    const Box& workspace() const noexcept { return workspace_; }
    std::span<const double> cuts(std::size_t axis) const { return cuts_[axis]; }

    Box cell(StateId id) const;
    std::vector<double> center(StateId id) const;
    /// Lower corner of the cell (the representative q of x).
    std::vector<double> representative(StateId id) const;
    std::vector<std::size_t> coords(StateId id) const;
    StateId id(std::span<const std::size_t> coords) const;

    StateId locate(std::span<const double> x) const;

    /// Region labels plus "in" for cells; empty for the sink.
    const LabelSet& labels(StateId id) const { return labels_[id]; }

private:
    Box workspace_;
    double eta_;
    double effective_eta_ = 0.0;
    std::vector<std::vector<double>> cuts_;
    std::vector<std::size_t> strides_;
    std::size_t num_cells_ = 0;
    std::vector<LabelSet> labels_;
};

/// Finite action set: centers of a rho-grid over U.
struct ControlGrid {
    double rho = 0.0;
    std::vector<std::vector<double>> actions;

    ControlGrid(const SystemSpec& spec, double rho);

    std::size_t size() const noexcept { return actions.size(); }
    /// Max over U of the distance (inf-norm) to the closest action.
    double covering_radius() const noexcept { return covering_radius_; }

private:
    double covering_radius_ = 0.0;
};

} // namespace rcabs
