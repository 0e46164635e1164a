#include "rcabs/partition.hpp"

#include "rcabs/error.hpp"

#include <algorithm>
#include <cmath>

namespace rcabs {

namespace {

constexpr std::size_t kMaxCells = 50'000'000;

// Union of the lattice {k * step} inside [lo, hi] with the mandatory cuts.
// Lattice points within a relative 1e-9 of a mandatory cut are dropped so no
// sliver cells appear from rounding (e.g. 3 * 0.1 vs 0.3).
std::vector<double> cut_set(double lo, double hi, double step, std::vector<double> mandatory) {
    std::sort(mandatory.begin(), mandatory.end());
    mandatory.erase(std::unique(mandatory.begin(), mandatory.end()), mandatory.end());
    const double tol = 1e-9 * step;
    std::vector<double> cuts = mandatory;
    const auto first = static_cast<long long>(std::ceil(lo / step));
    const auto last = static_cast<long long>(std::floor(hi / step));
    if (last - first > static_cast<long long>(kMaxCells)) {
        throw ConfigError("grid size too small for the given domain");
    }
    for (long long k = first; k <= last; ++k) {
        const double c = static_cast<double>(k) * step;
        if (c <= lo || c >= hi) continue;
        const auto it = std::lower_bound(mandatory.begin(), mandatory.end(), c - tol);
        if (it != mandatory.end() && *it <= c + tol) continue;
        cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

} // namespace

Partition::Partition(const SystemSpec& spec, double eta) : workspace_(spec.workspace), eta_(eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be > 0");
    const std::size_t n = workspace_.dim();
    cuts_.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
        std::vector<double> mandatory{workspace_[d].lo, workspace_[d].hi};
        for (const auto& l : spec.labels) {
            if (!workspace_.contains(l.region)) {
                throw ConfigError("label region not contained in W");
            }
            mandatory.push_back(l.region[d].lo);
            mandatory.push_back(l.region[d].hi);
        }
        cuts_[d] = cut_set(workspace_[d].lo, workspace_[d].hi, eta, std::move(mandatory));
        for (std::size_t i = 1; i < cuts_[d].size(); ++i) {
            effective_eta_ = std::max(effective_eta_, cuts_[d][i] - cuts_[d][i - 1]);
        }
    }

    strides_.assign(n, 1);
    num_cells_ = 1;
    for (std::size_t d = n; d-- > 0;) {
        strides_[d] = num_cells_;
        num_cells_ *= cuts_[d].size() - 1;
        if (num_cells_ > kMaxCells) throw ConfigError("partition has too many cells");
    }

    labels_.resize(num_cells_ + 1);
    for (StateId id = 0; id < num_cells_; ++id) {
        const Box c = cell(id);
        const LabelRegion* owner = nullptr;
        for (const auto& l : spec.labels) {
            if (l.region.contains(c)) {
                if (owner != nullptr) throw ConfigError("label regions overlap");
                owner = &l;
            }
        }
        if (owner == nullptr) {
            throw ConfigError("cell " + std::to_string(id) + " is not inside a label region");
        }
        labels_[id] = owner->props;
        labels_[id].insert(kInsideProp);
    }
}

std::vector<std::size_t> Partition::coords(StateId id) const {
    std::vector<std::size_t> c(dim());
    for (std::size_t d = 0; d < dim(); ++d) {
        c[d] = id / strides_[d];
        id %= strides_[d];
    }
    return c;
}

StateId Partition::id(std::span<const std::size_t> c) const {
    StateId id = 0;
    for (std::size_t d = 0; d < dim(); ++d) id += c[d] * strides_[d];
    return id;
}

Box Partition::cell(StateId id) const {
    if (id >= num_cells_) throw Error("cell id out of range");
    const auto c = coords(id);
    std::vector<Interval> dims(dim());
    for (std::size_t d = 0; d < dim(); ++d) dims[d] = Interval(cuts_[d][c[d]], cuts_[d][c[d] + 1]);
    return Box(std::move(dims));
}

std::vector<double> Partition::center(StateId id) const { return cell(id).center(); }

std::vector<double> Partition::representative(StateId id) const {
    const auto c = coords(id);
    std::vector<double> r(dim());
    for (std::size_t d = 0; d < dim(); ++d) r[d] = cuts_[d][c[d]];
    return r;
}

StateId Partition::locate(std::span<const double> x) const {
    if (x.size() != dim()) return sink();
    StateId id = 0;
    for (std::size_t d = 0; d < dim(); ++d) {
        const auto& cuts = cuts_[d];
        const double v = x[d];
        if (!(v >= cuts.front() && v <= cuts.back())) return sink();
        auto seg = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) -
                                            cuts.begin()) - 1;
        seg = std::min(seg, cuts.size() - 2);
        id += seg * strides_[d];
    }
    return id;
}

ControlGrid::ControlGrid(const SystemSpec& spec, double rho_) : rho(rho_) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("rho must be > 0");
    const Box& u = spec.controls;
    std::vector<std::vector<double>> centers(u.dim());
    for (std::size_t d = 0; d < u.dim(); ++d) {
        if (u[d].is_point()) {
            centers[d] = {u[d].lo};
            continue;
        }
        const auto cuts = cut_set(u[d].lo, u[d].hi, rho, {u[d].lo, u[d].hi});
        for (std::size_t i = 1; i < cuts.size(); ++i) {
            centers[d].push_back(cuts[i - 1] + 0.5 * (cuts[i] - cuts[i - 1]));
            covering_radius_ = std::max(covering_radius_, 0.5 * (cuts[i] - cuts[i - 1]));
        }
    }
    std::size_t total = 1;
    for (const auto& c : centers) total *= c.size();
    if (total > 1'000'000) throw ConfigError("control grid too fine");
    actions.reserve(total);
    std::vector<std::size_t> idx(u.dim(), 0);
    for (std::size_t k = 0; k < total; ++k) {
        std::vector<double> a(u.dim());
        for (std::size_t d = 0; d < u.dim(); ++d) a[d] = centers[d][idx[d]];
        actions.push_back(std::move(a));
        for (std::size_t d = u.dim(); d-- > 0;) {
            if (++idx[d] < centers[d].size()) break;
            idx[d] = 0;
        }
    }
}

} // namespace rcabs
