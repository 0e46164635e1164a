#include "rcabs/abstraction.hpp"

#include "rcabs/error.hpp"
#include "rcabs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace rcabs {

RefinementError::RefinementError(double required, double achieved)
    : Error([&] {
          std::ostringstream os;
          os << "transition-set refinement did not terminate: required mean width k=" << required
             << ", achieved " << achieved;
          return os.str();
      }()),
      required_(required),
      achieved_(achieved) {}

namespace {

constexpr std::size_t kMaxLeaves = 1u << 20;
constexpr double kMinCellWidth = 1e-12;

std::size_t widest_axis(const Box& b) {
    std::size_t axis = 0;
    for (std::size_t i = 1; i < b.dim(); ++i) {
        if (b[i].width() > b[axis].width()) axis = i;
    }
    return axis;
}

} // namespace

std::vector<GaussSet> overapprox_transition_set(const SystemSpec& spec, const Box& cell,
                                                std::span<const double> action, double k) {
    if (!(k > 0.0)) throw ConfigError("k must be > 0");
    std::vector<Interval> udims;
    udims.reserve(action.size());
    for (double v : action) udims.push_back(Interval::point(v));
    const Box u(std::move(udims));

    std::vector<GaussSet> out;
    std::vector<Box> stack{cell};
    double worst = 0.0;
    while (!stack.empty()) {
        Box b = std::move(stack.back());
        stack.pop_back();
        std::vector<Interval> means(spec.drift.size());
        std::vector<Interval> stds(spec.diffusion.size());
        double width = 0.0;
        bool positive = true;
        bool numeric_ok = true;
        try {
            for (std::size_t i = 0; i < means.size(); ++i) {
                means[i] = spec.drift[i].eval(b, u);
                width = std::max(width, means[i].width());
                stds[i] = spec.diffusion[i].eval(b, u);
                positive = positive && stds[i].lo > 0.0;
            }
        } catch (const NumericError&) {
            numeric_ok = false;
        }
        if (numeric_ok && positive && width <= k) {
            out.emplace_back(Box(std::move(means)), Box(std::move(stds)));
            continue;
        }
        worst = std::max(worst, numeric_ok ? width : INFINITY);
        const std::size_t axis = widest_axis(b);
        if (b[axis].width() < kMinCellWidth || out.size() + stack.size() >= kMaxLeaves) {
            throw RefinementError(k, worst);
        }
        auto [lo, hi] = b.bisect(axis);
        // push the upper half first so the lower half is processed first
        stack.push_back(std::move(hi));
        stack.push_back(std::move(lo));
    }
    return out;
}

std::vector<GaussSet> overapprox_transition_set(const SystemSpec& spec, const Partition& part,
                                                StateId cell, std::span<const double> action,
                                                double k) {
    return overapprox_transition_set(spec, part.cell(cell), action, k);
}

namespace {

struct SetRow {
    std::vector<TransitionEntry> cells; // sorted by target, sink excluded
    Interval sink;
};

SetRow row_for_set(const Partition& part, const GaussSet& g) {
    const std::size_t n = part.dim();
    const Box& w = part.workspace();
    std::vector<std::vector<Interval>> seg(n);
    std::vector<std::size_t> first(n);
    std::vector<std::size_t> last(n);
    bool any = true;
    double outside = 0.0; // upper bound on the W-mass outside the active hull
    double w_lo = 1.0;
    double w_hi = 1.0;

    for (std::size_t d = 0; d < n; ++d) {
        const auto cuts = part.cuts(d);
        const std::size_t segs = cuts.size() - 1;
        seg[d].resize(segs);
        first[d] = segs;
        last[d] = 0;
        for (std::size_t s = 0; s < segs; ++s) {
            seg[d][s] = interval_mass_bounds(cuts[s], cuts[s + 1], g.means[d], g.stddevs[d]);
            if (seg[d][s].hi >= kSparseFloor) {
                first[d] = std::min(first[d], s);
                last[d] = s;
            }
        }
        const Interval wm = interval_mass_bounds(w[d].lo, w[d].hi, g.means[d], g.stddevs[d]);
        w_lo = rounding::mul_down(w_lo, wm.lo);
        w_hi = rounding::mul_up(w_hi, wm.hi);
        if (first[d] == segs) {
            any = false;
            continue;
        }
        outside = rounding::add_up(
            outside, interval_mass_bounds(cuts.front(), cuts[first[d]], g.means[d], g.stddevs[d]).hi);
        outside = rounding::add_up(
            outside, interval_mass_bounds(cuts[last[d] + 1], cuts.back(), g.means[d], g.stddevs[d]).hi);
    }

    SetRow row;
    double dropped = 0.0;
    if (any) {
        std::vector<std::size_t> idx(first);
        for (;;) {
            double lo = 1.0;
            double hi = 1.0;
            for (std::size_t d = 0; d < n; ++d) {
                lo = rounding::mul_down(lo, seg[d][idx[d]].lo);
                hi = rounding::mul_up(hi, seg[d][idx[d]].hi);
            }
            if (hi >= kSparseFloor) {
                row.cells.push_back({static_cast<std::uint32_t>(part.id(idx)), lo, std::min(hi, 1.0)});
            } else {
                dropped = rounding::add_up(dropped, hi);
            }
            std::size_t d = n;
            while (d-- > 0) {
                if (++idx[d] <= last[d]) break;
                idx[d] = first[d];
            }
            if (d == static_cast<std::size_t>(-1)) break;
        }
    } else {
        outside = std::min(1.0, w_hi);
    }

    const double sink_lo = std::max(0.0, rounding::add_down(1.0, -std::min(1.0, w_hi)));
    double sink_hi = rounding::add_up(1.0, -w_lo);
    sink_hi = rounding::add_up(sink_hi, rounding::add_up(dropped, outside));
    row.sink = Interval(std::min(sink_lo, 1.0), std::min(sink_hi, 1.0));
    return row;
}

} // namespace

std::vector<TransitionEntry> row_bounds(const Partition& part, std::span<const GaussSet> sets) {
    if (sets.empty()) throw Error("row_bounds: empty transition set");
    std::vector<TransitionEntry> merged;
    Interval sink;
    for (std::size_t s = 0; s < sets.size(); ++s) {
        SetRow r = row_for_set(part, sets[s]);
        if (s == 0) {
            merged = std::move(r.cells);
            sink = r.sink;
            continue;
        }
        sink = Interval(std::min(sink.lo, r.sink.lo), std::max(sink.hi, r.sink.hi));
        std::vector<TransitionEntry> out;
        out.reserve(merged.size() + r.cells.size());
        auto a = merged.begin();
        auto b = r.cells.begin();
        while (a != merged.end() || b != r.cells.end()) {
            if (b == r.cells.end() || (a != merged.end() && a->target < b->target)) {
                out.push_back({a->target, 0.0, a->hi});
                ++a;
            } else if (a == merged.end() || b->target < a->target) {
                out.push_back({b->target, 0.0, b->hi});
                ++b;
            } else {
                out.push_back({a->target, std::min(a->lo, b->lo), std::max(a->hi, b->hi)});
                ++a;
                ++b;
            }
        }
        merged = std::move(out);
    }
    merged.push_back({static_cast<std::uint32_t>(part.sink()), sink.lo, sink.hi});

    double sum_lo = 0.0;
    double sum_hi = 0.0;
    for (const auto& e : merged) {
        sum_lo += e.lo;
        sum_hi += e.hi;
    }
    if (sum_lo > 1.0 + kRowSumTolerance || sum_hi < 1.0 - kRowSumTolerance) {
        throw Error("internal error: infeasible interval row (sum lo = " + format_double(sum_lo) +
                    ", sum hi = " + format_double(sum_hi) + ")");
    }
    return merged;
}

std::vector<TransitionEntry> exact_row(const Partition& part, const DiagGauss& g) {
    const std::size_t n = part.dim();
    std::vector<std::vector<double>> seg(n);
    std::vector<std::size_t> first(n);
    std::vector<std::size_t> last(n);
    std::vector<TransitionEntry> row;
    bool any = true;
    for (std::size_t d = 0; d < n; ++d) {
        const auto cuts = part.cuts(d);
        const std::size_t segs = cuts.size() - 1;
        seg[d].resize(segs);
        first[d] = segs;
        last[d] = 0;
        for (std::size_t s = 0; s < segs; ++s) {
            seg[d][s] = interval_mass(cuts[s], cuts[s + 1], g.mean[d], g.stddev[d]);
            if (seg[d][s] >= kSparseFloor) {
                first[d] = std::min(first[d], s);
                last[d] = s;
            }
        }
        any = any && first[d] < segs;
    }
    double kept = 0.0;
    if (any) {
        std::vector<std::size_t> idx(first);
        for (;;) {
            double v = 1.0;
            for (std::size_t d = 0; d < n; ++d) v *= seg[d][idx[d]];
            if (v >= kSparseFloor) {
                row.push_back({static_cast<std::uint32_t>(part.id(idx)), v, v});
                kept += v;
            }
            std::size_t d = n;
            while (d-- > 0) {
                if (++idx[d] <= last[d]) break;
                idx[d] = first[d];
            }
            if (d == static_cast<std::size_t>(-1)) break;
        }
    }
    const double sink = std::clamp(1.0 - kept, 0.0, 1.0);
    row.push_back({static_cast<std::uint32_t>(part.sink()), sink, sink});
    return row;
}

long long lattice_floor(double v, double step) {
    const double q = v / step;
    const double r = std::nearbyint(q);
    if (std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q))) return static_cast<long long>(r);
    return static_cast<long long>(std::floor(q));
}

SnappedReference snap_reference(std::span<const double> mean, std::span<const double> variance,
                                double eta) {
    if (!(eta > 0.0)) throw Error("snap_reference: eta must be > 0");
    if (mean.size() != variance.size()) throw Error("snap_reference: dimension mismatch");
    SnappedReference r;
    const double eta2 = eta * eta;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        if (!(variance[i] > 0.0)) throw Error("snap_reference: variance must be > 0");
        r.mean.push_back(static_cast<double>(lattice_floor(mean[i], eta)) * eta);
        const long long vk = lattice_floor(variance[i], eta2);
        if (vk <= 0) {
            r.variance.push_back(variance[i]);
            r.variance_replaced = true;
        } else {
            r.variance.push_back(static_cast<double>(vk) * eta2);
        }
    }
    return r;
}

std::vector<ReferenceMeasure> reference_measures(const Partition& part,
                                                 std::span<const GaussSet> sets, double eta) {
    constexpr std::size_t kMaxRefs = 100'000;
    const double eta2 = eta * eta;
    const std::size_t n = part.dim();

    struct Choice {
        double mean;
        double variance;
        bool replaced;
        double deviation;
    };
    // keyed by (mean, variance) so overlapping boxes share references
    std::map<std::vector<double>, ReferenceMeasure> unique;
    for (const auto& g : sets) {
        std::vector<std::vector<Choice>> per_dim(n);
        std::size_t combos = 1;
        for (std::size_t d = 0; d < n; ++d) {
            const long long m0 = lattice_floor(g.means[d].lo, eta);
            const long long m1 = lattice_floor(g.means[d].hi, eta);
            const double s_lo = g.stddevs[d].lo;
            const double s_hi = g.stddevs[d].hi;
            const long long v0 = lattice_floor(s_lo * s_lo, eta2);
            const long long v1 = lattice_floor(s_hi * s_hi, eta2);
            for (long long mk = m0; mk <= m1; ++mk) {
                for (long long vk = std::max(v0, 0LL); vk <= v1; ++vk) {
                    const double mean = static_cast<double>(mk) * eta;
                    if (vk == 0) {
                        per_dim[d].push_back({mean, s_lo * s_lo, true, std::min(s_hi, eta) - s_lo});
                    } else {
                        per_dim[d].push_back({mean, static_cast<double>(vk) * eta2, false, 0.0});
                    }
                }
            }
            combos *= per_dim[d].size();
            if (combos > kMaxRefs) throw Error("too many reference measures for one transition set");
        }
        std::vector<std::size_t> idx(n, 0);
        for (std::size_t c = 0; c < combos; ++c) {
            ReferenceMeasure ref;
            for (std::size_t d = 0; d < n; ++d) {
                const Choice& ch = per_dim[d][idx[d]];
                ref.mean.push_back(ch.mean);
                ref.variance.push_back(ch.variance);
                ref.variance_replaced = ref.variance_replaced || ch.replaced;
                ref.variance_deviation = std::max(ref.variance_deviation, ch.deviation);
            }
            std::vector<double> key = ref.mean;
            key.insert(key.end(), ref.variance.begin(), ref.variance.end());
            auto [it, inserted] = unique.try_emplace(std::move(key), std::move(ref));
            if (!inserted) {
                it->second.variance_deviation =
                    std::max(it->second.variance_deviation, ref.variance_deviation);
            }
            for (std::size_t d = n; d-- > 0;) {
                if (++idx[d] < per_dim[d].size()) break;
                idx[d] = 0;
            }
        }
        if (unique.size() > kMaxRefs) throw Error("too many reference measures for one cell");
    }

    std::vector<ReferenceMeasure> out;
    out.reserve(unique.size());
    for (auto& [key, ref] : unique) {
        std::vector<double> sd(n);
        for (std::size_t d = 0; d < n; ++d) sd[d] = std::sqrt(ref.variance[d]);
        ref.row = exact_row(part, DiagGauss(ref.mean, sd));
        out.push_back(std::move(ref));
    }
    return out;
}

Abstraction build_imdp(const SystemSpec& spec, const Partition& part, const ControlGrid& grid,
                       double k, const BuildOptions& options) {
    const std::size_t cells = part.num_cells();
    const std::size_t acts = grid.size();
    std::vector<std::vector<TransitionEntry>> rows(cells * acts);
    std::vector<std::vector<ReferenceMeasure>> refs(options.record_references ? cells * acts : 0);

    parallel_for(
        cells * acts,
        [&](std::size_t task) {
            const std::size_t a = task / cells;
            const std::size_t i = task % cells;
            const auto sets = overapprox_transition_set(spec, part, i, grid.actions[a], k);
            rows[task] = row_bounds(part, sets);
            if (options.record_references) {
                refs[task] = reference_measures(part, sets, part.eta());
            }
        },
        options.threads == 0 ? default_thread_count() : options.threads);

    Abstraction out;
    Imdp& m = out.imdp;
    m.num_states = part.num_states();
    m.num_actions = acts;
    m.state_dim = static_cast<int>(part.dim());
    m.eta = part.effective_eta();
    m.rho = grid.rho;
    m.transitions.resize(acts);
    for (std::size_t a = 0; a < acts; ++a) {
        for (std::size_t i = 0; i < cells; ++i) m.transitions[a].append_row(rows[a * cells + i]);
    }
    m.labels.resize(part.num_states());
    for (StateId s = 0; s < part.num_states(); ++s) m.labels[s] = part.labels(s);

    out.refs.num_cells = cells;
    out.refs.num_actions = acts;
    out.refs.refs = std::move(refs);
    return out;
}

CompletenessCertificate check_certificate(int n, double lipschitz_u, double gap,
                                          const AbstractionParams& p) {
    CompletenessCertificate c;
    c.eta = p.eta;
    c.rho = p.rho;
    c.k = p.k;
    c.n = n;
    c.lipschitz_u = lipschitz_u;
    const RefRadius r = ws_radius(n, p.eta);
    c.ws = r.ws;
    c.tv = r.tv;
    c.lhs = 2.0 * p.eta + 0.5 * r.tv + lipschitz_u * p.rho + p.k;
    c.gap = gap;
    c.holds = c.lhs <= gap;
    return c;
}

CompletenessCertificate check_certificate(const SystemSpec& spec, const AbstractionParams& p) {
    if (!spec.theta2) throw ConfigError("no gap target (theta2) configured");
    return check_certificate(spec.n, spec.lipschitz_u, *spec.theta2 - spec.theta1, p);
}

AbstractionParams suggest_parameters(int n, double lipschitz_u, double gap) {
    if (!(gap > 0.0)) throw ConfigError("perturbation gap theta2 - theta1 must be > 0");
    const double budget = gap / 3.0;
    AbstractionParams p;
    p.eta = budget / (std::sqrt(2.0 * n) + 4.0);
    p.rho = budget / lipschitz_u;
    p.k = 0.99 * budget;
    return p;
}

AbstractionParams suggest_parameters(const SystemSpec& spec) {
    if (!spec.theta2) throw ConfigError("no gap target (theta2) configured");
    return suggest_parameters(spec.n, spec.lipschitz_u, *spec.theta2 - spec.theta1);
}

void write_refrecord(std::ostream& os, const RefRecord& rec, const std::string& manifest) {
    os << "refrecord " << rec.num_cells << ' ' << rec.num_actions << '\n';
    if (!manifest.empty()) os << "# manifest " << manifest << '\n';
    for (std::size_t a = 0; a < rec.num_actions; ++a) {
        for (std::size_t i = 0; i < rec.num_cells; ++i) {
            const auto& list = rec.at(a, i);
            for (std::size_t l = 0; l < list.size(); ++l) {
                const auto& r = list[l];
                os << "ref " << a << ' ' << i << ' ' << l << " mean";
                for (double v : r.mean) os << ' ' << format_double(v);
                os << " var";
                for (double v : r.variance) os << ' ' << format_double(v);
                os << " replaced " << (r.variance_replaced ? 1 : 0) << " dev "
                   << format_double(r.variance_deviation) << '\n';
                for (const auto& e : r.row) {
                    os << "r " << a << ' ' << i << ' ' << l << ' ' << e.target << ' '
                       << format_double(e.lo) << '\n';
                }
            }
        }
    }
}

} // namespace rcabs
