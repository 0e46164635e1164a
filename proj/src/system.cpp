#include "rcabs/system.hpp"

#include "rcabs/error.hpp"

#include <cmath>
#include <vector>

namespace rcabs {

namespace {

// Bisects W until the natural extension of `e` is strictly positive on every
// piece; gives up (returns false) after `budget` boxes.
bool positive_on(const Expr& e, const Box& w, const Box& u, std::size_t budget) {
    std::vector<Box> stack{w};
    std::size_t visited = 0;
    while (!stack.empty()) {
        if (++visited > budget) return false;
        Box b = std::move(stack.back());
        stack.pop_back();
        Interval r;
        try {
            r = e.eval(b, u);
        } catch (const NumericError&) {
            r = Interval(-1.0, 1.0);
        }
        if (r.lo > 0.0) continue;
        if (r.hi <= 0.0) return false;
        std::size_t axis = 0;
        for (std::size_t i = 1; i < b.dim(); ++i) {
            if (b[i].width() > b[axis].width()) axis = i;
        }
        if (b[axis].width() < 1e-9) return false;
        auto [l, h] = b.bisect(axis);
        stack.push_back(std::move(l));
        stack.push_back(std::move(h));
    }
    return true;
}

bool finite_box(const Box& b) {
    for (const auto& d : b.dims()) {
        if (!std::isfinite(d.lo) || !std::isfinite(d.hi)) return false;
    }
    return true;
}

} // namespace

void SystemSpec::validate() const {
    if (n < 1 || p < 1) throw ConfigError("state and input dimensions must be >= 1");
    if (static_cast<int>(drift.size()) != n) throw ConfigError("f must have n expressions");
    if (static_cast<int>(diffusion.size()) != n) throw ConfigError("b must have n expressions");
    if (static_cast<int>(workspace.dim()) != n) throw ConfigError("W must have n intervals");
    if (static_cast<int>(controls.dim()) != p) throw ConfigError("U must have p intervals");
    if (!finite_box(workspace) || workspace.volume() <= 0.0) {
        throw ConfigError("W must be bounded with nonempty interior");
    }
    if (!finite_box(controls)) throw ConfigError("U must be bounded");
    if (!(theta1 >= 0.0) || !std::isfinite(theta1)) throw ConfigError("theta1 must be >= 0");
    if (theta2 && !(*theta2 > theta1)) throw ConfigError("theta2 must exceed theta1");
    if (!(lipschitz_u > 0.0) || !std::isfinite(lipschitz_u)) throw ConfigError("L_u must be > 0");

    for (int i = 0; i < n; ++i) {
        if (diffusion[static_cast<std::size_t>(i)].depends_on_input()) {
            throw ConfigError("b[" + std::to_string(i) + "] must not depend on inputs");
        }
        if (!positive_on(diffusion[static_cast<std::size_t>(i)], workspace, controls, 1u << 16)) {
            throw ConfigError("b[" + std::to_string(i) +
                              "] is not provably strictly positive on W");
        }
    }

    if (labels.empty()) throw ConfigError("at least one label region is required");
    double covered = 0.0;
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const Box& reg = labels[r].region;
        if (static_cast<int>(reg.dim()) != n) {
            throw ConfigError("label region " + std::to_string(r) + " has wrong dimension");
        }
        if (!workspace.contains(reg)) {
            throw ConfigError("label region " + std::to_string(r) + " is not contained in W");
        }
        if (reg.volume() <= 0.0) {
            throw ConfigError("label region " + std::to_string(r) + " has empty interior");
        }
        if (labels[r].props.contains(kInsideProp)) {
            throw ConfigError("proposition 'in' is implicit and must not be assigned");
        }
        for (std::size_t s = 0; s < r; ++s) {
            if (overlap_volume(reg, labels[s].region) > 0.0) {
                throw ConfigError("label regions " + std::to_string(s) + " and " +
                                  std::to_string(r) + " overlap");
            }
        }
        covered += reg.volume();
    }
    const double wv = workspace.volume();
    if (std::abs(covered - wv) > 1e-12 * wv) {
        throw ConfigError("label regions do not cover W");
    }
}

LabelSet SystemSpec::propositions() const {
    LabelSet ap{kInsideProp};
    for (const auto& l : labels) ap.insert(l.props.begin(), l.props.end());
    return ap;
}

std::vector<double> SystemSpec::drift_at(std::span<const double> x,
                                         std::span<const double> u) const {
    std::vector<double> r(drift.size());
    for (std::size_t i = 0; i < drift.size(); ++i) r[i] = drift[i].eval(x, u);
    return r;
}

std::vector<double> SystemSpec::diffusion_at(std::span<const double> x) const {
    std::vector<double> r(diffusion.size());
    const std::vector<double> no_input(static_cast<std::size_t>(p), 0.0);
    for (std::size_t i = 0; i < diffusion.size(); ++i) r[i] = diffusion[i].eval(x, no_input);
    return r;
}

} // namespace rcabs
