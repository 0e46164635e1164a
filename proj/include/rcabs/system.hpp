#pragma once

#include "rcabs/expr.hpp"
#include "rcabs/interval.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace rcabs {

using LabelSet = std::set<std::string, std::less<>>;

/// Proposition that holds on the whole working space and fails on the sink.
inline constexpr const char* kInsideProp = "in";

struct LabelRegion {
    Box region;
    LabelSet props;
};

/// Discrete-time controlled system
///   x' = f(x, u) + diag(b(x)) w + theta1 * xi,   w ~ N(0, I), |xi| <= 1
/// restricted to a bounded working space W; paths are stopped on exit.
struct SystemSpec {
    int n = 0;
    int p = 0;
    std::vector<Expr> drift;      // f, one expression per state dimension
    std::vector<Expr> diffusion;  // per-dimension standard deviation b_i(x)
    double theta1 = 0.0;
    std::optional<double> theta2;
    Box workspace;
    Box controls;
    double lipschitz_u = 1.0;
    std::vector<LabelRegion> labels;

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;

    /// Atomic propositions used by the labels plus the implicit "in".
    LabelSet propositions() const;

    std::vector<double> drift_at(std::span<const double> x, std::span<const double> u) const;
    std::vector<double> diffusion_at(std::span<const double> x) const;
};

} // namespace rcabs
