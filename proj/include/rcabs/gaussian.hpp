#pragma once

#include "rcabs/interval.hpp"

#include <span>
#include <vector>

namespace rcabs {

/// Standard normal CDF. Evaluated from the lower tail with erfc so that
/// Phi(-z) = 1 - Phi(z) holds by construction and the function is monotone.
double std_normal_cdf(double z) noexcept;

/// Inverse of the standard normal CDF on (0, 1).
double std_normal_quantile(double p);

/// N(m, diag(s^2)) with s > 0 componentwise.
struct DiagGauss {
    std::vector<double> mean;
    std::vector<double> stddev;

    DiagGauss(std::vector<double> mean, std::vector<double> stddev);
    std::size_t dim() const noexcept { return mean.size(); }
};

/// The set {N(m, diag(s^2)) : m in means, s in stddevs}.
struct GaussSet {
    Box means;
    Box stddevs;

    GaussSet(Box means, Box stddevs);
    std::size_t dim() const noexcept { return means.dim(); }
};

/// Mass that N(mean, stddev^2) puts on [a, b]; a, b may be infinite.
double interval_mass(double a, double b, double mean, double stddev) noexcept;

/// Mass of a diagonal Gaussian on an axis-aligned box.
double rect_mass(const DiagGauss& g, const Box& r);

/// [min, max] of rect_mass over all members of the set, padded outward by a
/// few ulps to cover the rounding of the CDF evaluations. Extremization is
/// exact per dimension (closed-form interior critical point in s).
Interval rect_mass_bounds(const GaussSet& g, const Box& r);

/// Per-dimension version of rect_mass_bounds for the interval [a, b].
Interval interval_mass_bounds(double a, double b, const Interval& means, const Interval& stddevs);

/// Lower / upper bounds on the Wasserstein-1 distance of two diagonal
/// Gaussians: |m1 - m2| <= W1 <= sqrt(|m1 - m2|^2 + |s1 - s2|^2).
Interval gauss_w1_bounds(const DiagGauss& g1, const DiagGauss& g2);

/// Wasserstein-1 distance under the discrete metric: half the L1 distance.
double discrete_w1(std::span<const double> p, std::span<const double> q);

struct RefRadius {
    double ws = 0.0;
    double tv = 0.0;
};

/// ws = (sqrt(2n) + 2) * eta, tv = 2 * ws.
RefRadius ws_radius(int n, double eta);

} // namespace rcabs
