#pragma once

// High-precision references for the normal distribution (test-only).

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

inline double normal_cdf(double z) {
    const Big x = Big(z) / boost::multiprecision::sqrt(Big(2));
    return static_cast<double>(boost::math::erfc(-x) / 2);
}

inline double normal_mass(double a, double b, double m, double s) {
    const Big r2 = boost::multiprecision::sqrt(Big(2));
    const Big za = (Big(a) - Big(m)) / (Big(s) * r2);
    const Big zb = (Big(b) - Big(m)) / (Big(s) * r2);
    return static_cast<double>((boost::math::erf(zb) - boost::math::erf(za)) / 2);
}

/// Double-precision variant from std::erfc, for checks with 1e-9 slack.
inline double normal_mass_fast(double a, double b, double m, double s) {
    const double r = s * std::sqrt(2.0);
    const double za = (a - m) / r;
    const double zb = (b - m) / r;
    if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
    if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
    return 1.0 - 0.5 * (std::erfc(-za) + std::erfc(zb));
}

/// W1 of two 1-D Gaussians as the integral of |F1^-1(t) - F2^-1(t)| over (0, 1).
inline double quantile_w1(double m1, double s1, double m2, double s2) {
    const boost::math::normal_distribution<double> std_normal;
    const auto f = [&](double t) {
        // the quadrature may probe the endpoints themselves
        t = std::clamp(t, 1e-300, 1.0 - 1e-16);
        const double z = boost::math::quantile(std_normal, t);
        return std::abs((m1 - m2) + (s1 - s2) * z);
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    if (s1 == s2) return integrator.integrate(f, 0.0, 1.0);
    // split at the crossing of the two quantile functions
    const double t_star = boost::math::cdf(std_normal, (m2 - m1) / (s1 - s2));
    if (!(t_star > 1e-300 && t_star < 1.0 - 1e-16)) return integrator.integrate(f, 0.0, 1.0);
    return integrator.integrate(f, 0.0, t_star) + integrator.integrate(f, t_star, 1.0);
}

} // namespace oracle
