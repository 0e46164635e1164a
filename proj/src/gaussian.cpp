#include "rcabs/gaussian.hpp"

#include "rcabs/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rcabs {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double lower_tail(double t) noexcept { return 0.5 * std::erfc(t * kInvSqrt2); } // Phi(-t)

struct MassEstimate {
    double value;
    double error; // bound on the floating-point error of `value`
};

// Error of one CDF term Phi(z) evaluated as `tail`, where z = (x - m) / s was
// itself rounded.
double term_error(double x, double m, double s, double z, double tail) noexcept {
    if (!std::isfinite(z)) return 0.0;
    const double dz = 4.0 * kEps * (std::abs(z) + (std::abs(x) + std::abs(m)) / s);
    return kInvSqrt2Pi * std::exp(-0.5 * z * z) * dz + 4.0 * kEps * tail;
}

MassEstimate mass_with_error(double a, double b, double m, double s) noexcept {
    if (!(b > a)) return {0.0, 0.0};
    const double za = (a - m) / s;
    const double zb = (b - m) / s;
    double value = 0.0;
    double ta = 0.0;
    double tb = 0.0;
    if (za >= 0.0) {
        // both in the upper tail: Phi(-za) - Phi(-zb)
        ta = lower_tail(za);
        tb = lower_tail(zb);
        value = ta - tb;
    } else if (zb <= 0.0) {
        ta = lower_tail(-za);
        tb = lower_tail(-zb);
        value = tb - ta;
    } else {
        ta = lower_tail(-za);
        tb = lower_tail(zb);
        value = 1.0 - ta - tb;
    }
    value = std::clamp(value, 0.0, 1.0);
    const double err = term_error(a, m, s, za, ta) + term_error(b, m, s, zb, tb) +
                       4.0 * kEps * value + std::numeric_limits<double>::denorm_min();
    return {value, err};
}

} // namespace

double std_normal_cdf(double z) noexcept {
    if (std::isnan(z)) return z;
    if (z < 0.0) return lower_tail(-z);
    return 1.0 - lower_tail(z);
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw NumericError("normal quantile requires p in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

DiagGauss::DiagGauss(std::vector<double> m, std::vector<double> s)
    : mean(std::move(m)), stddev(std::move(s)) {
    if (mean.size() != stddev.size() || mean.empty()) throw Error("DiagGauss: dimension mismatch");
    for (double v : stddev) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Error("DiagGauss: stddev must be > 0");
    }
}

GaussSet::GaussSet(Box m, Box s) : means(std::move(m)), stddevs(std::move(s)) {
    if (means.dim() != stddevs.dim()) throw Error("GaussSet: dimension mismatch");
    for (const auto& d : stddevs.dims()) {
        if (!(d.lo > 0.0)) throw Error("GaussSet: stddev lower bound must be > 0");
    }
}

double interval_mass(double a, double b, double mean, double stddev) noexcept {
    return mass_with_error(a, b, mean, stddev).value;
}

double rect_mass(const DiagGauss& g, const Box& r) {
    if (r.dim() != g.dim()) throw Error("rect_mass: dimension mismatch");
    double p = 1.0;
    for (std::size_t i = 0; i < g.dim(); ++i) {
        p *= interval_mass(r[i].lo, r[i].hi, g.mean[i], g.stddev[i]);
    }
    return p;
}

Interval interval_mass_bounds(double a, double b, const Interval& m, const Interval& s) {
    if (!(b > a)) return Interval::point(0.0);
    if (std::isinf(a) && std::isinf(b)) return Interval::point(1.0);

    double m_near = 0.0;
    double m_far = 0.0;
    if (std::isinf(a)) {
        // mass of (-inf, b] decreases with the mean
        m_near = m.lo;
        m_far = m.hi;
    } else if (std::isinf(b)) {
        m_near = m.hi;
        m_far = m.lo;
    } else {
        const double c = a + 0.5 * (b - a);
        m_near = std::clamp(c, m.lo, m.hi);
        m_far = std::abs(m.lo - c) >= std::abs(m.hi - c) ? m.lo : m.hi;
    }

    double max_v = -1.0;
    double max_err = 0.0;
    const auto try_max = [&](double sd) {
        const auto e = mass_with_error(a, b, m_near, sd);
        if (e.value > max_v) {
            max_v = e.value;
            max_err = e.error;
        }
    };
    try_max(s.lo);
    try_max(s.hi);
    if (std::isfinite(a) && std::isfinite(b)) {
        // Mean outside [a, b]: mass is unimodal in s with a single critical
        // point s*^2 = (beta^2 - alpha^2) / (2 ln(beta / alpha)).
        const double alpha = a - m_near;
        const double beta = b - m_near;
        if ((alpha > 0.0 && beta > alpha) || (beta < 0.0 && alpha < beta)) {
            const double s2 = (beta * beta - alpha * alpha) / (2.0 * std::log(beta / alpha));
            const double s_star = std::sqrt(s2);
            if (s_star > s.lo && s_star < s.hi) try_max(s_star);
        }
    }

    const auto lo_e = mass_with_error(a, b, m_far, s.lo);
    const auto hi_e = mass_with_error(a, b, m_far, s.hi);
    const auto& min_e = lo_e.value <= hi_e.value ? lo_e : hi_e;

    return {std::max(0.0, min_e.value - min_e.error), std::min(1.0, max_v + max_err)};
}

Interval rect_mass_bounds(const GaussSet& g, const Box& r) {
    if (r.dim() != g.dim()) throw Error("rect_mass_bounds: dimension mismatch");
    double lo = 1.0;
    double hi = 1.0;
    for (std::size_t i = 0; i < g.dim(); ++i) {
        const Interval d = interval_mass_bounds(r[i].lo, r[i].hi, g.means[i], g.stddevs[i]);
        lo = rounding::mul_down(lo, d.lo);
        hi = rounding::mul_up(hi, d.hi);
    }
    return {lo, std::min(1.0, hi)};
}

Interval gauss_w1_bounds(const DiagGauss& g1, const DiagGauss& g2) {
    if (g1.dim() != g2.dim()) throw Error("gauss_w1_bounds: dimension mismatch");
    double dm2 = 0.0;
    double ds2 = 0.0;
    for (std::size_t i = 0; i < g1.dim(); ++i) {
        const double dm = g1.mean[i] - g2.mean[i];
        const double ds = g1.stddev[i] - g2.stddev[i];
        dm2 += dm * dm;
        ds2 += ds * ds;
    }
    return {std::sqrt(dm2), std::sqrt(dm2 + ds2)};
}

double discrete_w1(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw Error("discrete_w1: mismatched supports");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
    return 0.5 * acc;
}

RefRadius ws_radius(int n, double eta) {
    if (n < 1 || !(eta >= 0.0)) throw Error("ws_radius: invalid arguments");
    const double ws = (std::sqrt(2.0 * n) + 2.0) * eta;
    return {ws, 2.0 * ws};
}

} // namespace rcabs
