#include "rcabs/interval.hpp"

#include "rcabs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace rcabs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
        throw Error("invalid interval [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
}

Interval Interval::whole() { return {-kInf, kInf}; }

double Interval::mid() const noexcept {
    if (std::isinf(lo) || std::isinf(hi)) {
        if (std::isinf(lo) && std::isinf(hi)) return 0.0;
        return std::isinf(lo) ? hi : lo;
    }
    return lo + 0.5 * (hi - lo);
}

Box::Box(std::vector<Interval> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw Error("box must have at least one dimension");
}

Box::Box(std::initializer_list<Interval> dims) : Box(std::vector<Interval>(dims)) {}

double Box::volume() const noexcept {
    double v = 1.0;
    for (const auto& d : dims_) v *= d.width();
    return v;
}

bool Box::contains(std::span<const double> x) const noexcept {
    if (x.size() != dims_.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!dims_[i].contains(x[i])) return false;
    }
    return true;
}

bool Box::contains(const Box& other) const noexcept {
    if (other.dim() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (!dims_[i].contains(other[i])) return false;
    }
    return true;
}

std::vector<double> Box::center() const {
    std::vector<double> c(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) c[i] = dims_[i].mid();
    return c;
}

double Box::max_width() const noexcept {
    double w = 0.0;
    for (const auto& d : dims_) w = std::max(w, d.width());
    return w;
}

std::pair<Box, Box> Box::bisect(std::size_t axis) const {
    auto left = dims_;
    auto right = dims_;
    const double m = dims_[axis].mid();
    left[axis].hi = m;
    right[axis].lo = m;
    return {Box(std::move(left)), Box(std::move(right))};
}

double overlap_volume(const Box& a, const Box& b) {
    if (a.dim() != b.dim()) throw Error("overlap_volume: dimension mismatch");
    double v = 1.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double lo = std::max(a[i].lo, b[i].lo);
        const double hi = std::min(a[i].hi, b[i].hi);
        if (hi <= lo) return 0.0;
        v *= hi - lo;
    }
    return v;
}

namespace rounding {

namespace {
// Exact error of fl(a+b): a + b = s + e.
double two_sum_err(double a, double b, double s) noexcept {
    const double bb = s - a;
    return (a - (s - bb)) + (b - bb);
}
} // namespace

double down(double v, int ulps) noexcept {
    for (int i = 0; i < ulps; ++i) v = std::nextafter(v, -kInf);
    return v;
}

double up(double v, int ulps) noexcept {
    for (int i = 0; i < ulps; ++i) v = std::nextafter(v, kInf);
    return v;
}

double add_down(double a, double b) noexcept {
    const double s = a + b;
    if (!std::isfinite(s)) return s;
    return two_sum_err(a, b, s) < 0.0 ? down(s) : s;
}

double add_up(double a, double b) noexcept {
    const double s = a + b;
    if (!std::isfinite(s)) return s;
    return two_sum_err(a, b, s) > 0.0 ? up(s) : s;
}

double mul_down(double a, double b) noexcept {
    const double p = a * b;
    if (!std::isfinite(p)) return p;
    const double e = std::fma(a, b, -p);
    return e < 0.0 ? down(p) : p;
}

double mul_up(double a, double b) noexcept {
    const double p = a * b;
    if (!std::isfinite(p)) return p;
    const double e = std::fma(a, b, -p);
    return e > 0.0 ? up(p) : p;
}

namespace {
// Sign of the exact quotient error a/b - fl(a/b).
double div_err_sign(double a, double b, double q) noexcept {
    const double r = std::fma(-q, b, a);
    if (r == 0.0) return 0.0;
    return (r > 0.0) == (b > 0.0) ? 1.0 : -1.0;
}
} // namespace

double div_down(double a, double b) noexcept {
    const double q = a / b;
    if (!std::isfinite(q)) return q;
    return div_err_sign(a, b, q) < 0.0 ? down(q) : q;
}

double div_up(double a, double b) noexcept {
    const double q = a / b;
    if (!std::isfinite(q)) return q;
    return div_err_sign(a, b, q) > 0.0 ? up(q) : q;
}

} // namespace rounding

using namespace rounding;

Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

Interval operator+(const Interval& a, const Interval& b) {
    return {add_down(a.lo, b.lo), add_up(a.hi, b.hi)};
}

Interval operator-(const Interval& a, const Interval& b) {
    return {add_down(a.lo, -b.hi), add_up(a.hi, -b.lo)};
}

Interval operator*(const Interval& a, const Interval& b) {
    const double l = std::min({mul_down(a.lo, b.lo), mul_down(a.lo, b.hi), mul_down(a.hi, b.lo),
                               mul_down(a.hi, b.hi)});
    const double h = std::max({mul_up(a.lo, b.lo), mul_up(a.lo, b.hi), mul_up(a.hi, b.lo),
                               mul_up(a.hi, b.hi)});
    return {l, h};
}

Interval operator/(const Interval& a, const Interval& b) {
    if (b.lo <= 0.0 && b.hi >= 0.0) {
        throw NumericError("interval division by [" + std::to_string(b.lo) + ", " +
                           std::to_string(b.hi) + "] which contains zero");
    }
    const double l = std::min({div_down(a.lo, b.lo), div_down(a.lo, b.hi), div_down(a.hi, b.lo),
                               div_down(a.hi, b.hi)});
    const double h = std::max({div_up(a.lo, b.lo), div_up(a.lo, b.hi), div_up(a.hi, b.lo),
                               div_up(a.hi, b.hi)});
    return {l, h};
}

namespace {

// libm transcendental results are within one ulp; two ulps of widening
// absorbs that.
constexpr int kLibmUlps = 2;

// Whether phase + 2πk lies in [lo, hi] for some integer k. The search interval
// is slightly enlarged, which can only add extrema (conservative).
bool hits_phase(double lo, double hi, double phase) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    const double k = std::ceil((lo - slack - phase) / two_pi);
    return phase + two_pi * k <= hi + slack;
}

Interval periodic(const Interval& a, double (*fn)(double), double max_phase, double min_phase) {
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || a.width() >= 2.0 * std::numbers::pi) {
        return {-1.0, 1.0};
    }
    const double f_lo = fn(a.lo);
    const double f_hi = fn(a.hi);
    double l = down(std::min(f_lo, f_hi), kLibmUlps);
    double h = up(std::max(f_lo, f_hi), kLibmUlps);
    if (hits_phase(a.lo, a.hi, max_phase)) h = 1.0;
    if (hits_phase(a.lo, a.hi, min_phase)) l = -1.0;
    return {std::max(l, -1.0), std::min(h, 1.0)};
}

double sin_fn(double v) { return std::sin(v); }
double cos_fn(double v) { return std::cos(v); }

// x^n for x >= 0, n >= 1, rounded in the requested direction.
double pow_nonneg(double x, int n, bool upward) {
    double r = x;
    for (int i = 1; i < n; ++i) r = upward ? mul_up(r, x) : mul_down(r, x);
    return r;
}

} // namespace

Interval sin(const Interval& a) {
    return periodic(a, sin_fn, 0.5 * std::numbers::pi, -0.5 * std::numbers::pi);
}

Interval cos(const Interval& a) { return periodic(a, cos_fn, 0.0, std::numbers::pi); }

Interval exp(const Interval& a) {
    return {std::max(0.0, down(std::exp(a.lo), kLibmUlps)), up(std::exp(a.hi), kLibmUlps)};
}

Interval tanh(const Interval& a) {
    return {std::max(-1.0, down(std::tanh(a.lo), kLibmUlps)),
            std::min(1.0, up(std::tanh(a.hi), kLibmUlps))};
}

Interval abs(const Interval& a) {
    if (a.lo >= 0.0) return a;
    if (a.hi <= 0.0) return -a;
    return {0.0, std::max(-a.lo, a.hi)};
}

Interval pow(const Interval& a, int exponent) {
    if (exponent == 0) return Interval::point(1.0);
    if (exponent < 0) return Interval::point(1.0) / pow(a, -exponent);
    if (exponent == 1) return a;
    if (exponent % 2 == 1) {
        // odd powers are monotone increasing
        const auto signed_pow = [&](double x, bool upward) {
            return x >= 0.0 ? pow_nonneg(x, exponent, upward) : -pow_nonneg(-x, exponent, !upward);
        };
        return {signed_pow(a.lo, false), signed_pow(a.hi, true)};
    }
    if (a.lo >= 0.0) return {pow_nonneg(a.lo, exponent, false), pow_nonneg(a.hi, exponent, true)};
    if (a.hi <= 0.0) return {pow_nonneg(-a.hi, exponent, false), pow_nonneg(-a.lo, exponent, true)};
    return {0.0, pow_nonneg(std::max(-a.lo, a.hi), exponent, true)};
}

} // namespace rcabs
