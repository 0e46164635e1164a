#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace rcabs {

// Closed interval [lo, hi] of doubles. Infinite endpoints are allowed so that
// unbounded target regions (the complement of the working space) can be
// expressed with the same type.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo, double hi); // throws Error if lo > hi or NaN
    static Interval point(double v) { return {v, v}; }
    static Interval whole();

    double width() const noexcept { return hi - lo; }
    double mid() const noexcept;
    bool contains(double v) const noexcept { return lo <= v && v <= hi; }
    bool contains(const Interval& o) const noexcept { return lo <= o.lo && o.hi <= hi; }
    bool is_point() const noexcept { return lo == hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box, one Interval per dimension.
class Box {
public:
    Box() = default;
    explicit Box(std::vector<Interval> dims);
    Box(std::initializer_list<Interval> dims);

    std::size_t dim() const noexcept { return dims_.size(); }
    const Interval& operator[](std::size_t i) const { return dims_[i]; }
    std::span<const Interval> dims() const noexcept { return dims_; }

    double volume() const noexcept;
    bool contains(std::span<const double> x) const noexcept;
    bool contains(const Box& other) const noexcept;
    std::vector<double> center() const;
    double max_width() const noexcept;

    /// Splits the box in half along dimension `axis`.
    std::pair<Box, Box> bisect(std::size_t axis) const;

    friend bool operator==(const Box&, const Box&) = default;

private:
    std::vector<Interval> dims_;
};

/// Volume of the intersection of two boxes of equal dimension.
double overlap_volume(const Box& a, const Box& b);

// Directed rounding of elementary operations without touching the FPU mode.
// Error-free transformations (TwoSum, FMA residuals) decide whether the
// round-to-nearest result has to be stepped by one ulp.
namespace rounding {
double add_down(double a, double b) noexcept;
double add_up(double a, double b) noexcept;
double mul_down(double a, double b) noexcept;
double mul_up(double a, double b) noexcept;
double div_down(double a, double b) noexcept;
double div_up(double a, double b) noexcept;
double down(double v, int ulps = 1) noexcept;
double up(double v, int ulps = 1) noexcept;
} // namespace rounding

// Natural interval extensions. All results are outward rounded, so the true
// image of the argument interval(s) is always enclosed.
Interval operator-(const Interval& a);
Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b); // NumericError if 0 ∈ b
Interval sin(const Interval& a);
Interval cos(const Interval& a);
Interval exp(const Interval& a);
Interval tanh(const Interval& a);
Interval abs(const Interval& a);
Interval pow(const Interval& a, int exponent);

} // namespace rcabs
