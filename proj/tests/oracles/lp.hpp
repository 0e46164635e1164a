#pragma once

// Dense two-phase simplex with Bland's rule. Test-only reference solver:
// slow and simple on purpose.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

struct LpSolution {
    double value = 0.0;
    std::vector<double> x;
};

/// minimize c.x subject to A x = b, x >= 0. Returns nullopt when infeasible
/// or unbounded.
inline std::optional<LpSolution> lp_minimize(std::vector<std::vector<double>> A,
                                             std::vector<double> b, const std::vector<double>& c) {
    constexpr double eps = 1e-12;
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (b[i] < 0.0) {
            for (auto& v : A[i]) v = -v;
            b[i] = -b[i];
        }
    }
    // tableau: m rows of [A | I_art | b], columns 0..n-1 real, n..n+m-1 artificial
    const std::size_t cols = n + m;
    std::vector<std::vector<double>> t(m, std::vector<double>(cols + 1, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) t[i][j] = A[i][j];
        t[i][n + i] = 1.0;
        t[i][cols] = b[i];
        basis[i] = n + i;
    }

    const auto pivot = [&](std::size_t r, std::size_t col) {
        const double p = t[r][col];
        for (auto& v : t[r]) v /= p;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r || t[i][col] == 0.0) continue;
            const double f = t[i][col];
            for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
        }
        basis[r] = col;
    };

    // returns false when unbounded
    const auto run = [&](const std::vector<double>& cost, std::size_t allowed) {
        for (std::size_t guard = 0; guard < 100000; ++guard) {
            std::size_t enter = allowed;
            for (std::size_t j = 0; j < allowed; ++j) {
                double rc = cost[j];
                for (std::size_t i = 0; i < m; ++i) rc -= cost[basis[i]] * t[i][j];
                if (rc < -eps) {
                    enter = j;
                    break;
                }
            }
            if (enter == allowed) return true;
            std::size_t leave = m;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                if (t[i][enter] > eps) {
                    const double ratio = t[i][cols] / t[i][enter];
                    if (ratio < best - eps || (ratio <= best + eps && leave < m && basis[i] < basis[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == m) return false;
            pivot(leave, enter);
        }
        return false;
    };

    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = n; j < cols; ++j) phase1[j] = 1.0;
    run(phase1, cols);
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] >= n) infeas += t[i][cols];
    }
    if (infeas > 1e-9) return std::nullopt;
    // drive remaining artificials out of the basis
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(t[i][j]) > 1e-9) {
                pivot(i, j);
                break;
            }
        }
    }
    std::vector<double> phase2(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
    // artificials left in the basis sit on redundant rows at value 0
    if (!run(phase2, n)) return std::nullopt;

    LpSolution sol;
    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) sol.x[basis[i]] = t[i][cols];
    }
    for (std::size_t j = 0; j < n; ++j) sol.value += c[j] * sol.x[j];
    return sol;
}

/// Optimal transport between p (at points a) and q (at points b) with the
/// given ground cost.
template <typename Cost>
double transport_lp(const std::vector<double>& p, const std::vector<double>& q, Cost cost) {
    const std::size_t m = p.size();
    const std::size_t n = q.size();
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(m * n, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[i * n + j] = 1.0;
        A.push_back(std::move(row));
        b.push_back(p[i]);
    }
    // the last column constraint is implied by the others
    for (std::size_t j = 0; j + 1 < n; ++j) {
        std::vector<double> row(m * n, 0.0);
        for (std::size_t i = 0; i < m; ++i) row[i * n + j] = 1.0;
        A.push_back(std::move(row));
        b.push_back(q[j]);
    }
    std::vector<double> c(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] = cost(i, j);
    }
    const auto sol = lp_minimize(std::move(A), std::move(b), c);
    return sol ? sol->value : std::numeric_limits<double>::quiet_NaN();
}

} // namespace oracle
