#pragma once

// Exhaustive robust-reachability oracle for tiny interval MDPs: every vertex
// of every row polytope, every stationary policy, exact Markov chain solves.

#include "rcabs/imdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

using Dist = std::vector<double>; // dense over all states

/// Vertices of {lo <= p <= hi, sum p = 1}: each ordering of the entries gives
/// one greedy fill, and every vertex arises this way.
inline std::vector<Dist> row_vertices(std::span<const rcabs::TransitionEntry> row,
                                      std::size_t num_states) {
    std::vector<std::size_t> order(row.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double sum_lo = 0.0;
    for (const auto& e : row) sum_lo += e.lo;
    std::vector<Dist> out;
    do {
        Dist p(num_states, 0.0);
        for (const auto& e : row) p[e.target] = e.lo;
        double budget = 1.0 - sum_lo;
        for (std::size_t k : order) {
            const double add = std::min(row[k].hi - row[k].lo, std::max(budget, 0.0));
            p[row[k].target] += add;
            budget -= add;
        }
        bool dup = false;
        for (const auto& v : out) {
            double d = 0.0;
            for (std::size_t s = 0; s < num_states; ++s) d = std::max(d, std::abs(v[s] - p[s]));
            if (d < 1e-15) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(std::move(p));
    } while (std::next_permutation(order.begin(), order.end()));
    return out;
}

/// Probability of eventually reaching `target` in the Markov chain P
/// (rows for every state; absorbing rows for target / sink are ignored).
inline std::vector<double> reach_probability(const std::vector<Dist>& P,
                                             const std::vector<char>& target) {
    const std::size_t n = P.size();
    // states that can reach the target with positive probability
    std::vector<char> can(n, 0);
    for (std::size_t s = 0; s < n; ++s) can[s] = target[s];
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t s = 0; s < n; ++s) {
            if (can[s]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (P[s][j] > 0.0 && can[j]) {
                    can[s] = 1;
                    changed = true;
                    break;
                }
            }
        }
    }
    std::vector<std::size_t> free;
    for (std::size_t s = 0; s < n; ++s) {
        if (can[s] && !target[s]) free.push_back(s);
    }
    const std::size_t k = free.size();
    // (I - P_ff) x = P_ft 1, solved by Gaussian elimination with pivoting
    std::vector<std::vector<double>> M(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) M[a][b] = (a == b ? 1.0 : 0.0) - P[free[a]][free[b]];
        for (std::size_t j = 0; j < n; ++j) {
            if (target[j]) M[a][k] += P[free[a]][j];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r) {
            if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        }
        std::swap(M[c], M[piv]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c) continue;
            const double f = M[r][c] / M[c][c];
            for (std::size_t j = c; j <= k; ++j) M[r][j] -= f * M[c][j];
        }
    }
    std::vector<double> v(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        if (target[s]) v[s] = 1.0;
    }
    for (std::size_t a = 0; a < k; ++a) v[free[a]] = M[a][k] / M[a][a];
    return v;
}

struct RobustReach {
    std::vector<double> lo; // max over policies of min over adversaries
    std::vector<double> hi; // for the given policy: max over adversaries
};

/// Robust Reach(inf) values by enumeration. `policy` selects the policy whose
/// optimistic value is reported in `hi`.
inline RobustReach robust_reach(const rcabs::Imdp& m, const std::vector<char>& target,
                                const std::vector<std::size_t>& policy) {
    const std::size_t n = m.num_states;
    const std::size_t cells = n - 1;
    // vertices[a][s]
    std::vector<std::vector<std::vector<Dist>>> vertices(m.num_actions);
    for (std::size_t a = 0; a < m.num_actions; ++a) {
        for (std::size_t s = 0; s < cells; ++s) vertices[a].push_back(row_vertices(m.row(a, s), n));
    }
    Dist sink_row(n, 0.0);
    sink_row[n - 1] = 1.0;

    // min / max over joint vertex choices for a fixed policy
    const auto extreme = [&](const std::vector<std::size_t>& pol, bool maximize) {
        std::vector<double> best(n, maximize ? -1.0 : 2.0);
        std::vector<std::size_t> choice(cells, 0);
        std::vector<Dist> P(n, sink_row);
        for (;;) {
            for (std::size_t s = 0; s < cells; ++s) P[s] = vertices[pol[s]][s][choice[s]];
            const auto v = reach_probability(P, target);
            for (std::size_t s = 0; s < n; ++s) {
                best[s] = maximize ? std::max(best[s], v[s]) : std::min(best[s], v[s]);
            }
            std::size_t s = 0;
            for (; s < cells; ++s) {
                if (++choice[s] < vertices[pol[s]][s].size()) break;
                choice[s] = 0;
            }
            if (s == cells) break;
        }
        return best;
    };

    RobustReach out;
    out.lo.assign(n, -1.0);
    std::vector<std::size_t> pol(cells, 0);
    for (;;) {
        const auto v = extreme(pol, false);
        for (std::size_t s = 0; s < n; ++s) out.lo[s] = std::max(out.lo[s], v[s]);
        std::size_t s = 0;
        for (; s < cells; ++s) {
            if (++pol[s] < m.num_actions) break;
            pol[s] = 0;
        }
        if (s == cells) break;
    }
    out.hi = extreme(std::vector<std::size_t>(policy.begin(), policy.begin() + cells), true);
    return out;
}

/// Bounded Reach(T) by backward induction with vertex enumeration. `lo` is
/// the max over step-dependent policies of the min over adversaries; `hi` is
/// the max over adversaries for the given schedule (schedule[t][s]).
inline RobustReach robust_reach_bounded(const rcabs::Imdp& m, const std::vector<char>& target,
                                        const std::vector<std::vector<std::size_t>>& schedule) {
    const std::size_t n = m.num_states;
    const std::size_t cells = n - 1;
    std::vector<std::vector<std::vector<Dist>>> vertices(m.num_actions);
    for (std::size_t a = 0; a < m.num_actions; ++a) {
        for (std::size_t s = 0; s < cells; ++s) vertices[a].push_back(row_vertices(m.row(a, s), n));
    }
    const auto expect = [&](const Dist& p, const std::vector<double>& v) {
        double e = 0.0;
        for (std::size_t j = 0; j < n; ++j) e += p[j] * v[j];
        return e;
    };
    RobustReach out;
    out.lo.assign(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) out.lo[s] = target[s] ? 1.0 : 0.0;
    out.hi = out.lo;
    for (std::size_t t = schedule.size(); t-- > 0;) {
        auto lo = out.lo;
        auto hi = out.hi;
        for (std::size_t s = 0; s < cells; ++s) {
            if (target[s]) continue;
            double best = 0.0;
            for (std::size_t a = 0; a < m.num_actions; ++a) {
                double worst = 2.0;
                for (const auto& p : vertices[a][s]) worst = std::min(worst, expect(p, out.lo));
                best = std::max(best, worst);
            }
            lo[s] = best;
            double top = -1.0;
            for (const auto& p : vertices[schedule[t][s]][s]) top = std::max(top, expect(p, out.hi));
            hi[s] = top;
        }
        out.lo = lo;
        out.hi = hi;
    }
    return out;
}

} // namespace oracle
