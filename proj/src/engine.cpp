#include "rcabs/engine.hpp"

#include "rcabs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

namespace rcabs {

ConvergenceError::ConvergenceError(std::size_t iterations, double residual)
    : Error("value iteration did not converge after " + std::to_string(iterations) +
            " sweeps (last residual " + format_double(residual) + ")"),
      residual_(residual) {}

std::vector<double> extremal_distribution(std::span<const TransitionEntry> row,
                                          std::span<const double> values, Extremum mode) {
    const std::size_t m = row.size();
    std::vector<double> p(m);
    double sum_lo = 0.0;
    double sum_hi = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        p[j] = row[j].lo;
        sum_lo += row[j].lo;
        sum_hi += row[j].hi;
    }
    if (m == 0 || sum_lo > 1.0 + kRowSumTolerance || sum_hi < 1.0 - kRowSumTolerance) {
        throw Error("extremal_distribution: infeasible row");
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const double vx = values[row[x].target];
        const double vy = values[row[y].target];
        return mode == Extremum::Maximize ? vx > vy : vx < vy;
    });
    double budget = 1.0 - sum_lo;
    std::size_t last = order.front();
    for (std::size_t j : order) {
        if (budget <= 0.0) break;
        const double add = std::min(row[j].hi - row[j].lo, budget);
        if (add <= 0.0) continue;
        p[j] = std::min(p[j] + add, row[j].hi);
        budget -= add;
        last = j;
    }
    // balance the last pour so the entries sum to 1
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (j != last) total += p[j];
    }
    p[last] = std::clamp(1.0 - total, row[last].lo, row[last].hi);
    return p;
}

double extremal_value(std::span<const TransitionEntry> row, std::span<const double> values,
                      Extremum mode) {
    const auto p = extremal_distribution(row, values, mode);
    double acc = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) acc += p[j] * values[row[j].target];
    return acc;
}

Interval satisfaction_interval(const SynthesisResult& result, std::size_t state) {
    if (state >= result.p_lo.size()) throw Error("state " + std::to_string(state) + " out of range");
    return {result.p_lo[state], std::max(result.p_lo[state], result.p_hi[state])};
}

namespace {

constexpr double kTieEps = 1e-14;
constexpr double kHintResidual = 1e-6;
constexpr std::size_t kParallelThreshold = 2048;

enum class Status : unsigned char { Free, One, Zero };

struct Problem {
    std::vector<Status> status;
    std::vector<std::size_t> free; // free states in ascending order
    double init = 0.0;             // initial value of free states
};

Problem classify(const Imdp& m, const PropertySpec& prop) {
    Problem pb;
    pb.status.assign(m.num_states, Status::Free);
    pb.init = prop.kind == PropertyKind::Safe ? 1.0 : 0.0;
    for (std::size_t s = 0; s < m.num_states; ++s) {
        Status st = Status::Free;
        if (s == m.sink()) {
            st = Status::Zero;
        } else if (prop.kind == PropertyKind::Safe) {
            if (!satisfies_all(m.labels[s], prop.props)) st = Status::Zero;
        } else if (satisfies_all(m.labels[s], prop.props)) {
            st = Status::One;
        } else if (prop.kind == PropertyKind::ReachAvoid && satisfies_all(m.labels[s], prop.avoid)) {
            st = Status::Zero;
        }
        pb.status[s] = st;
        if (st == Status::Free) pb.free.push_back(s);
    }
    return pb;
}

std::vector<double> initial_values(const Problem& pb) {
    std::vector<double> v(pb.status.size());
    for (std::size_t s = 0; s < v.size(); ++s) {
        switch (pb.status[s]) {
        case Status::One: v[s] = 1.0; break;
        case Status::Zero: v[s] = 0.0; break;
        case Status::Free: v[s] = pb.init; break;
        }
    }
    return v;
}

void for_states(const Problem& pb, std::size_t threads,
                const std::function<void(std::size_t)>& body) {
    if (pb.free.size() < kParallelThreshold || threads == 1) {
        for (std::size_t s : pb.free) body(s);
        return;
    }
    parallel_for(pb.free.size(), [&](std::size_t i) { body(pb.free[i]); }, threads);
}

double residual(const Problem& pb, const std::vector<double>& a, const std::vector<double>& b) {
    double r = 0.0;
    for (std::size_t s : pb.free) r = std::max(r, std::abs(a[s] - b[s]));
    return r;
}

// Iterates are monotone in exact arithmetic (up from 0, down from 1); this
// keeps rounding from breaking that.
double monotone_step(const Problem& pb, double value, double previous) {
    value = std::clamp(value, 0.0, 1.0);
    return pb.init == 0.0 ? std::max(value, previous) : std::min(value, previous);
}

std::size_t resolve_threads(const SynthesisOptions& o) {
    return o.threads == 0 ? default_thread_count() : o.threads;
}

} // namespace

std::vector<double> evaluate_policy(const Imdp& m, const PropertySpec& prop,
                                    std::span<const std::size_t> policy, Extremum adversary,
                                    const SynthesisOptions& options) {
    if (policy.size() < m.num_states - 1) throw Error("policy does not cover every state");
    const Problem pb = classify(m, prop);
    const std::size_t threads = resolve_threads(options);
    std::vector<double> v = initial_values(pb);
    std::vector<double> next = v;
    const auto sweep = [&] {
        for_states(pb, threads, [&](std::size_t s) {
            if (policy[s] >= m.num_actions) throw Error("policy action out of range");
            next[s] = monotone_step(pb, extremal_value(m.row(policy[s], s), v, adversary), v[s]);
        });
    };
    if (prop.horizon) {
        for (unsigned t = 0; t < *prop.horizon; ++t) {
            sweep();
            std::swap(v, next);
        }
        return v;
    }
    double r = 0.0;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        sweep();
        r = residual(pb, v, next);
        std::swap(v, next);
        if (r < options.tolerance) return v;
    }
    throw ConvergenceError(options.max_iterations, r);
}

std::vector<double> evaluate_schedule(const Imdp& m, const PropertySpec& prop,
                                      const std::vector<std::vector<std::size_t>>& schedule,
                                      Extremum adversary, const SynthesisOptions& options) {
    if (!prop.horizon) throw Error("schedules apply to bounded properties only");
    if (schedule.size() != *prop.horizon) throw Error("schedule length does not match the horizon");
    for (const auto& step : schedule) {
        if (step.size() < m.num_states - 1) throw Error("schedule does not cover every state");
    }
    const Problem pb = classify(m, prop);
    const std::size_t threads = resolve_threads(options);
    std::vector<double> v = initial_values(pb);
    std::vector<double> next = v;
    // backward in time: the last decision is applied first
    for (std::size_t t = schedule.size(); t-- > 0;) {
        const auto& step = schedule[t];
        for_states(pb, threads, [&](std::size_t s) {
            if (step[s] >= m.num_actions) throw Error("schedule action out of range");
            next[s] = std::clamp(extremal_value(m.row(step[s], s), v, adversary), 0.0, 1.0);
        });
        std::swap(v, next);
    }
    return v;
}

SynthesisResult interval_value_iteration(const Imdp& m, const PropertySpec& prop,
                                         const SynthesisOptions& options) {
    const Problem pb = classify(m, prop);
    const std::size_t threads = resolve_threads(options);
    SynthesisResult res;
    res.property = prop;
    res.policy.assign(m.num_states, 0);

    std::vector<double> v = initial_values(pb);
    std::vector<double> next = v;
    bool first = true;
    const auto sweep = [&] {
        for_states(pb, threads, [&](std::size_t s) {
            std::size_t best_a = 0;
            double best = -1.0;
            double current = -1.0;
            for (std::size_t a = 0; a < m.num_actions; ++a) {
                const double val = extremal_value(m.row(a, s), v, Extremum::Minimize);
                if (val > best) {
                    best = val;
                    best_a = a;
                }
                if (a == res.policy[s]) current = val;
            }
            // keep the current action unless another one is strictly better
            if (first || best > current + kTieEps) res.policy[s] = best_a;
            next[s] = monotone_step(pb, best, v[s]);
        });
        first = false;
    };

    bool hint_set = false;
    if (prop.horizon) {
        // sweep k decides the action taken k steps before the horizon
        const unsigned T = *prop.horizon;
        res.schedule.resize(T);
        for (unsigned k = 1; k <= T; ++k) {
            sweep();
            res.residual = residual(pb, v, next);
            std::swap(v, next);
            res.schedule[T - k] = res.policy;
        }
        res.iterations = T;
        res.horizon_hint = *prop.horizon;
    } else {
        double r = 0.0;
        std::size_t it = 0;
        for (;;) {
            if (it == options.max_iterations) throw ConvergenceError(it, r);
            sweep();
            r = residual(pb, v, next);
            std::swap(v, next);
            ++it;
            if (!hint_set && r < kHintResidual) {
                res.horizon_hint = it;
                hint_set = true;
            }
            if (r < options.tolerance) break;
        }
        res.iterations = it;
        res.residual = r;
    }

    if (prop.horizon && *prop.horizon > 0) {
        res.policy = res.schedule.front();
        res.p_lo = evaluate_schedule(m, prop, res.schedule, Extremum::Minimize, options);
        res.p_hi = evaluate_schedule(m, prop, res.schedule, Extremum::Maximize, options);
    } else {
        res.p_lo = evaluate_policy(m, prop, res.policy, Extremum::Minimize, options);
        res.p_hi = evaluate_policy(m, prop, res.policy, Extremum::Maximize, options);
    }
    for (std::size_t s = 0; s < m.num_states; ++s) res.p_hi[s] = std::max(res.p_hi[s], res.p_lo[s]);
    return res;
}

} // namespace rcabs
