#pragma once

#include "rcabs/error.hpp"
#include "rcabs/imdp.hpp"
#include "rcabs/property.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace rcabs {

enum class Extremum { Minimize, Maximize };

/// Order-based extreme point of the row polytope: every entry starts at lo,
/// the remaining budget is poured in value order (descending to maximize,
/// ascending to minimize, ties by ascending target). Output is aligned with
/// `row` and sums to 1. `values` is indexed by target state.
std::vector<double> extremal_distribution(std::span<const TransitionEntry> row,
                                          std::span<const double> values, Extremum mode);

/// Expected value of `values` under extremal_distribution.
double extremal_value(std::span<const TransitionEntry> row, std::span<const double> values,
                      Extremum mode);

struct SynthesisOptions {
    double tolerance = 1e-9;
    std::size_t max_iterations = 100'000;
    std::size_t threads = 0; // 0: default_thread_count()
};

/// Raised when value iteration stops at max_iterations.
class ConvergenceError : public Error {
public:
    ConvergenceError(std::size_t iterations, double residual);
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

struct SynthesisResult {
    PropertySpec property;
    std::vector<double> p_lo;        // per state, sink included (always 0)
    std::vector<double> p_hi;
    std::vector<std::size_t> policy; // per state; the sink maps to action 0
    /// Bounded horizons only: schedule[t][s] is the action at step t, and
    /// `policy` equals schedule[0]. Empty for unbounded properties.
    std::vector<std::vector<std::size_t>> schedule;
    std::size_t iterations = 0;
    double residual = 0.0;
    /// Sweeps after which the residual fell below 1e-6 (the horizon itself
    /// for bounded properties). Simulations of unbounded properties run this long.
    std::size_t horizon_hint = 0;
};

/// Robust (max over actions, min over the interval polytope) value iteration.
/// The extracted policy (stationary for unbounded properties, one decision
/// per step for bounded ones) is then evaluated under the minimizing and the
/// maximizing adversary to give [p_lo, p_hi].
SynthesisResult interval_value_iteration(const Imdp& imdp, const PropertySpec& prop,
                                         const SynthesisOptions& options = {});

/// Values of a fixed stationary policy under the given adversary.
std::vector<double> evaluate_policy(const Imdp& imdp, const PropertySpec& prop,
                                    std::span<const std::size_t> policy, Extremum adversary,
                                    const SynthesisOptions& options = {});

/// Values at step 0 of a step-dependent policy under the given adversary.
/// The schedule length must equal the property horizon.
std::vector<double> evaluate_schedule(const Imdp& imdp, const PropertySpec& prop,
                                      const std::vector<std::vector<std::size_t>>& schedule,
                                      Extremum adversary, const SynthesisOptions& options = {});

Interval satisfaction_interval(const SynthesisResult& result, std::size_t state);

} // namespace rcabs
