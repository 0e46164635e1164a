#pragma once

#include "rcabs/partition.hpp"
#include "rcabs/property.hpp"
#include "rcabs/system.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rcabs {

/// Counter-based random stream: the k-th draw of stream (seed, index) is a
/// pure function of (seed, index, k), so trajectories are reproducible
/// independently of scheduling.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t index) noexcept;

    std::uint64_t next_u64() noexcept;
    /// Uniform in the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal via the inverse CDF.
    double normal();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Realization of the bounded perturbation xi.
struct XiMode {
    enum class Kind { Zero, Corner, UniformBall };
    Kind kind = Kind::Zero;
    /// Corner: bit i set means a negative sign on axis i.
    std::uint64_t corner = 0;

    /// "zero", "corner(<d>)" or "uniform-ball".
    static XiMode parse(std::string_view text);
    std::string to_string() const;
};

/// Concrete controller: u = action of policy[locate(x)].
class Controller {
public:
    Controller(const Partition& part, const ControlGrid& grid, std::vector<std::size_t> policy);
    /// Step-dependent policy: schedule[t][s]. Steps past the end reuse the
    /// last entry.
    Controller(const Partition& part, const ControlGrid& grid,
               std::vector<std::vector<std::size_t>> schedule);

    std::span<const double> operator()(std::span<const double> x, std::size_t t = 0) const;
    std::size_t cell_action(StateId s, std::size_t t = 0) const {
        return schedule_[std::min(t, schedule_.size() - 1)][s];
    }

private:
    const Partition* part_;
    const ControlGrid* grid_;
    std::vector<std::vector<std::size_t>> schedule_;
};

/// One step of x' = f(x, u) + b(x) w + theta1 xi.
std::vector<double> simulate_step(const SystemSpec& spec, std::span<const double> x,
                                  std::span<const double> u, RandomStream& rng, const XiMode& xi);

struct Trajectory {
    std::vector<std::vector<double>> states; // x_0 .. x_T
    std::vector<std::vector<double>> inputs; // u_0 .. u_{tau-1}
    std::size_t tau = 0;                     // first exit from W, T if none
    bool exited = false;
};

/// Runs T steps; after leaving W the state is frozen.
Trajectory run_trajectory(const SystemSpec& spec, const Partition& part, const Controller& ctrl,
                          std::span<const double> x0, std::size_t steps, RandomStream& rng,
                          const XiMode& xi);

/// Path semantics over the first `steps` + 1 states. Exiting W fails Safe and
/// ends Reach / ReachAvoid unsatisfied.
bool evaluate_property(const Trajectory& traj, const Partition& part, const PropertySpec& prop);

struct McOptions {
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    XiMode xi;
    /// Horizon used for unbounded properties.
    std::size_t unbounded_horizon = 0;
    std::size_t threads = 0; // 0: default_thread_count()
    /// Keep every trajectory (for CSV export).
    bool keep_trajectories = false;
};

struct McEstimate {
    std::size_t successes = 0;
    std::size_t samples = 0;
    double p_emp = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t seed = 0;
    std::size_t horizon = 0;
    bool truncation_warning = false;
    std::vector<Trajectory> trajectories;
    std::vector<char> outcomes;

    double half_width() const noexcept { return 0.5 * (ci_hi - ci_lo); }
};

/// Two-sided Wilson score interval at the given confidence.
Interval wilson_interval(std::size_t successes, std::size_t samples, double confidence = 0.99);

McEstimate monte_carlo(const SystemSpec& spec, const Partition& part, const Controller& ctrl,
                       std::span<const double> x0, const PropertySpec& prop,
                       const McOptions& options);

enum class Soundness { Pass, Fail, Inconclusive };
const char* to_string(Soundness s);

/// Below this width the abstraction interval is treated as a point when
/// deciding whether the confidence interval is too wide to conclude.
inline constexpr double kSoundnessResolution = 0.02;

/// Fail when p_emp lies outside [lo - d, hi + d] (d the Wilson half-width) or
/// the confidence interval misses [lo, hi]; inconclusive when the confidence
/// interval is wider than max(hi - lo, kSoundnessResolution); pass otherwise.
Soundness soundness_check(const McEstimate& est, const Interval& interval);

} // namespace rcabs
