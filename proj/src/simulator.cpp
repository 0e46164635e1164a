#include "rcabs/simulator.hpp"

#include "rcabs/error.hpp"
#include "rcabs/gaussian.hpp"
#include "rcabs/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace rcabs {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t index) noexcept
    : key_(splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL))) {}

std::uint64_t RandomStream::next_u64() noexcept {
    return splitmix64(key_ ^ splitmix64(counter_++));
}

double RandomStream::uniform() noexcept {
    // 53 random bits centered in their bucket: never 0 or 1
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return std_normal_quantile(uniform()); }

XiMode XiMode::parse(std::string_view text) {
    XiMode m;
    if (text == "zero") return m;
    if (text == "uniform-ball") {
        m.kind = Kind::UniformBall;
        return m;
    }
    if (text.starts_with("corner(") && text.ends_with(")")) {
        const auto body = text.substr(7, text.size() - 8);
        const auto res = std::from_chars(body.data(), body.data() + body.size(), m.corner);
        if (res.ec == std::errc{} && res.ptr == body.data() + body.size()) {
            m.kind = Kind::Corner;
            return m;
        }
    }
    throw ConfigError("unknown xi mode '" + std::string(text) +
                      "' (expected zero, corner(<d>) or uniform-ball)");
}

std::string XiMode::to_string() const {
    switch (kind) {
    case Kind::Zero: return "zero";
    case Kind::Corner: return "corner(" + std::to_string(corner) + ")";
    case Kind::UniformBall: return "uniform-ball";
    }
    return "zero";
}

Controller::Controller(const Partition& part, const ControlGrid& grid,
                       std::vector<std::size_t> policy)
    : Controller(part, grid, std::vector<std::vector<std::size_t>>{std::move(policy)}) {}

Controller::Controller(const Partition& part, const ControlGrid& grid,
                       std::vector<std::vector<std::size_t>> schedule)
    : part_(&part), grid_(&grid), schedule_(std::move(schedule)) {
    if (schedule_.empty()) throw Error("empty policy schedule");
    for (auto& step : schedule_) {
        if (step.size() < part.num_cells()) throw Error("policy does not cover every cell");
        step.resize(part.num_states(), 0);
        for (std::size_t a : step) {
            if (a >= grid.size()) throw Error("policy action out of range");
        }
    }
}

std::span<const double> Controller::operator()(std::span<const double> x, std::size_t t) const {
    return grid_->actions[cell_action(part_->locate(x), t)];
}

std::vector<double> simulate_step(const SystemSpec& spec, std::span<const double> x,
                                  std::span<const double> u, RandomStream& rng, const XiMode& xi) {
    const std::size_t n = x.size();
    std::vector<double> next = spec.drift_at(x, u);
    const std::vector<double> b = spec.diffusion_at(x);
    for (std::size_t i = 0; i < n; ++i) next[i] += b[i] * rng.normal();
    if (spec.theta1 == 0.0 || xi.kind == XiMode::Kind::Zero) return next;

    std::vector<double> dir(n);
    if (xi.kind == XiMode::Kind::Corner) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const bool neg = i < 64 && ((xi.corner >> i) & 1U);
            dir[i] = neg ? -scale : scale;
        }
    } else {
        double norm = 0.0;
        for (auto& d : dir) {
            d = rng.normal();
            norm += d * d;
        }
        norm = std::sqrt(norm);
        const double r = rng.uniform();
        for (auto& d : dir) d *= r / norm;
    }
    for (std::size_t i = 0; i < n; ++i) next[i] += spec.theta1 * dir[i];
    return next;
}

Trajectory run_trajectory(const SystemSpec& spec, const Partition& part, const Controller& ctrl,
                          std::span<const double> x0, std::size_t steps, RandomStream& rng,
                          const XiMode& xi) {
    Trajectory tr;
    tr.states.reserve(steps + 1);
    tr.states.emplace_back(x0.begin(), x0.end());
    tr.tau = steps;
    for (std::size_t t = 0; t < steps; ++t) {
        const auto& x = tr.states.back();
        if (!part.workspace().contains(x)) {
            tr.tau = t;
            tr.exited = true;
            break;
        }
        const auto u = ctrl(x, t);
        tr.inputs.emplace_back(u.begin(), u.end());
        tr.states.push_back(simulate_step(spec, x, u, rng, xi));
    }
    if (!tr.exited && !part.workspace().contains(tr.states.back())) {
        tr.tau = tr.states.size() - 1;
        tr.exited = true;
    }
    while (tr.states.size() < steps + 1) tr.states.push_back(tr.states.back());
    return tr;
}

bool evaluate_property(const Trajectory& traj, const Partition& part, const PropertySpec& prop) {
    const std::size_t last = traj.states.size() - 1;
    const std::size_t h = prop.horizon ? std::min<std::size_t>(*prop.horizon, last) : last;
    for (std::size_t t = 0; t <= h; ++t) {
        const bool outside = traj.exited && t >= traj.tau;
        const LabelSet& labels = outside ? part.labels(part.sink())
                                         : part.labels(part.locate(traj.states[t]));
        switch (prop.kind) {
        case PropertyKind::Safe:
            if (outside || !satisfies_all(labels, prop.props)) return false;
            break;
        case PropertyKind::Reach:
            if (outside) return false;
            if (satisfies_all(labels, prop.props)) return true;
            break;
        case PropertyKind::ReachAvoid:
            if (outside) return false;
            if (satisfies_all(labels, prop.props)) return true;
            if (satisfies_all(labels, prop.avoid)) return false;
            break;
        }
    }
    return prop.kind == PropertyKind::Safe;
}

Interval wilson_interval(std::size_t successes, std::size_t samples, double confidence) {
    if (samples == 0) throw Error("wilson_interval: no samples");
    const double z = std_normal_quantile(0.5 + 0.5 * confidence);
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {std::clamp(std::min(center - half, p), 0.0, 1.0),
            std::clamp(std::max(center + half, p), 0.0, 1.0)};
}

McEstimate monte_carlo(const SystemSpec& spec, const Partition& part, const Controller& ctrl,
                       std::span<const double> x0, const PropertySpec& prop,
                       const McOptions& options) {
    if (options.samples == 0) throw ConfigError("number of samples must be >= 1");
    McEstimate est;
    est.samples = options.samples;
    est.seed = options.seed;
    est.horizon = prop.horizon ? *prop.horizon : options.unbounded_horizon;
    est.truncation_warning = !prop.horizon;
    est.outcomes.assign(options.samples, 0);
    if (options.keep_trajectories) est.trajectories.resize(options.samples);

    parallel_for(
        options.samples,
        [&](std::size_t i) {
            RandomStream rng(options.seed, i);
            Trajectory tr = run_trajectory(spec, part, ctrl, x0, est.horizon, rng, options.xi);
            est.outcomes[i] = evaluate_property(tr, part, prop) ? 1 : 0;
            if (options.keep_trajectories) est.trajectories[i] = std::move(tr);
        },
        options.threads == 0 ? default_thread_count() : options.threads);

    for (char c : est.outcomes) est.successes += static_cast<std::size_t>(c);
    est.p_emp = static_cast<double>(est.successes) / static_cast<double>(est.samples);
    const Interval ci = wilson_interval(est.successes, est.samples);
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    return est;
}

const char* to_string(Soundness s) {
    switch (s) {
    case Soundness::Pass: return "pass";
    case Soundness::Fail: return "fail";
    case Soundness::Inconclusive: return "inconclusive";
    }
    return "?";
}

Soundness soundness_check(const McEstimate& est, const Interval& interval) {
    const double d = est.half_width();
    if (est.p_emp < interval.lo - d || est.p_emp > interval.hi + d) return Soundness::Fail;
    if (est.ci_hi < interval.lo || est.ci_lo > interval.hi) return Soundness::Fail;
    if (est.ci_hi - est.ci_lo > std::max(interval.width(), kSoundnessResolution)) {
        return Soundness::Inconclusive;
    }
    return Soundness::Pass;
}

} // namespace rcabs
