#include "rcabs/engine.hpp"
#include "rcabs/error.hpp"

#include "oracles/lp.hpp"
#include "oracles/random_imdp.hpp"
#include "oracles/vertex.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rcabs;

namespace {

// cells with the given labels (plus "in") and one action per row list
Imdp toy(std::vector<LabelSet> cell_labels, std::vector<std::vector<std::vector<TransitionEntry>>> rows) {
    Imdp m;
    m.num_states = cell_labels.size() + 1;
    m.num_actions = rows.size();
    m.state_dim = 1;
    m.eta = 1.0;
    m.rho = 1.0;
    for (auto& l : cell_labels) {
        l.insert("in");
        m.labels.push_back(l);
    }
    m.labels.push_back({});
    for (const auto& action : rows) {
        IntervalMatrix mat;
        for (const auto& r : action) mat.append_row(r);
        m.transitions.push_back(mat);
    }
    return m;
}

std::vector<char> goal_mask(const Imdp& m) {
    std::vector<char> t(m.num_states, 0);
    for (std::size_t s = 0; s < m.num_states; ++s) t[s] = m.labels[s].contains("goal");
    return t;
}

// plain value iteration on the point MDP given by the lower bounds
std::vector<double> mdp_value(const Imdp& m, const std::vector<char>& target, const std::vector<char>& avoid,
                              std::size_t horizon, bool unbounded) {
    std::vector<double> v(m.num_states, 0.0);
    for (std::size_t s = 0; s < m.num_states; ++s) v[s] = target[s] ? 1.0 : 0.0;
    for (std::size_t it = 0; unbounded ? it < 200000 : it < horizon; ++it) {
        std::vector<double> next = v;
        double diff = 0.0;
        for (std::size_t s = 0; s + 1 < m.num_states; ++s) {
            if (target[s] || avoid[s]) continue;
            double best = 0.0;
            for (std::size_t a = 0; a < m.num_actions; ++a) {
                double e = 0.0;
                for (const auto& t : m.row(a, s)) e += t.lo * v[t.target];
                best = std::max(best, e);
            }
            next[s] = best;
            diff = std::max(diff, std::abs(best - v[s]));
        }
        v = next;
        if (unbounded && diff < 1e-15) break;
    }
    return v;
}

} // namespace

TEST_CASE("validate diagnostics") {
    const auto ok = toy({{}}, {{{{0, 0.5, 0.5}, {1, 0.5, 0.5}}}});
    CHECK(validate(ok).ok());

    const auto low = toy({{}}, {{{{0, 0.4, 0.5}, {1, 0.3, 0.4}}}});
    const auto d = validate(low);
    REQUIRE(d.total == 1);
    CHECK(d.violations[0] == "Σhi < 1 at (0,0)");

    const auto flipped = toy({{}}, {{{{0, 0.6, 0.5}, {1, 0.5, 0.5}}}});
    CHECK_FALSE(validate(flipped).ok());
    CHECK(validate(flipped).violations[0].find("invalid bounds") != std::string::npos);

    auto unlabeled = ok;
    unlabeled.labels[0].clear();
    CHECK_FALSE(validate(unlabeled).ok());

    // many broken rows: the report is capped
    std::vector<std::vector<TransitionEntry>> rows(150, {{0, 0.1, 0.2}});
    const auto many = toy(std::vector<LabelSet>(150), {rows});
    CHECK(validate(many).total == 150);
    CHECK(validate(many).violations.size() == Diagnostics::kMaxViolations);
}

TEST_CASE("extremal distribution example") {
    const std::vector<TransitionEntry> row{{0, 0.1, 0.5}, {1, 0.2, 0.6}, {2, 0.1, 0.4}};
    const std::vector<double> v{1, 0, 0};
    const auto p = extremal_distribution(row, v, Extremum::Maximize);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.4));
    CHECK(p[2] == doctest::Approx(0.1));
    CHECK(extremal_value(row, v, Extremum::Maximize) == doctest::Approx(0.5));
    CHECK(extremal_value(row, v, Extremum::Minimize) == doctest::Approx(0.1));

    // constant values: ties go to the lowest target first
    const std::vector<double> c{0.3, 0.3, 0.3};
    const auto t = extremal_distribution(row, c, Extremum::Minimize);
    CHECK(t[0] == doctest::Approx(0.5));
    CHECK(t[1] == doctest::Approx(0.4));
    CHECK(t[2] == doctest::Approx(0.1));
    CHECK(extremal_value(row, c, Extremum::Maximize) == doctest::Approx(0.3));

    const std::vector<TransitionEntry> point{{0, 0.25, 0.25}, {1, 0.75, 0.75}};
    for (auto mode : {Extremum::Minimize, Extremum::Maximize}) {
        const auto q = extremal_distribution(point, v, mode);
        CHECK(q[0] == 0.25);
        CHECK(q[1] == 0.75);
    }

    const std::vector<TransitionEntry> bad{{0, 0.1, 0.2}, {1, 0.1, 0.2}};
    CHECK_THROWS_AS(extremal_distribution(bad, v, Extremum::Maximize), Error);
}

TEST_CASE("extremal distribution solves the row LP") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 2 + trial % 4;
        std::vector<TransitionEntry> row;
        std::vector<double> point(k);
        double total = 0.0;
        for (auto& x : point) total += (x = U(rng));
        for (std::size_t j = 0; j < k; ++j) {
            const double p = point[j] / total;
            row.push_back({static_cast<std::uint32_t>(j), std::max(0.0, p - 0.3 * U(rng)),
                           std::min(1.0, p + 0.3 * U(rng))});
        }
        std::vector<double> v(k);
        for (auto& x : v) x = U(rng) < 0.2 ? 0.5 : U(rng);
        for (auto mode : {Extremum::Minimize, Extremum::Maximize}) {
            const auto p = extremal_distribution(row, v, mode);
            double sum = 0.0;
            double value = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                REQUIRE(p[j] >= row[j].lo);
                REQUIRE(p[j] <= row[j].hi);
                sum += p[j];
                value += p[j] * v[j];
            }
            REQUIRE(std::abs(sum - 1.0) <= 1e-12);
            // p = lo + y, 0 <= y <= hi - lo, sum y = 1 - sum lo, with slacks
            std::vector<std::vector<double>> A;
            std::vector<double> b;
            std::vector<double> c(2 * k, 0.0);
            std::vector<double> all(2 * k, 0.0);
            double sum_lo = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                std::vector<double> r(2 * k, 0.0);
                r[j] = 1.0;
                r[k + j] = 1.0;
                A.push_back(r);
                b.push_back(row[j].hi - row[j].lo);
                all[j] = 1.0;
                c[j] = mode == Extremum::Minimize ? v[j] : -v[j];
                sum_lo += row[j].lo;
            }
            A.push_back(all);
            b.push_back(1.0 - sum_lo);
            const auto lp = oracle::lp_minimize(A, b, c);
            REQUIRE(lp.has_value());
            double lo_value = 0.0;
            for (std::size_t j = 0; j < k; ++j) lo_value += row[j].lo * v[j];
            const double best = lo_value + (mode == Extremum::Minimize ? lp->value : -lp->value);
            REQUIRE(value == doctest::Approx(best).epsilon(1e-10).scale(1));
        }
    }
}

TEST_CASE("absorbing certainty") {
    const auto m = toy({{}, {"goal"}}, {{{{1, 1, 1}}, {{1, 1, 1}}}});
    const auto r = interval_value_iteration(m, PropertySpec::parse("REACH(goal, inf)"));
    CHECK(r.p_lo[0] == 1.0);
    CHECK(r.p_hi[0] == 1.0);
    CHECK(r.p_lo[1] == 1.0);
    CHECK(r.p_lo[2] == 0.0);
    const auto iv = satisfaction_interval(r, 0);
    CHECK(iv.lo == 1.0);
    CHECK(iv.hi == 1.0);
    CHECK(verdict(iv, {Comparison::GreaterEqual, 0.99}) == Verdict::Yes);
}

TEST_CASE("horizon zero is the target indicator") {
    const auto m = toy({{}, {}, {"goal"}},
                       {{{{1, 0.2, 0.6}, {2, 0.4, 0.8}}, {{2, 0.5, 1}, {3, 0, 0.5}}, {{2, 1, 1}}}});
    const auto r = interval_value_iteration(m, PropertySpec::parse("REACH(goal, 0)"));
    CHECK(r.p_lo == std::vector<double>{0, 0, 1, 0});
    CHECK(r.p_hi == std::vector<double>{0, 0, 1, 0});
    CHECK(r.iterations == 0);
    const auto one = interval_value_iteration(m, PropertySpec::parse("REACH(goal, 1)"));
    CHECK(one.p_lo[0] == doctest::Approx(0.4));
    CHECK(one.p_hi[0] == doctest::Approx(0.8));
    CHECK(one.p_lo[1] == doctest::Approx(0.5));
    CHECK(one.p_hi[1] == doctest::Approx(1.0));
}

TEST_CASE("safety and reach-avoid semantics") {
    // 0 -> {0 stays, 1}, 1 bad and goal both, 2 goal
    const auto m = toy({{}, {"bad", "goal"}, {"goal"}},
                       {{{{0, 0.5, 0.5}, {1, 0.5, 0.5}}, {{1, 1, 1}}, {{2, 0.9, 0.9}, {3, 0.1, 0.1}}},
                        {{{2, 0.7, 0.7}, {3, 0.3, 0.3}}, {{1, 1, 1}}, {{2, 0.9, 0.9}, {3, 0.1, 0.1}}}});
    const auto safe = interval_value_iteration(m, PropertySpec::parse("SAFE(in, 2)"));
    CHECK(safe.p_lo[0] == doctest::Approx(1.0));
    CHECK(safe.p_lo[2] == doctest::Approx(0.81));
    CHECK(safe.p_lo[3] == 0.0);
    // a state labelled both target and avoid counts as reached
    const auto ra = interval_value_iteration(m, PropertySpec::parse("REACH_AVOID(goal, bad, inf)"));
    CHECK(ra.p_lo[1] == 1.0);
    CHECK(ra.p_lo[0] == doctest::Approx(1.0));
    CHECK(ra.policy[0] == 0);
    const auto avoid_only = interval_value_iteration(m, PropertySpec::parse("REACH_AVOID(in, bad, inf)"));
    CHECK(avoid_only.p_lo[1] == 1.0);
}

TEST_CASE("convergence failure is reported") {
    const auto m = toy({{}, {"goal"}}, {{{{0, 0.999, 0.999}, {1, 0.001, 0.001}}, {{1, 1, 1}}}});
    SynthesisOptions opt;
    opt.max_iterations = 10;
    try {
        interval_value_iteration(m, PropertySpec::parse("REACH(goal, inf)"), opt);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > 0.0);
    }
    const auto r = interval_value_iteration(m, PropertySpec::parse("REACH(goal, inf)"));
    CHECK(r.p_lo[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.horizon_hint > 10);
}

TEST_CASE("robust values match vertex enumeration") {
    std::mt19937_64 rng(12);
    const auto prop = PropertySpec::parse("REACH(goal, inf)");
    SynthesisOptions opt;
    opt.tolerance = 1e-13;
    opt.max_iterations = 1'000'000;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t cells = 2 + trial % 3;
        const auto m = oracle::random_imdp(rng, cells, 2);
        REQUIRE(validate(m).ok());
        const auto r = interval_value_iteration(m, prop, opt);
        const auto ref = oracle::robust_reach(m, goal_mask(m), r.policy);
        for (std::size_t s = 0; s < m.num_states; ++s) {
            REQUIRE(r.p_lo[s] == doctest::Approx(ref.lo[s]).epsilon(1e-8).scale(1));
            REQUIRE(r.p_hi[s] == doctest::Approx(ref.hi[s]).epsilon(1e-8).scale(1));
            REQUIRE(r.p_lo[s] <= r.p_hi[s]);
        }
    }
}

TEST_CASE("bounded values match backward vertex enumeration") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t cells = 2 + trial % 3;
        const auto m = oracle::random_imdp(rng, cells, 2 + trial % 2);
        const unsigned T = 1 + trial % 6;
        const auto prop = PropertySpec::parse("REACH(goal, " + std::to_string(T) + ")");
        const auto r = interval_value_iteration(m, prop);
        REQUIRE(r.schedule.size() == T);
        REQUIRE(r.policy == r.schedule.front());
        const auto ref = oracle::robust_reach_bounded(m, goal_mask(m), r.schedule);
        for (std::size_t s = 0; s < m.num_states; ++s) {
            REQUIRE(r.p_lo[s] == doctest::Approx(ref.lo[s]).epsilon(1e-12).scale(1));
            REQUIRE(r.p_hi[s] == doctest::Approx(ref.hi[s]).epsilon(1e-12).scale(1));
        }
        // no stationary policy does better than the schedule
        std::vector<std::size_t> pol(m.num_states, 0);
        for (;;) {
            const auto v = evaluate_policy(m, prop, pol, Extremum::Minimize);
            for (std::size_t s = 0; s < m.num_states; ++s) REQUIRE(v[s] <= r.p_lo[s] + 1e-12);
            std::size_t s = 0;
            for (; s + 1 < m.num_states; ++s) {
                if (++pol[s] < m.num_actions) break;
                pol[s] = 0;
            }
            if (s + 1 == m.num_states) break;
        }
    }
}

TEST_CASE("unbounded properties keep a stationary policy") {
    std::mt19937_64 rng(17);
    const auto m = oracle::random_imdp(rng, 5, 2);
    CHECK(interval_value_iteration(m, PropertySpec::parse("REACH(goal, inf)")).schedule.empty());
    CHECK(interval_value_iteration(m, PropertySpec::parse("REACH(goal, 0)")).schedule.empty());
    const auto r = interval_value_iteration(m, PropertySpec::parse("REACH(goal, 3)"));
    CHECK_THROWS_AS(evaluate_schedule(m, PropertySpec::parse("REACH(goal, 4)"), r.schedule,
                                      Extremum::Minimize),
                    Error);
}

TEST_CASE("point intervals reduce to an MDP") {
    std::mt19937_64 rng(13);
    SynthesisOptions opt;
    opt.tolerance = 1e-14;
    opt.max_iterations = 1'000'000;
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = oracle::random_imdp(rng, 6, 3, true);
        const auto target = goal_mask(m);
        const std::vector<char> none(m.num_states, 0);
        const auto r = interval_value_iteration(m, PropertySpec::parse("REACH(goal, inf)"), opt);
        const auto ref = mdp_value(m, target, none, 0, true);
        for (std::size_t s = 0; s < m.num_states; ++s) {
            REQUIRE(r.p_lo[s] == doctest::Approx(ref[s]).epsilon(1e-10).scale(1));
            REQUIRE(r.p_hi[s] == doctest::Approx(ref[s]).epsilon(1e-10).scale(1));
        }
        const auto b = interval_value_iteration(m, PropertySpec::parse("REACH(goal, 7)"), opt);
        const auto bref = mdp_value(m, target, none, 7, false);
        for (std::size_t s = 0; s < m.num_states; ++s) {
            REQUIRE(b.p_lo[s] == doctest::Approx(bref[s]).epsilon(1e-12).scale(1));
            REQUIRE(b.p_hi[s] == doctest::Approx(bref[s]).epsilon(1e-12).scale(1));
        }
    }
}

TEST_CASE("iterates are monotone and bounded") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = oracle::random_imdp(rng, 8, 2);
        const auto r = interval_value_iteration(m, PropertySpec::parse("REACH(goal, inf)"));
        std::vector<double> prev_reach(m.num_states, 0.0);
        std::vector<double> prev_safe(m.num_states, 1.0);
        for (std::size_t T = 0; T <= 20; ++T) {
            const auto reach = evaluate_policy(m, PropertySpec::parse("REACH(goal, " + std::to_string(T) + ")"),
                                               r.policy, Extremum::Minimize);
            const auto safe = evaluate_policy(m, PropertySpec::parse("SAFE(in, " + std::to_string(T) + ")"),
                                              r.policy, Extremum::Minimize);
            for (std::size_t s = 0; s < m.num_states; ++s) {
                REQUIRE(reach[s] >= prev_reach[s]);
                REQUIRE(safe[s] <= prev_safe[s]);
                REQUIRE(reach[s] >= 0.0);
                REQUIRE(reach[s] <= 1.0);
                REQUIRE(safe[s] >= 0.0);
                REQUIRE(safe[s] <= 1.0);
            }
            prev_reach = reach;
            prev_safe = safe;
        }
        for (std::size_t s = 0; s < m.num_states; ++s) REQUIRE(r.p_lo[s] <= r.p_hi[s]);
    }
}

TEST_CASE("results do not depend on the thread count") {
    std::mt19937_64 rng(15);
    const auto m = oracle::random_imdp(rng, 3000, 2, false, 0.003);
    SynthesisOptions one;
    one.threads = 1;
    SynthesisOptions four;
    four.threads = 4;
    const auto prop = PropertySpec::parse("REACH(goal, 25)");
    const auto a = interval_value_iteration(m, prop, one);
    const auto b = interval_value_iteration(m, prop, four);
    CHECK(a.p_lo == b.p_lo);
    CHECK(a.p_hi == b.p_hi);
    CHECK(a.policy == b.policy);
    CHECK(a.schedule == b.schedule);
}
