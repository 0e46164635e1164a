#include "rcabs/error.hpp"
#include "rcabs/partition.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rcabs;
using support::make_spec;

TEST_CASE("uniform 1-D partition") {
    const auto s = make_spec({{0, 1}}, {{0, 1}}, {"x1"}, {"1"});
    const Partition part(s, 0.25);
    CHECK(part.num_cells() == 4);
    CHECK(part.num_states() == 5);
    CHECK(part.sink() == 4);
    CHECK(part.effective_eta() == 0.25);
    const std::vector<double> x{0.3};
    CHECK(part.locate(x) == 1);
    const std::vector<double> out{1.5};
    CHECK(part.locate(out) == part.sink());
    const std::vector<double> face{0.25};
    CHECK(part.locate(face) == 1);
    const std::vector<double> top{1.0};
    CHECK(part.locate(top) == 3);
    CHECK(part.labels(2) == LabelSet{"in"});
    CHECK(part.labels(part.sink()).empty());
    CHECK(part.representative(2)[0] == 0.5);
}

TEST_CASE("2-D partition respects label boundaries") {
    const auto s = make_spec({{0, 1}, {0, 1}}, {{0, 1}}, {"x1", "x2"}, {"1", "1"},
                             {{{{0, 0.5}, {0, 1}}, {"left"}}, {{{0.5, 1}, {0, 1}}, {"right"}}});
    const Partition part(s, 0.25);
    CHECK(part.num_cells() == 16);
    for (StateId c = 0; c < part.num_cells(); ++c) {
        const auto ctr = part.center(c);
        CHECK(part.labels(c).contains(ctr[0] < 0.5 ? "left" : "right"));
        CHECK(part.labels(c).contains("in"));
    }
    // row-major with the last axis fastest
    const std::vector<std::size_t> coords{1, 2};
    CHECK(part.id(coords) == 6);
    CHECK(part.coords(6) == coords);
}

TEST_CASE("non-commensurate region boundaries join the cut set") {
    const auto s = make_spec({{0, 1}}, {{0, 1}}, {"x1"}, {"1"}, {{{{0, 0.3}}, {"a"}}, {{{0.3, 1}}, {"b"}}});
    const Partition part(s, 0.25);
    const auto cuts = part.cuts(0);
    const std::vector<double> expected{0, 0.25, 0.3, 0.5, 0.75, 1};
    REQUIRE(cuts.size() == expected.size());
    for (std::size_t i = 0; i < cuts.size(); ++i) CHECK(cuts[i] == expected[i]);
    CHECK(part.num_cells() == 5);
    CHECK(part.effective_eta() == 0.25);
}

TEST_CASE("lattice points near a region boundary do not create slivers") {
    const auto s = make_spec({{0, 1}}, {{0, 1}}, {"x1"}, {"1"}, {{{{0, 0.3}}, {"a"}}, {{{0.3, 1}}, {"b"}}});
    const Partition part(s, 0.1);
    CHECK(part.num_cells() == 10);
    const auto cuts = part.cuts(0);
    for (std::size_t i = 1; i < cuts.size(); ++i) CHECK(cuts[i] - cuts[i - 1] > 0.09);
}

TEST_CASE("partition covers W and locate inverts centers") {
    const auto s = make_spec({{-1, 1.3}, {0, 0.7}}, {{0, 1}}, {"x1", "x2"}, {"1", "1"},
                             {{{{-1, 0.2}, {0, 0.7}}, {"a"}}, {{{0.2, 1.3}, {0, 0.7}}, {}}});
    const Partition part(s, 0.15);
    double vol = 0.0;
    for (StateId c = 0; c < part.num_cells(); ++c) {
        const Box b = part.cell(c);
        vol += b.volume();
        CHECK(b[0].width() <= part.effective_eta());
        CHECK(b[1].width() <= part.effective_eta());
        CHECK(part.locate(part.center(c)) == c);
        CHECK(part.locate(part.representative(c)) == c);
    }
    CHECK(std::abs(vol - s.workspace.volume()) <= 1e-12 * s.workspace.volume());
    CHECK(part.effective_eta() <= 0.15 * (1 + 1e-9));
}

TEST_CASE("invalid grid size") {
    const auto s = make_spec({{0, 1}}, {{0, 1}}, {"x1"}, {"1"});
    CHECK_THROWS_AS(Partition(s, 0.0), ConfigError);
    CHECK_THROWS_AS(ControlGrid(s, -1.0), ConfigError);
}

TEST_CASE("control grid examples") {
    const auto s1 = make_spec({{0, 1}}, {{-1, 1}}, {"x1"}, {"1"});
    const ControlGrid g1(s1, 1.0);
    REQUIRE(g1.size() == 2);
    CHECK(g1.actions[0][0] == -0.5);
    CHECK(g1.actions[1][0] == 0.5);
    CHECK(g1.covering_radius() == 0.5);

    const auto s2 = make_spec({{0, 1}}, {{-1, 1}, {-1, 1}}, {"x1 + u1 + u2"}, {"1"});
    CHECK(ControlGrid(s2, 1.0).size() == 4);

    const auto s3 = make_spec({{0, 1}}, {{0, 0}}, {"x1 + u1"}, {"1"});
    const ControlGrid g3(s3, 0.3);
    REQUIRE(g3.size() == 1);
    CHECK(g3.actions[0][0] == 0.0);
}

TEST_CASE("control grid covering radius by dense sampling") {
    const auto s = make_spec({{0, 1}}, {{-1, 0.7}, {0, 2}}, {"x1 + u1 * u2"}, {"1"});
    const double rho = 0.4;
    const ControlGrid g(s, rho);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u1 = -1.0 + 1.7 * U(rng);
        const double u2 = 2.0 * U(rng);
        double best = INFINITY;
        for (const auto& a : g.actions) {
            best = std::min(best, std::max(std::abs(a[0] - u1), std::abs(a[1] - u2)));
        }
        worst = std::max(worst, best);
    }
    CHECK(worst <= g.covering_radius());
    CHECK(g.covering_radius() <= rho);
}
