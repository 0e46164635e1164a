#pragma once

#include "rcabs/io.hpp"
#include "rcabs/system.hpp"

#include <string>
#include <vector>

namespace support {

struct Region {
    std::vector<rcabs::Interval> box;
    std::vector<std::string> props;
};

inline rcabs::SystemSpec make_spec(std::vector<rcabs::Interval> w, std::vector<rcabs::Interval> u,
                                   std::vector<std::string> f, std::vector<std::string> b,
                                   std::vector<Region> regions = {}) {
    rcabs::SystemSpec s;
    s.n = static_cast<int>(w.size());
    s.p = static_cast<int>(u.size());
    for (const auto& e : f) s.drift.push_back(rcabs::Expr::parse(e, s.n, s.p));
    for (const auto& e : b) s.diffusion.push_back(rcabs::Expr::parse(e, s.n, s.p));
    s.workspace = rcabs::Box(w);
    s.controls = rcabs::Box(u);
    if (regions.empty()) regions.push_back({w, {}});
    for (const auto& r : regions) {
        rcabs::LabelRegion l;
        l.region = rcabs::Box(r.box);
        l.props.insert(r.props.begin(), r.props.end());
        s.labels.push_back(std::move(l));
    }
    s.validate();
    return s;
}

/// x+ = 0.9 x + u + 0.3 w on W = [-2, 2], U = [-1, 1] with bad / goal ends.
inline const char* kBenchmarkYaml = R"(n: 1
p: 1
f: ["0.9*x1 + u1"]
b: ["0.3"]
theta1: 0
theta2: 0.5
W: [[-2, 2]]
U: [[-1, 1]]
L_u: 1
labels:
  - region: [[-2, -1]]
    props: [bad]
  - region: [[-1, 1]]
    props: []
  - region: [[1, 2]]
    props: [goal]
eta: 0.25
rho: 0.5
k: 0.05
)";

inline rcabs::RunConfig benchmark() { return rcabs::parse_config(kBenchmarkYaml); }

} // namespace support
