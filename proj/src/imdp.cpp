#include "rcabs/imdp.hpp"

#include "rcabs/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

namespace rcabs {

void IntervalMatrix::append_row(std::span<const TransitionEntry> row) {
    entries.insert(entries.end(), row.begin(), row.end());
    row_start.push_back(entries.size());
}

std::span<const TransitionEntry> Imdp::row(std::size_t action, std::size_t state) const {
    if (state >= sink()) throw Error("the sink row is implicit");
    return transitions[action].row(state);
}

LabelSet Imdp::propositions() const {
    LabelSet ap{kInsideProp};
    for (const auto& l : labels) ap.insert(l.begin(), l.end());
    return ap;
}

Diagnostics validate(const Imdp& m) {
    Diagnostics d;
    const auto report = [&](std::string msg) {
        ++d.total;
        if (d.violations.size() < Diagnostics::kMaxViolations) d.violations.push_back(std::move(msg));
    };
    if (m.num_states < 1) {
        report("no states");
        return d;
    }
    if (m.num_actions < 1) report("no actions");
    if (m.transitions.size() != m.num_actions) {
        report("expected " + std::to_string(m.num_actions) + " transition matrices, found " +
               std::to_string(m.transitions.size()));
        return d;
    }
    if (m.labels.size() != m.num_states) {
        report("expected labels for " + std::to_string(m.num_states) + " states");
    } else {
        if (!m.labels[m.sink()].empty()) report("sink state carries labels");
        for (std::size_t i = 0; i + 1 < m.num_states; ++i) {
            if (!m.labels[i].contains(kInsideProp)) {
                report("state " + std::to_string(i) + " lacks proposition 'in'");
            }
        }
    }
    for (std::size_t a = 0; a < m.num_actions; ++a) {
        const auto& mat = m.transitions[a];
        if (mat.rows() != m.num_states - 1) {
            report("action " + std::to_string(a) + " has " + std::to_string(mat.rows()) +
                   " rows, expected " + std::to_string(m.num_states - 1));
            continue;
        }
        for (std::size_t i = 0; i < mat.rows(); ++i) {
            const std::string at = " at (" + std::to_string(i) + "," + std::to_string(a) + ")";
            double sum_lo = 0.0;
            double sum_hi = 0.0;
            std::uint32_t prev = 0;
            bool first = true;
            for (const auto& e : mat.row(i)) {
                if (e.target >= m.num_states) {
                    report("target " + std::to_string(e.target) + " out of range" + at);
                }
                if (!first && e.target <= prev) report("unsorted or duplicate target" + at);
                first = false;
                prev = e.target;
                if (!(e.lo >= 0.0 && e.lo <= e.hi && e.hi <= 1.0)) {
                    report("invalid bounds [" + format_double(e.lo) + ", " + format_double(e.hi) +
                           "] for target " + std::to_string(e.target) + at);
                }
                sum_lo += e.lo;
                sum_hi += e.hi;
            }
            if (sum_lo > 1.0 + kRowSumTolerance) report("Σlo > 1" + at);
            if (sum_hi < 1.0 - kRowSumTolerance) report("Σhi < 1" + at);
        }
    }
    return d;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ParseError("malformed number '" + std::string(s) + "'", 0);
    }
    return v;
}

void write_imdp(std::ostream& os, const Imdp& m) {
    os << "imdp " << m.num_states << ' ' << m.num_actions << ' ' << m.state_dim << ' '
       << format_double(m.eta) << ' ' << format_double(m.rho) << '\n';
    if (!m.manifest.empty()) os << "# manifest " << m.manifest << '\n';
    if (!m.params.empty()) os << "# params " << m.params << '\n';
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        if (m.labels[i].empty()) continue;
        os << "label " << i;
        for (const auto& p : m.labels[i]) os << ' ' << p;
        os << '\n';
    }
    for (std::size_t a = 0; a < m.transitions.size(); ++a) {
        const auto& mat = m.transitions[a];
        for (std::size_t i = 0; i < mat.rows(); ++i) {
            for (const auto& e : mat.row(i)) {
                os << "t " << a << ' ' << i << ' ' << e.target << ' ' << format_double(e.lo) << ' '
                   << format_double(e.hi) << '\n';
            }
        }
    }
}

namespace {

template <typename T>
T parse_uint(const std::string& tok, std::size_t line) {
    T v{};
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw ParseError("line " + std::to_string(line) + ": expected integer, got '" + tok + "'",
                         line);
    }
    return v;
}

} // namespace

Imdp read_imdp(std::istream& is) {
    Imdp m;
    bool have_header = false;
    std::vector<std::tuple<std::size_t, std::size_t, TransitionEntry>> raw;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        const auto fail = [&](const std::string& msg) -> void {
            throw ParseError("line " + std::to_string(lineno) + ": " + msg, lineno);
        };
        if (kind[0] == '#') {
            std::string key;
            if (ls >> key && key == "manifest") ls >> m.manifest;
            if (key == "params") {
                std::getline(ls >> std::ws, m.params);
            }
            continue;
        }
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (kind == "imdp") {
            if (have_header) fail("duplicate header");
            if (tok.size() != 5) fail("header needs 5 fields");
            m.num_states = parse_uint<std::size_t>(tok[0], lineno);
            m.num_actions = parse_uint<std::size_t>(tok[1], lineno);
            m.state_dim = parse_uint<int>(tok[2], lineno);
            m.eta = parse_double(tok[3]);
            m.rho = parse_double(tok[4]);
            if (m.num_states < 1 || m.num_actions < 1) fail("empty model");
            m.labels.assign(m.num_states, {});
            have_header = true;
        } else if (!have_header) {
            fail("missing 'imdp' header");
        } else if (kind == "label") {
            if (tok.empty()) fail("label line needs a state");
            const auto s = parse_uint<std::size_t>(tok[0], lineno);
            if (s >= m.num_states) fail("label state out of range");
            if (s == m.sink()) fail("the sink cannot carry labels");
            m.labels[s].insert(tok.begin() + 1, tok.end());
        } else if (kind == "t") {
            if (tok.size() != 5) fail("transition needs 5 fields");
            const auto a = parse_uint<std::size_t>(tok[0], lineno);
            const auto i = parse_uint<std::size_t>(tok[1], lineno);
            const auto j = parse_uint<std::uint32_t>(tok[2], lineno);
            if (a >= m.num_actions) fail("action out of range");
            if (i >= m.sink()) fail("source state out of range (sink row is implicit)");
            if (j >= m.num_states) fail("target state out of range");
            double lo = 0.0;
            double hi = 0.0;
            try {
                lo = parse_double(tok[3]);
                hi = parse_double(tok[4]);
            } catch (const ParseError& e) {
                fail(e.what());
            }
            raw.emplace_back(a, i, TransitionEntry{j, lo, hi});
        } else {
            fail("unknown record '" + kind + "'");
        }
    }
    if (!have_header) throw ParseError("missing 'imdp' header", lineno);

    std::stable_sort(raw.begin(), raw.end(), [](const auto& x, const auto& y) {
        return std::tie(std::get<0>(x), std::get<1>(x), std::get<2>(x).target) <
               std::tie(std::get<0>(y), std::get<1>(y), std::get<2>(y).target);
    });
    m.transitions.assign(m.num_actions, {});
    auto it = raw.begin();
    for (std::size_t a = 0; a < m.num_actions; ++a) {
        auto& mat = m.transitions[a];
        for (std::size_t i = 0; i + 1 < m.num_states; ++i) {
            while (it != raw.end() && std::get<0>(*it) == a && std::get<1>(*it) == i) {
                if (mat.entries.size() > mat.row_start.back() &&
                    mat.entries.back().target == std::get<2>(*it).target) {
                    throw ParseError("duplicate transition (" + std::to_string(a) + "," +
                                         std::to_string(i) + "," +
                                         std::to_string(std::get<2>(*it).target) + ")",
                                     0);
                }
                mat.entries.push_back(std::get<2>(*it));
                ++it;
            }
            mat.row_start.push_back(mat.entries.size());
        }
    }
    return m;
}

} // namespace rcabs
