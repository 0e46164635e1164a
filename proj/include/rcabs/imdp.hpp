#pragma once

#include "rcabs/system.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rcabs {

struct TransitionEntry {
    std::uint32_t target = 0;
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const TransitionEntry&, const TransitionEntry&) = default;
};

/// Compressed sparse rows of interval transition probabilities for one action.
struct IntervalMatrix {
    std::vector<std::size_t> row_start{0};
    std::vector<TransitionEntry> entries;

    std::size_t rows() const noexcept { return row_start.size() - 1; }
    std::span<const TransitionEntry> row(std::size_t i) const {
        return {entries.data() + row_start[i], entries.data() + row_start[i + 1]};
    }
    void append_row(std::span<const TransitionEntry> row);

    friend bool operator==(const IntervalMatrix&, const IntervalMatrix&) = default;
};

/// Interval MDP. States 0..N-1 are cells, state N is the absorbing sink whose
/// row (0, ..., 0, 1) is implicit and not stored.
struct Imdp {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    int state_dim = 0;
    double eta = 0.0;
    double rho = 0.0;
    std::vector<IntervalMatrix> transitions; // one per action, num_states - 1 rows
    std::vector<LabelSet> labels;            // one per state, sink has none
    std::string manifest;                    // provenance hash, may be empty
    std::string params;                      // run parameters behind the hash, may be empty

    std::size_t sink() const noexcept { return num_states - 1; }

    /// Row of (state, action) for a non-sink state.
    std::span<const TransitionEntry> row(std::size_t action, std::size_t state) const;

    LabelSet propositions() const;

    friend bool operator==(const Imdp&, const Imdp&) = default;
};

struct Diagnostics {
    std::vector<std::string> violations; // at most kMaxViolations
    std::size_t total = 0;

    static constexpr std::size_t kMaxViolations = 100;
    bool ok() const noexcept { return total == 0; }
};

/// Row sums are checked with this absolute slack.
inline constexpr double kRowSumTolerance = 1e-12;

/// Checks every structural invariant of the interval MDP.
Diagnostics validate(const Imdp& imdp);

// Interchange text format:
//
//   imdp <N+1> <|Act|> <n> <eta> <rho>
//   # manifest <hash>                         (optional)
//   # params <key=value ...>                  (optional)
//   label <state> <prop> ...
//   t <action> <i> <j> <lo> <hi>
//
// Floats use the shortest decimal form that round-trips. The sink row is
// implicit. Lines starting with '#' are comments.
void write_imdp(std::ostream& os, const Imdp& imdp);
Imdp read_imdp(std::istream& is);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);
double parse_double(std::string_view s);

} // namespace rcabs
