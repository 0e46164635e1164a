#pragma once

#include "rcabs/interval.hpp"
#include "rcabs/system.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace rcabs {

enum class PropertyKind { Safe, Reach, ReachAvoid };
enum class Comparison { Less, LessEqual, Greater, GreaterEqual };
enum class Verdict { Yes, No, Unknown };

struct Threshold {
    Comparison op = Comparison::GreaterEqual;
    double rho = 0.0;
};

/// Safe(props, T), Reach(props, T) or ReachAvoid(target, avoid, T).
/// A state satisfies a proposition set when it carries every member.
/// `horizon` empty means unbounded.
struct PropertySpec {
    PropertyKind kind = PropertyKind::Reach;
    LabelSet props;  // safe set for Safe, target for Reach / ReachAvoid
    LabelSet avoid;  // ReachAvoid only
    std::optional<unsigned> horizon;
    std::optional<Threshold> threshold;

    /// Grammar: SAFE(p,T|inf) | REACH(p,T|inf) | REACH_AVOID(p,q,T|inf), each
    /// optionally followed by one of <, <=, >, >= and a probability. A
    /// proposition slot may join several names with '&'.
    static PropertySpec parse(std::string_view text);

    std::string to_string() const;

    /// Throws Error listing the known propositions when a name is unknown.
    void check_propositions(const LabelSet& known) const;
};

bool satisfies_all(const LabelSet& state_labels, const LabelSet& props);

Verdict verdict(const Interval& probability, const Threshold& threshold);
const char* to_string(Verdict v);

} // namespace rcabs
