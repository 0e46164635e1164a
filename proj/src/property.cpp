#include "rcabs/property.hpp"

#include "rcabs/error.hpp"

#include <cctype>
#include <charconv>
#include <sstream>
#include <vector>

namespace rcabs {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_ident(std::string_view s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s.front())) && s.front() != '_') return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

LabelSet parse_props(std::string_view slot) {
    LabelSet out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t amp = slot.find('&', start);
        const auto name = trim(slot.substr(start, amp == std::string_view::npos ? slot.npos
                                                                                : amp - start));
        if (!is_ident(name)) {
            throw ParseError("malformed proposition '" + std::string(name) + "'", start);
        }
        out.emplace(name);
        if (amp == std::string_view::npos) break;
        start = amp + 1;
    }
    return out;
}

std::string join(const LabelSet& s) {
    std::string r;
    for (const auto& p : s) {
        if (!r.empty()) r += '&';
        r += p;
    }
    return r;
}

} // namespace

PropertySpec PropertySpec::parse(std::string_view text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == text.npos || close == text.npos || close < open) {
        throw ParseError("malformed property '" + std::string(text) + "'", 0);
    }
    PropertySpec spec;
    const auto head = trim(text.substr(0, open));
    std::size_t arity = 0;
    if (head == "SAFE") {
        spec.kind = PropertyKind::Safe;
        arity = 2;
    } else if (head == "REACH") {
        spec.kind = PropertyKind::Reach;
        arity = 2;
    } else if (head == "REACH_AVOID") {
        spec.kind = PropertyKind::ReachAvoid;
        arity = 3;
    } else {
        throw ParseError("unknown property kind '" + std::string(head) + "'", 0);
    }

    std::vector<std::string_view> args;
    const auto inner = text.substr(open + 1, close - open - 1);
    std::size_t start = 0;
    for (;;) {
        const auto comma = inner.find(',', start);
        args.push_back(trim(inner.substr(start, comma == inner.npos ? inner.npos : comma - start)));
        if (comma == inner.npos) break;
        start = comma + 1;
    }
    if (args.size() != arity) {
        throw ParseError("property " + std::string(head) + " expects " + std::to_string(arity) +
                             " arguments",
                         open);
    }
    spec.props = parse_props(args[0]);
    if (spec.kind == PropertyKind::ReachAvoid) {
        spec.avoid = parse_props(args[1]);
        for (const auto& p : spec.avoid) {
            if (spec.props.contains(p)) {
                throw ParseError("target and avoid propositions must be disjoint", open);
            }
        }
    }
    const auto h = args.back();
    if (h != "inf") {
        unsigned v = 0;
        const auto res = std::from_chars(h.data(), h.data() + h.size(), v);
        if (res.ec != std::errc{} || res.ptr != h.data() + h.size()) {
            throw ParseError("malformed horizon '" + std::string(h) + "'", open);
        }
        spec.horizon = v;
    }

    auto rest = trim(text.substr(close + 1));
    if (!rest.empty()) {
        Threshold th;
        if (rest.starts_with(">=")) {
            th.op = Comparison::GreaterEqual;
            rest.remove_prefix(2);
        } else if (rest.starts_with("<=")) {
            th.op = Comparison::LessEqual;
            rest.remove_prefix(2);
        } else if (rest.starts_with(">")) {
            th.op = Comparison::Greater;
            rest.remove_prefix(1);
        } else if (rest.starts_with("<")) {
            th.op = Comparison::Less;
            rest.remove_prefix(1);
        } else {
            throw ParseError("malformed threshold '" + std::string(rest) + "'", close + 1);
        }
        rest = trim(rest);
        const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), th.rho);
        if (res.ec != std::errc{} || res.ptr != rest.data() + rest.size() || th.rho < 0.0 ||
            th.rho > 1.0) {
            throw ParseError("threshold must be a probability", close + 1);
        }
        spec.threshold = th;
    }
    return spec;
}

std::string PropertySpec::to_string() const {
    std::ostringstream os;
    switch (kind) {
    case PropertyKind::Safe: os << "SAFE(" << join(props); break;
    case PropertyKind::Reach: os << "REACH(" << join(props); break;
    case PropertyKind::ReachAvoid: os << "REACH_AVOID(" << join(props) << ',' << join(avoid); break;
    }
    os << ',';
    if (horizon) os << *horizon;
    else os << "inf";
    os << ')';
    if (threshold) {
        static constexpr const char* ops[] = {"<", "<=", ">", ">="};
        os << ' ' << ops[static_cast<int>(threshold->op)] << ' ' << threshold->rho;
    }
    return os.str();
}

void PropertySpec::check_propositions(const LabelSet& known) const {
    const auto check = [&](const LabelSet& s) {
        for (const auto& p : s) {
            if (!known.contains(p)) {
                throw Error("unknown proposition '" + p + "'; known propositions: " + join(known));
            }
        }
    };
    check(props);
    check(avoid);
}

bool satisfies_all(const LabelSet& state_labels, const LabelSet& props) {
    for (const auto& p : props) {
        if (!state_labels.contains(p)) return false;
    }
    return true;
}

Verdict verdict(const Interval& prob, const Threshold& th) {
    const auto holds = [&](double v) {
        switch (th.op) {
        case Comparison::Less: return v < th.rho;
        case Comparison::LessEqual: return v <= th.rho;
        case Comparison::Greater: return v > th.rho;
        case Comparison::GreaterEqual: return v >= th.rho;
        }
        return false;
    };
    const bool lo_ok = holds(prob.lo);
    const bool hi_ok = holds(prob.hi);
    if (lo_ok && hi_ok) return Verdict::Yes;
    if (!lo_ok && !hi_ok) return Verdict::No;
    return Verdict::Unknown;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Yes: return "yes";
    case Verdict::No: return "no";
    case Verdict::Unknown: return "unknown";
    }
    return "unknown";
}

} // namespace rcabs
