#include "rcabs/io.hpp"

#include "rcabs/error.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace rcabs {

namespace {

std::string at_line(const YAML::Node& node, const std::string& msg) {
    const auto mark = node.Mark();
    if (mark.line < 0) return msg;
    return "line " + std::to_string(mark.line + 1) + ": " + msg;
}

[[noreturn]] void schema_error(const YAML::Node& node, const std::string& msg) {
    throw ConfigError(at_line(node, msg));
}

double as_double(const YAML::Node& node, const std::string& what) {
    if (!node.IsScalar()) schema_error(node, what + " must be a number");
    try {
        return parse_double(node.Scalar());
    } catch (const ParseError&) {
        schema_error(node, what + " must be a number, got '" + node.Scalar() + "'");
    }
}

int as_int(const YAML::Node& node, const std::string& what) {
    const double v = as_double(node, what);
    if (v != static_cast<double>(static_cast<int>(v))) schema_error(node, what + " must be an integer");
    return static_cast<int>(v);
}

Interval as_interval(const YAML::Node& node, const std::string& what) {
    if (!node.IsSequence() || node.size() != 2) schema_error(node, what + " must be a pair [lo, hi]");
    const double lo = as_double(node[0], what + " lower bound");
    const double hi = as_double(node[1], what + " upper bound");
    if (!(lo <= hi)) schema_error(node, what + " has lo > hi");
    return {lo, hi};
}

Box as_box(const YAML::Node& node, const std::string& what, int dim) {
    if (!node.IsSequence()) schema_error(node, what + " must be a list of [lo, hi] pairs");
    if (static_cast<int>(node.size()) != dim) {
        schema_error(node, what + " must have " + std::to_string(dim) + " intervals");
    }
    std::vector<Interval> dims;
    for (std::size_t i = 0; i < node.size(); ++i) {
        dims.push_back(as_interval(node[i], what + "[" + std::to_string(i) + "]"));
    }
    return Box(std::move(dims));
}

std::vector<Expr> as_exprs(const YAML::Node& node, const std::string& what, int n, int p) {
    if (!node.IsSequence()) schema_error(node, what + " must be a list of expressions");
    if (static_cast<int>(node.size()) != n) {
        schema_error(node, what + " must have " + std::to_string(n) + " expressions");
    }
    std::vector<Expr> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const auto& e = node[i];
        if (!e.IsScalar()) schema_error(e, what + "[" + std::to_string(i) + "] must be a string");
        try {
            out.push_back(Expr::parse(e.Scalar(), n, p));
        } catch (const ParseError& err) {
            schema_error(e, what + "[" + std::to_string(i) + "]: " + err.what());
        }
    }
    return out;
}

const YAML::Node require(const YAML::Node& root, const char* key) {
    const YAML::Node n = root[key];
    if (!n) schema_error(root, std::string("missing required field '") + key + "'");
    return n;
}

} // namespace

RunConfig parse_config(std::string text) {
    RunConfig cfg;
    cfg.text = std::move(text);
    YAML::Node root;
    try {
        root = YAML::Load(cfg.text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (!root.IsMap()) throw ConfigError("config must be a key/value document");

    static const std::set<std::string> known{"n",  "p", "f", "b",     "theta1", "theta2", "W",
                                             "U",  "L_u", "labels", "eta", "rho", "k"};
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (!known.contains(key)) schema_error(kv.first, "unknown field '" + key + "'");
    }

    SystemSpec& s = cfg.system;
    s.n = as_int(require(root, "n"), "n");
    s.p = as_int(require(root, "p"), "p");
    if (s.n < 1) schema_error(root["n"], "n must be >= 1");
    if (s.p < 1) schema_error(root["p"], "p must be >= 1");
    s.drift = as_exprs(require(root, "f"), "f", s.n, s.p);
    s.diffusion = as_exprs(require(root, "b"), "b", s.n, s.p);
    s.theta1 = root["theta1"] ? as_double(root["theta1"], "theta1") : 0.0;
    if (root["theta2"]) s.theta2 = as_double(root["theta2"], "theta2");
    s.workspace = as_box(require(root, "W"), "W", s.n);
    s.controls = as_box(require(root, "U"), "U", s.p);
    s.lipschitz_u = as_double(require(root, "L_u"), "L_u");

    const YAML::Node labels = require(root, "labels");
    if (!labels.IsSequence()) schema_error(labels, "labels must be a list");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const YAML::Node& l = labels[i];
        const std::string what = "labels[" + std::to_string(i) + "]";
        if (!l.IsMap()) schema_error(l, what + " must have 'region' and 'props'");
        for (const auto& kv : l) {
            const auto key = kv.first.as<std::string>();
            if (key != "region" && key != "props") schema_error(kv.first, "unknown field '" + key + "'");
        }
        LabelRegion reg;
        reg.region = as_box(require(l, "region"), what + ".region", s.n);
        if (const YAML::Node props = l["props"]) {
            if (!props.IsSequence()) schema_error(props, what + ".props must be a list");
            for (const auto& pr : props) {
                if (!pr.IsScalar()) schema_error(pr, what + ".props entries must be names");
                const std::string name = pr.Scalar();
                if (name.empty() || name.find_first_of(" \t,&()") != std::string::npos) {
                    schema_error(pr, "invalid proposition name '" + name + "'");
                }
                reg.props.insert(name);
            }
        }
        s.labels.push_back(std::move(reg));
    }

    if (root["eta"]) cfg.eta = as_double(root["eta"], "eta");
    if (root["rho"]) cfg.rho = as_double(root["rho"], "rho");
    if (root["k"]) cfg.k = as_double(root["k"], "k");
    s.validate();
    return cfg;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("error writing '" + path.string() + "'");
}

RunConfig load_config(const std::filesystem::path& path) {
    try {
        return parse_config(read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 15]);
    }
    return out;
}

std::string ManifestParams::to_string() const {
    return "config=" + config_sha256 + " eta=" + format_double(eta) + " rho=" + format_double(rho) +
           " k=" + format_double(k);
}

ManifestParams ManifestParams::parse(std::string_view line) {
    ManifestParams p;
    std::istringstream ss{std::string(line)};
    std::set<std::string> seen;
    for (std::string tok; ss >> tok;) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw ParseError("malformed params entry '" + tok + "'", 0);
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "config") {
            p.config_sha256 = val;
        } else if (key == "eta") {
            p.eta = parse_double(val);
        } else if (key == "rho") {
            p.rho = parse_double(val);
        } else if (key == "k") {
            p.k = parse_double(val);
        } else {
            throw ParseError("unknown params key '" + key + "'", 0);
        }
        seen.insert(key);
    }
    if (seen.size() != 4) throw ParseError("params line needs config, eta, rho and k", 0);
    return p;
}

std::string ManifestParams::hash() const { return sha256_hex(to_string()); }

ManifestParams manifest_params(const RunConfig& cfg, const AbstractionParams& p) {
    return {sha256_hex(cfg.text), p.eta, p.rho, p.k};
}

std::string manifest_diff(const ManifestParams& expected, const ManifestParams& found) {
    std::string out;
    const auto add = [&](const std::string& item) {
        if (!out.empty()) out += "; ";
        out += item;
    };
    if (expected.config_sha256 != found.config_sha256) {
        add("config sha256: " + expected.config_sha256.substr(0, 12) + "… vs " +
            found.config_sha256.substr(0, 12) + "…");
    }
    if (expected.eta != found.eta) add("eta: " + format_double(expected.eta) + " vs " + format_double(found.eta));
    if (expected.rho != found.rho) add("rho: " + format_double(expected.rho) + " vs " + format_double(found.rho));
    if (expected.k != found.k) add("k: " + format_double(expected.k) + " vs " + format_double(found.k));
    return out.empty() ? "no parameter differences" : out;
}

void write_policy(std::ostream& os, const PolicyFile& p) {
    os << "policy " << p.num_states << ' ' << p.num_actions;
    if (!p.schedule.empty()) os << ' ' << p.schedule.size();
    os << '\n';
    if (!p.manifest.empty()) os << "# manifest " << p.manifest << '\n';
    if (!p.params.empty()) os << "# params " << p.params << '\n';
    for (std::size_t s = 0; s + 1 < p.num_states; ++s) {
        os << "pi " << s;
        if (p.schedule.empty()) {
            os << ' ' << p.policy[s];
        } else {
            for (const auto& step : p.schedule) os << ' ' << step[s];
        }
        os << '\n';
    }
}

PolicyFile read_policy(std::istream& is) {
    PolicyFile p;
    bool header = false;
    std::vector<char> seen;
    std::string line;
    std::size_t lineno = 0;
    const auto fail = [&](const std::string& msg) {
        throw ParseError("line " + std::to_string(lineno) + ": " + msg, lineno);
    };
    const auto number = [&](std::istream& ls) {
        long long v = -1;
        if (!(ls >> v) || v < 0) fail("expected a nonnegative integer");
        return static_cast<std::size_t>(v);
    };
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        if (kind == "#") {
            std::string key;
            ls >> key;
            if (key == "manifest") ls >> p.manifest;
            if (key == "params") std::getline(ls >> std::ws, p.params);
            continue;
        }
        if (kind == "policy") {
            if (header) fail("duplicate header");
            p.num_states = number(ls);
            p.num_actions = number(ls);
            if (p.num_states < 1 || p.num_actions < 1) fail("empty policy");
            p.policy.assign(p.num_states, 0);
            if (!(ls >> std::ws).eof()) {
                const std::size_t steps = number(ls);
                if (steps == 0) fail("step count must be positive");
                p.schedule.assign(steps, std::vector<std::size_t>(p.num_states, 0));
            }
            seen.assign(p.num_states, 0);
            header = true;
        } else if (kind == "pi") {
            if (!header) fail("missing 'policy' header");
            const std::size_t s = number(ls);
            if (s + 1 >= p.num_states) fail("state out of range");
            if (seen[s]) fail("duplicate entry for state " + std::to_string(s));
            seen[s] = 1;
            const std::size_t steps = std::max<std::size_t>(p.schedule.size(), 1);
            for (std::size_t t = 0; t < steps; ++t) {
                const std::size_t a = number(ls);
                if (a >= p.num_actions) fail("action out of range");
                if (!p.schedule.empty()) p.schedule[t][s] = a;
                if (t == 0) p.policy[s] = a;
            }
        } else {
            fail("unknown record '" + kind + "'");
        }
        std::string extra;
        if (ls >> extra) fail("trailing field '" + extra + "'");
    }
    if (!header) throw ParseError("missing 'policy' header", lineno);
    for (std::size_t s = 0; s + 1 < p.num_states; ++s) {
        if (!seen[s]) throw ParseError("no action for state " + std::to_string(s), lineno);
    }
    return p;
}

nlohmann::ordered_json results_to_json(const SynthesisResult& r, const std::string& manifest) {
    nlohmann::ordered_json j;
    j["manifest"] = manifest;
    j["property"] = r.property.to_string();
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    j["horizon_hint"] = r.horizon_hint;
    auto& states = j["states"] = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < r.p_lo.size(); ++s) {
        nlohmann::ordered_json e;
        e["state"] = s;
        e["p_lo"] = r.p_lo[s];
        e["p_hi"] = r.p_hi[s];
        e["action"] = r.policy[s];
        if (r.property.threshold) {
            e["verdict"] = to_string(verdict(satisfaction_interval(r, s), *r.property.threshold));
        }
        states.push_back(std::move(e));
    }
    return j;
}

ResultsFile results_from_json(const nlohmann::ordered_json& j) {
    try {
        ResultsFile f;
        f.manifest = j.value("manifest", std::string{});
        f.result.property = PropertySpec::parse(j.at("property").get<std::string>());
        f.result.iterations = j.at("iterations").get<std::size_t>();
        f.result.residual = j.at("residual").get<double>();
        f.result.horizon_hint = j.at("horizon_hint").get<std::size_t>();
        const auto& states = j.at("states");
        for (std::size_t s = 0; s < states.size(); ++s) {
            const auto& e = states[s];
            if (e.at("state").get<std::size_t>() != s) throw Error("states must be listed in order");
            f.result.p_lo.push_back(e.at("p_lo").get<double>());
            f.result.p_hi.push_back(e.at("p_hi").get<double>());
            f.result.policy.push_back(e.at("action").get<std::size_t>());
        }
        return f;
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ParseError(std::string("malformed results document: ") + e.what(), 0);
    }
}

nlohmann::ordered_json report_to_json(const SimulationReport& r) {
    nlohmann::ordered_json j;
    j["N"] = r.estimate.samples;
    j["seed"] = r.estimate.seed;
    j["xi_mode"] = r.xi_mode;
    j["property"] = r.property;
    j["x0"] = r.x0;
    j["state"] = r.state;
    j["horizon"] = r.estimate.horizon;
    j["truncation_warning"] = r.estimate.truncation_warning;
    j["successes"] = r.estimate.successes;
    j["p_emp"] = r.estimate.p_emp;
    j["ci"] = {r.estimate.ci_lo, r.estimate.ci_hi};
    j["interval"] = {r.interval.lo, r.interval.hi};
    j["verdict"] = to_string(r.verdict);
    j["manifest"] = r.manifest;
    return j;
}

void write_trajectories_csv(std::ostream& os, const McEstimate& est) {
    os << "trajectory,success,tau,states\n";
    for (std::size_t i = 0; i < est.trajectories.size(); ++i) {
        const auto& tr = est.trajectories[i];
        os << i << ',' << static_cast<int>(est.outcomes[i]) << ',' << tr.tau;
        for (const auto& x : tr.states) {
            for (double v : x) os << ',' << format_double(v);
        }
        os << '\n';
    }
}

void write_heatmap_csv(std::ostream& os, const Partition& part, const SynthesisResult& r) {
    if (r.p_lo.size() != part.num_states()) {
        throw Error("results have " + std::to_string(r.p_lo.size()) + " states, partition has " +
                    std::to_string(part.num_states()));
    }
    os << "cell";
    for (std::size_t d = 0; d < part.dim(); ++d) os << ",c" << d + 1;
    os << ",p_lo,p_hi,action\n";
    for (StateId s = 0; s < part.num_cells(); ++s) {
        os << s;
        for (double c : part.center(s)) os << ',' << format_double(c);
        os << ',' << format_double(r.p_lo[s]) << ',' << format_double(r.p_hi[s]) << ','
           << r.policy[s] << '\n';
    }
}

std::vector<double> parse_point(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        auto tok = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        out.push_back(parse_double(tok));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace rcabs
