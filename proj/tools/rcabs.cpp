#include "rcabs/abstraction.hpp"
#include "rcabs/engine.hpp"
#include "rcabs/error.hpp"
#include "rcabs/io.hpp"
#include "rcabs/partition.hpp"
#include "rcabs/simulator.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace rcabs;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitYes = 0;
constexpr int kExitNo = 1;
constexpr int kExitUnknown = 2;
constexpr int kExitInputError = 3;
constexpr int kExitInternal = 4;

int exit_code(Verdict v) {
    switch (v) {
    case Verdict::Yes: return kExitYes;
    case Verdict::No: return kExitNo;
    case Verdict::Unknown: return kExitUnknown;
    }
    return kExitUnknown;
}

int exit_code(Soundness s) {
    switch (s) {
    case Soundness::Pass: return kExitYes;
    case Soundness::Fail: return kExitNo;
    case Soundness::Inconclusive: return kExitUnknown;
    }
    return kExitUnknown;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

struct GridArgs {
    std::optional<double> eta;
    std::optional<double> rho;
    std::optional<double> k;

    void add(CLI::App* app) {
        app->add_option("--eta", eta, "state grid size (overrides the config)");
        app->add_option("--rho", rho, "control grid size (overrides the config)");
        app->add_option("--k", k, "mean precision of the transition sets (overrides the config)");
    }

    AbstractionParams resolve(const RunConfig& cfg) const {
        AbstractionParams p;
        const auto pick = [](const std::optional<double>& flag, const std::optional<double>& doc,
                             const char* name) {
            if (flag) return *flag;
            if (doc) return *doc;
            throw ConfigError(std::string("parameter '") + name + "' is neither in the config nor given");
        };
        p.eta = pick(eta, cfg.eta, "eta");
        p.rho = pick(rho, cfg.rho, "rho");
        p.k = pick(k, cfg.k, "k");
        if (!(p.eta > 0.0) || !(p.rho > 0.0) || !(p.k > 0.0)) {
            throw ConfigError("eta, rho and k must be > 0");
        }
        return p;
    }
};

/// Run record with timestamps; kept apart from the deterministic outputs.
struct RunManifest {
    std::string subcommand;
    std::string config_path;
    ManifestParams params;
    std::optional<double> tol;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::string started_at = utc_now();

    void write(const fs::path& path) const {
        nlohmann::ordered_json j;
        j["tool"] = "rcabs";
        j["version"] = kVersion;
        j["subcommand"] = subcommand;
        j["config_path"] = config_path;
        j["config_sha256"] = params.config_sha256;
        j["manifest"] = params.hash();
        auto& p = j["params"];
        p["eta"] = params.eta;
        p["rho"] = params.rho;
        p["k"] = params.k;
        if (tol) p["tol"] = *tol;
        if (samples) p["N"] = *samples;
        if (seed) p["seed"] = *seed;
        j["started_at"] = started_at;
        j["finished_at"] = utc_now();
        write_file(path, j.dump(2) + "\n");
    }
};

void print_certificate(const RunConfig& cfg, const AbstractionParams& p, bool& failed) {
    failed = false;
    if (!cfg.system.theta2) {
        std::cout << "certificate: no gap target; certificate skipped\n";
        return;
    }
    const auto c = check_certificate(cfg.system, p);
    std::cout << "certificate: " << (c.holds ? "holds" : "fails") << "  lhs=" << format_double(c.lhs)
              << (c.holds ? " <= " : " > ") << "gap=" << format_double(c.gap) << "  (2eta="
              << format_double(2.0 * c.eta) << " tv/2=" << format_double(0.5 * c.tv)
              << " L_u*rho=" << format_double(c.lipschitz_u * c.rho) << " k=" << format_double(c.k)
              << ")\n";
    failed = !c.holds;
}

struct AbstractArgs {
    std::string config;
    GridArgs grid;
    std::string imdp_out = "model.imdp";
    std::string refs_out;
    std::string manifest_out;
};

struct AbstractOutcome {
    Abstraction abs;
    ManifestParams params;
    bool certificate_failed = false;
};

AbstractOutcome run_abstract(const RunConfig& cfg, const AbstractionParams& p,
                             const std::string& imdp_out, const std::string& refs_out) {
    AbstractOutcome out;
    out.params = manifest_params(cfg, p);
    const Partition part(cfg.system, p.eta);
    const ControlGrid grid(cfg.system, p.rho);
    BuildOptions opts;
    opts.record_references = !refs_out.empty();
    out.abs = build_imdp(cfg.system, part, grid, p.k, opts);
    out.abs.imdp.manifest = out.params.hash();
    out.abs.imdp.params = out.params.to_string();

    std::ostringstream os;
    write_imdp(os, out.abs.imdp);
    write_file(imdp_out, os.str());
    std::cout << "imdp: " << imdp_out << " (" << part.num_cells() << " cells + sink, "
              << grid.size() << " actions)\n";
    if (!refs_out.empty()) {
        std::ostringstream rs;
        write_refrecord(rs, out.abs.refs, out.abs.imdp.manifest);
        write_file(refs_out, rs.str());
        std::cout << "references: " << refs_out << '\n';
    }
    print_certificate(cfg, p, out.certificate_failed);
    return out;
}

int cmd_abstract(const AbstractArgs& a) {
    const RunConfig cfg = load_config(a.config);
    const AbstractionParams p = a.grid.resolve(cfg);
    RunManifest rm{"abstract", a.config, manifest_params(cfg, p), std::nullopt, std::nullopt, std::nullopt};
    const auto out = run_abstract(cfg, p, a.imdp_out, a.refs_out);
    if (!a.manifest_out.empty()) rm.write(a.manifest_out);
    return out.certificate_failed ? kExitNo : kExitYes;
}

struct SynthArgs {
    std::string imdp;
    std::string property;
    std::string policy_out = "policy.txt";
    std::string results_out = "results.json";
    std::optional<std::size_t> initial;
    double tol = 1e-9;
    std::size_t max_iter = 100'000;
};

SynthesisResult run_synthesize(const Imdp& m, const PropertySpec& prop, double tol,
                               std::size_t max_iter, const std::string& policy_out,
                               const std::string& results_out) {
    const Diagnostics d = validate(m);
    if (!d.ok()) {
        std::string msg = "invalid IMDP (" + std::to_string(d.total) + " violations)";
        for (const auto& v : d.violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }
    prop.check_propositions(m.propositions());
    SynthesisOptions opts;
    opts.tolerance = tol;
    opts.max_iterations = max_iter;
    SynthesisResult r = interval_value_iteration(m, prop, opts);

    PolicyFile pf{m.num_states, m.num_actions, r.policy, r.schedule, m.manifest, m.params};
    std::ostringstream ps;
    write_policy(ps, pf);
    write_file(policy_out, ps.str());
    write_file(results_out, results_to_json(r, m.manifest).dump(2) + "\n");
    std::cout << "policy: " << policy_out << "\nresults: " << results_out << " (" << r.iterations
              << " sweeps, residual " << format_double(r.residual) << ")\n";
    return r;
}

int report_state(const SynthesisResult& r, std::size_t q0) {
    const Interval iv = satisfaction_interval(r, q0);
    std::cout << "q0=" << q0 << "  P in [" << format_double(iv.lo) << ", " << format_double(iv.hi)
              << "]  action " << r.policy[q0];
    if (!r.property.threshold) {
        std::cout << '\n';
        return kExitYes;
    }
    const Verdict v = verdict(iv, *r.property.threshold);
    std::cout << "  verdict " << to_string(v) << '\n';
    return exit_code(v);
}

int cmd_synthesize(const SynthArgs& a) {
    std::ifstream in(a.imdp);
    if (!in) throw Error("cannot open '" + a.imdp + "'");
    const Imdp m = read_imdp(in);
    const PropertySpec prop = PropertySpec::parse(a.property);
    const SynthesisResult r = run_synthesize(m, prop, a.tol, a.max_iter, a.policy_out, a.results_out);
    if (!a.initial) return kExitYes;
    if (*a.initial >= m.sink()) throw ConfigError("initial state must be a cell id");
    return report_state(r, *a.initial);
}

struct SimArgs {
    std::string config;
    GridArgs grid;
    std::string policy;
    std::string results;
    std::string property;
    std::size_t samples = 100'000;
    std::uint64_t seed = 0;
    std::string xi = "zero";
    std::string x0;
    std::optional<std::size_t> horizon;
    std::string report_out = "report.json";
    std::string trajectories_out;
    std::string manifest_out;
};

void check_manifest(const std::string& what, const std::string& found_hash,
                    const std::string& found_params, const ManifestParams& expected) {
    if (found_hash == expected.hash()) return;
    std::string diff = "no provenance recorded";
    if (!found_params.empty()) {
        try {
            diff = manifest_diff(expected, ManifestParams::parse(found_params));
        } catch (const ParseError&) {
            diff = "unreadable provenance line";
        }
    }
    throw ConfigError(what + " was not produced from this config and grid (" + diff + ")");
}

SimulationReport run_simulate(const RunConfig& cfg, const AbstractionParams& p,
                              const PolicyFile& pol, const SynthesisResult& res,
                              const PropertySpec& prop, const SimArgs& a,
                              const std::string& manifest) {
    const Partition part(cfg.system, p.eta);
    const ControlGrid grid(cfg.system, p.rho);
    if (pol.num_states != part.num_states() || pol.num_actions != grid.size()) {
        throw ConfigError("policy dimensions do not match the partition");
    }
    if (res.p_lo.size() != part.num_states()) {
        throw ConfigError("results do not match the partition");
    }
    if (a.samples == 0) throw ConfigError("N must be >= 1");
    if (!pol.schedule.empty() && (!prop.horizon || *prop.horizon != pol.schedule.size())) {
        throw ConfigError("policy has " + std::to_string(pol.schedule.size()) +
                          " steps but the property horizon differs");
    }
    const Controller ctrl = pol.schedule.empty() ? Controller(part, grid, pol.policy)
                                                 : Controller(part, grid, pol.schedule);

    SimulationReport rep;
    rep.x0 = parse_point(a.x0);
    if (rep.x0.size() != static_cast<std::size_t>(cfg.system.n)) {
        throw ConfigError("x0 must have " + std::to_string(cfg.system.n) + " coordinates");
    }
    rep.state = part.locate(rep.x0);
    if (rep.state == part.sink()) throw ConfigError("x0 lies outside W");

    McOptions mo;
    mo.samples = a.samples;
    mo.seed = a.seed;
    mo.xi = XiMode::parse(a.xi);
    mo.unbounded_horizon = a.horizon ? *a.horizon : std::max<std::size_t>(res.horizon_hint, 1);
    mo.keep_trajectories = !a.trajectories_out.empty();

    rep.estimate = monte_carlo(cfg.system, part, ctrl, rep.x0, prop, mo);
    rep.xi_mode = mo.xi.to_string();
    rep.interval = satisfaction_interval(res, rep.state);
    rep.verdict = soundness_check(rep.estimate, rep.interval);
    rep.property = prop.to_string();
    rep.manifest = manifest;

    write_file(a.report_out, report_to_json(rep).dump(2) + "\n");
    if (!a.trajectories_out.empty()) {
        std::ostringstream ts;
        write_trajectories_csv(ts, rep.estimate);
        write_file(a.trajectories_out, ts.str());
    }
    const auto& e = rep.estimate;
    std::cout << "state " << rep.state << ": p_emp=" << format_double(e.p_emp) << " ci=["
              << format_double(e.ci_lo) << ", " << format_double(e.ci_hi) << "] interval=["
              << format_double(rep.interval.lo) << ", " << format_double(rep.interval.hi)
              << "] -> " << to_string(rep.verdict) << '\n';
    if (e.truncation_warning) {
        std::cout << "warning: unbounded property evaluated at horizon " << e.horizon << '\n';
    }
    std::cout << "report: " << a.report_out << '\n';
    return rep;
}

int cmd_simulate(const SimArgs& a) {
    const RunConfig cfg = load_config(a.config);
    const AbstractionParams p = a.grid.resolve(cfg);
    const ManifestParams mp = manifest_params(cfg, p);

    std::ifstream pin(a.policy);
    if (!pin) throw Error("cannot open '" + a.policy + "'");
    const PolicyFile pol = read_policy(pin);
    check_manifest("policy " + a.policy, pol.manifest, pol.params, mp);

    const ResultsFile rf = results_from_json(nlohmann::ordered_json::parse(read_file(a.results)));
    if (rf.manifest != mp.hash()) {
        throw ConfigError("results " + a.results + " were not produced from this config and grid");
    }
    if (rf.result.policy != pol.policy) throw ConfigError("results and policy disagree");
    PropertySpec prop = rf.result.property;
    if (!a.property.empty()) {
        prop = PropertySpec::parse(a.property);
        if (prop.kind != rf.result.property.kind || prop.props != rf.result.property.props ||
            prop.avoid != rf.result.property.avoid || prop.horizon != rf.result.property.horizon) {
            throw ConfigError("property differs from the synthesized one (" +
                              rf.result.property.to_string() + ")");
        }
    }
    RunManifest rm{"simulate", a.config, mp, std::nullopt, a.samples, a.seed};
    const auto rep = run_simulate(cfg, p, pol, rf.result, prop, a, mp.hash());
    if (!a.manifest_out.empty()) rm.write(a.manifest_out);
    return exit_code(rep.verdict);
}

struct CertifyArgs {
    std::string config;
    GridArgs grid;
    bool suggest = false;
};

int cmd_certify(const CertifyArgs& a) {
    const RunConfig cfg = load_config(a.config);
    if (!cfg.system.theta2) throw ConfigError("no gap target (theta2) in the config");
    if (a.suggest) {
        const auto s = suggest_parameters(cfg.system);
        std::cout << "suggested: eta=" << format_double(s.eta) << " rho=" << format_double(s.rho)
                  << " k=" << format_double(s.k) << '\n';
        bool failed = false;
        print_certificate(cfg, s, failed);
        return failed ? kExitNo : kExitYes;
    }
    bool failed = false;
    print_certificate(cfg, a.grid.resolve(cfg), failed);
    return failed ? kExitNo : kExitYes;
}

struct HeatmapArgs {
    std::string config;
    GridArgs grid;
    std::string results;
    std::string out;
};

int cmd_heatmap(const HeatmapArgs& a) {
    const RunConfig cfg = load_config(a.config);
    const AbstractionParams p = a.grid.resolve(cfg);
    const ResultsFile rf = results_from_json(nlohmann::ordered_json::parse(read_file(a.results)));
    const ManifestParams mp = manifest_params(cfg, p);
    if (!rf.manifest.empty() && rf.manifest != mp.hash()) {
        throw ConfigError("results " + a.results + " were not produced from this config and grid");
    }
    const Partition part(cfg.system, p.eta);
    std::ostringstream os;
    write_heatmap_csv(os, part, rf.result);
    if (a.out.empty()) {
        std::cout << os.str();
    } else {
        write_file(a.out, os.str());
    }
    return kExitYes;
}

struct PipelineArgs {
    std::string config;
    GridArgs grid;
    std::string property;
    std::string out_dir = "out";
    std::size_t samples = 100'000;
    std::uint64_t seed = 0;
    std::string xi = "zero";
    std::string x0;
    std::optional<std::size_t> horizon;
    double tol = 1e-9;
    std::size_t max_iter = 100'000;
    bool refs = false;
};

int cmd_pipeline(const PipelineArgs& a) {
    const RunConfig cfg = load_config(a.config);
    const AbstractionParams p = a.grid.resolve(cfg);
    const PropertySpec prop = PropertySpec::parse(a.property);
    prop.check_propositions(cfg.system.propositions());
    if (a.samples == 0) throw ConfigError("N must be >= 1");
    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    RunManifest rm{"pipeline", a.config, manifest_params(cfg, p), a.tol, a.samples, a.seed};

    const auto abs = run_abstract(cfg, p, (dir / "model.imdp").string(),
                                  a.refs ? (dir / "references.txt").string() : std::string{});
    const auto res = run_synthesize(abs.abs.imdp, prop, a.tol, a.max_iter,
                                    (dir / "policy.txt").string(), (dir / "results.json").string());
    const PolicyFile pol{abs.abs.imdp.num_states, abs.abs.imdp.num_actions, res.policy, res.schedule,
                         abs.abs.imdp.manifest, abs.abs.imdp.params};
    SimArgs sa;
    sa.samples = a.samples;
    sa.seed = a.seed;
    sa.xi = a.xi;
    sa.x0 = a.x0;
    sa.horizon = a.horizon;
    sa.report_out = (dir / "report.json").string();
    const auto rep = run_simulate(cfg, p, pol, res, prop, sa, abs.abs.imdp.manifest);
    rm.write(dir / "manifest.json");
    return exit_code(rep.verdict);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robustly complete IMDP abstractions: build, synthesize, validate"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    AbstractArgs aa;
    auto* abs = app.add_subcommand("abstract", "build the interval MDP of a system config");
    abs->add_option("config", aa.config, "system config (YAML)")->required()->check(CLI::ExistingFile);
    aa.grid.add(abs);
    abs->add_option("-o,--out", aa.imdp_out, "IMDP output file");
    abs->add_option("--refs", aa.refs_out, "write the reference-measure record here");
    abs->add_option("--manifest", aa.manifest_out, "write the run manifest (with timestamps) here");

    SynthArgs sy;
    auto* syn = app.add_subcommand("synthesize", "robust policy synthesis on an IMDP file");
    syn->add_option("imdp", sy.imdp, "IMDP file")->required()->check(CLI::ExistingFile);
    syn->add_option("property", sy.property, "e.g. \"REACH_AVOID(goal, bad, 15) >= 0.9\"")->required();
    syn->add_option("--policy", sy.policy_out, "policy output file");
    syn->add_option("--results", sy.results_out, "results JSON output file");
    syn->add_option("--q0", sy.initial, "initial cell: print its interval and verdict");
    syn->add_option("--tol", sy.tol, "residual tolerance for unbounded properties");
    syn->add_option("--max-iter", sy.max_iter, "sweep limit for unbounded properties");

    SimArgs si;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo check of a synthesized interval");
    sim->add_option("config", si.config, "system config (YAML)")->required()->check(CLI::ExistingFile);
    sim->add_option("--policy", si.policy, "policy file")->required()->check(CLI::ExistingFile);
    sim->add_option("--results", si.results, "results JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--property", si.property, "must match the synthesized property");
    sim->add_option("--x0", si.x0, "initial state, comma separated")->required();
    sim->add_option("-N,--samples", si.samples, "number of trajectories");
    sim->add_option("--seed", si.seed, "random seed");
    sim->add_option("--xi", si.xi, "zero | corner(<d>) | uniform-ball");
    sim->add_option("--horizon", si.horizon, "horizon for unbounded properties");
    sim->add_option("--report", si.report_out, "report JSON output file");
    sim->add_option("--trajectories", si.trajectories_out, "per-trajectory CSV output file");
    sim->add_option("--manifest", si.manifest_out, "write the run manifest (with timestamps) here");
    si.grid.add(sim);

    CertifyArgs ce;
    auto* cer = app.add_subcommand("certify", "check the robust-completeness inequality");
    cer->add_option("config", ce.config, "system config (YAML)")->required()->check(CLI::ExistingFile);
    cer->add_flag("--suggest", ce.suggest, "propose eta, rho, k that satisfy the inequality");
    ce.grid.add(cer);

    HeatmapArgs hm;
    auto* hea = app.add_subcommand("heatmap", "export per-cell results as CSV");
    hea->add_option("config", hm.config, "system config (YAML)")->required()->check(CLI::ExistingFile);
    hea->add_option("--results", hm.results, "results JSON")->required()->check(CLI::ExistingFile);
    hea->add_option("-o,--out", hm.out, "CSV output file (default stdout)");
    hm.grid.add(hea);

    PipelineArgs pl;
    auto* pip = app.add_subcommand("pipeline", "abstract, synthesize and simulate in one run");
    pip->add_option("config", pl.config, "system config (YAML)")->required()->check(CLI::ExistingFile);
    pip->add_option("property", pl.property, "property with optional threshold")->required();
    pip->add_option("--x0", pl.x0, "initial state, comma separated")->required();
    pip->add_option("--out-dir", pl.out_dir, "output directory");
    pip->add_option("-N,--samples", pl.samples, "number of trajectories");
    pip->add_option("--seed", pl.seed, "random seed");
    pip->add_option("--xi", pl.xi, "zero | corner(<d>) | uniform-ball");
    pip->add_option("--horizon", pl.horizon, "horizon for unbounded properties");
    pip->add_option("--tol", pl.tol, "residual tolerance for unbounded properties");
    pip->add_option("--max-iter", pl.max_iter, "sweep limit for unbounded properties");
    pip->add_flag("--refs", pl.refs, "also write the reference-measure record");
    pl.grid.add(pip);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInputError;
    }

    try {
        if (*abs) return cmd_abstract(aa);
        if (*syn) return cmd_synthesize(sy);
        if (*sim) return cmd_simulate(si);
        if (*cer) return cmd_certify(ce);
        if (*hea) return cmd_heatmap(hm);
        if (*pip) return cmd_pipeline(pl);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const nlohmann::ordered_json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
