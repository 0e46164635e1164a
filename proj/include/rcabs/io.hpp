#pragma once

#include "rcabs/abstraction.hpp"
#include "rcabs/engine.hpp"
#include "rcabs/simulator.hpp"
#include "rcabs/system.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rcabs {

/// System plus the grid parameters found in the config document.
struct RunConfig {
    SystemSpec system;
    std::optional<double> eta;
    std::optional<double> rho;
    std::optional<double> k;
    std::string text; // raw document, hashed into the manifest
};

/// Parses a YAML config document. Schema errors carry the line number.
RunConfig parse_config(std::string text);
RunConfig load_config(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Inputs that determine an abstraction: the config bytes and the grid.
struct ManifestParams {
    std::string config_sha256;
    double eta = 0.0;
    double rho = 0.0;
    double k = 0.0;

    /// "config=<hex> eta=<v> rho=<v> k=<v>"
    std::string to_string() const;
    static ManifestParams parse(std::string_view line);
    /// SHA-256 over the canonical parameter line.
    std::string hash() const;

    friend bool operator==(const ManifestParams&, const ManifestParams&) = default;
};

ManifestParams manifest_params(const RunConfig& cfg, const AbstractionParams& p);

/// Human-readable list of the fields that differ, e.g. "eta: 0.25 vs 0.125".
std::string manifest_diff(const ManifestParams& expected, const ManifestParams& found);

// Policy file:
//   policy <num_states> <num_actions> [<steps>]
//   # manifest <hash>
//   # params <...>
//   pi <state> <action>          one line per non-sink state
// With <steps> every pi line lists one action per step: pi <state> <a_0> .. <a_steps-1>.
struct PolicyFile {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<std::size_t> policy; // per state, sink included; step 0 of a schedule
    std::vector<std::vector<std::size_t>> schedule; // empty for stationary policies
    std::string manifest;
    std::string params;

    friend bool operator==(const PolicyFile&, const PolicyFile&) = default;
};

void write_policy(std::ostream& os, const PolicyFile& p);
PolicyFile read_policy(std::istream& is);

nlohmann::ordered_json results_to_json(const SynthesisResult& r, const std::string& manifest);
struct ResultsFile {
    SynthesisResult result;
    std::string manifest;
};
ResultsFile results_from_json(const nlohmann::ordered_json& j);

struct SimulationReport {
    McEstimate estimate;
    std::string xi_mode;
    Interval interval;
    Soundness verdict = Soundness::Inconclusive;
    std::vector<double> x0;
    std::size_t state = 0;
    std::string property;
    std::string manifest;
};

nlohmann::ordered_json report_to_json(const SimulationReport& r);

/// One row per kept trajectory: index, success flag, tau, then x_0..x_T
/// flattened.
void write_trajectories_csv(std::ostream& os, const McEstimate& est);

/// "cell,c1..cn,p_lo,p_hi,action", one row per cell in state order; the
/// sink is not exported.
void write_heatmap_csv(std::ostream& os, const Partition& part, const SynthesisResult& r);

/// Parses "a,b,c" into doubles.
std::vector<double> parse_point(std::string_view text);

} // namespace rcabs
