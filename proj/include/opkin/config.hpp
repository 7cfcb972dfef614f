#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "opkin/fokker_planck.hpp"
#include "opkin/kinetic.hpp"
#include "opkin/limit_lab.hpp"
#include "opkin/stationary.hpp"

namespace opkin {

inline constexpr const char* kToolVersion = "opinion-kinetics 0.1.0";

// configuration / validation problem; the CLI maps it to exit code 1
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sectioned key-value text:  [section] / key = value / # comments.
struct RawEntry {
    std::string value;
    int line = 0;
    bool consumed = false;
};
struct RawConfig {
    // section -> key -> entry; duplicate keys are rejected at parse time
    std::map<std::string, std::map<std::string, RawEntry>> sections;
};

RawConfig parse_ini(const std::string& text);

// canonical echo of a fully resolved configuration: every key that shaped the
// run, defaults included, as strings
using ResolvedConfig = std::map<std::string, std::map<std::string, std::string>>;

struct OutputOptions {
    bool timing = false;
};

struct SimulateCommand {
    SimConfig sim;
    OutputOptions out;
};

struct FpSolveCommand {
    FPEquationSpec eq;
    InitSpec init;
    int cells = 400;
    double tau_end = 40.0;
    double record_every = 1.0;
    FPControl control;
    OutputOptions out;
};

struct SteadyStateCommand {
    StationarySpec spec{SteadyD::SqrtOneMinusWSquared, 0.0, 1.0};
    int cells = 400;
    OutputOptions out;
};

struct SweepCommand {
    SweepConfig sweep;
    OutputOptions out;
};

struct MomentCheckCommand {
    SimConfig sim;
    double fit_window = 0.0; // fit over t <= fit_window; 0 = all records
    OutputOptions out;
};

// Per-command resolution: enforces every nested invariant, rejects unknown
// keys with line numbers, fills documented defaults, and returns the
// canonical echo for the manifest plus any warnings.
struct Resolution {
    ResolvedConfig resolved;
    std::vector<std::string> warnings;
};

SimulateCommand resolve_simulate(const RawConfig& raw, std::uint64_t seed, Resolution& res);
FpSolveCommand resolve_fp_solve(const RawConfig& raw, Resolution& res);
SteadyStateCommand resolve_steady_state(const RawConfig& raw, Resolution& res);
SweepCommand resolve_sweep(const RawConfig& raw, std::uint64_t seed, Resolution& res);
MomentCheckCommand resolve_moment_check(const RawConfig& raw, std::uint64_t seed, Resolution& res);

// Run manifest: the resolved configuration together with command, seed and
// tool version; replaying it reproduces the run's outputs byte for byte.
struct RunManifest {
    std::string command;
    std::string version = kToolVersion;
    std::uint64_t seed = 0;
    std::string timestamp; // informational only
    ResolvedConfig config;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);
RawConfig manifest_to_raw(const RunManifest& m);

std::string current_timestamp_utc();

} // namespace opkin
