#pragma once

#include "qcdmrg/error.hpp"
#include "qcdmrg/sim_modes.hpp"
#include "qcdmrg/topology.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qcdmrg {

inline constexpr int kResultsSchemaVersion = 1;

/// Raised for anything wrong with a run config; the CLI maps it to exit 1.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string &what) : Error("config", what) {}
};

struct CircuitSpec {
    std::string kind = "sequence_I"; // sequence_I | sequence_II | sequence_III | file
    // sequences I/II and the compile target of sequence III
    std::size_t n_b = 0, n_c = 0;
    bool uniform_columns = false;
    std::size_t depth = 0;
    // file
    std::string path;
    // sequence III
    std::size_t n_qubits = 0;
    double edge_prob = 0.0;
    std::size_t p_layers = 1;
    bool compile = true;
    std::vector<double> betas, gammas; // drawn from the params seed when empty
    std::optional<std::size_t> target_n2g;
    std::size_t n2g_tolerance = 0;
    std::size_t max_retries = 1000;
};

struct SeedStreams {
    std::vector<std::uint64_t> circuit; // one sweep point per entry
    std::optional<std::uint64_t> init;
    std::optional<std::uint64_t> sampler;
    std::optional<std::uint64_t> params; // sequence III angles; circuit seed + 1000 if unset
};

struct ClosedSpec {
    std::optional<std::size_t> D1, D2, D3;
    std::vector<std::string> bitstrings;
    bool reuse_checkpoint = true;
    std::size_t max_middle_elements = std::size_t{1} << 27;
};

struct SampleSpec {
    std::string method = "metropolis"; // metropolis | conditional
    std::string amplitudes = "open";   // open | closed | exact
    std::size_t n_samples = 1000;
    std::size_t L = 10;
    std::optional<std::size_t> burn_in;
};

struct OutputPaths {
    std::string metrics;    // CSV, one row per point
    std::string results;    // versioned JSON
    std::string trace;      // sweep-trace CSV
    std::string checkpoint; // MPS checkpoint (single-point runs)
    std::string samples;    // sampler output, or input for analyze
    std::string report;     // compare output CSV
};

struct RunConfig {
    CircuitSpec circuit;
    std::string grouping = "V1";
    std::vector<std::size_t> chi{16}; // one sweep point per entry
    std::size_t K = 1;
    std::size_t n_s = 1;
    std::optional<double> convergence_tol;
    std::string init = "truncated"; // truncated | random
    std::string mode = "open";      // open | closed | sample | analyze
    bool oracle = false;            // also compute exact F and F_B
    std::size_t oracle_max_qubits = 26;
    std::size_t jobs = 1;
    SeedStreams seeds;
    ClosedSpec closed;
    SampleSpec sample;
    OutputPaths output;
};

/// Grouping names accepted in configs besides the topology-based
/// V1, V2, H1, H2, D1, D2: "qubits" (one per qubit) and "blocks:a,b,..."
/// (consecutive qubit ids).
std::vector<std::string> valid_grouping_names();

/// Parses the config schema; unknown keys and type mismatches throw
/// ConfigError with the offending key.
RunConfig parse_config(const nlohmann::json &doc);
RunConfig load_config(const std::string &path);
nlohmann::json config_to_json(const RunConfig &cfg);
/// Applies "a.b.c=value" where value is parsed as JSON when possible and
/// kept as a string otherwise.
void apply_override(nlohmann::json &doc, const std::string &assignment);

/// Schema and cross-field checks; empty when the config is valid. Reads a
/// circuit file if one is named but writes nothing.
std::vector<std::string> validate(const RunConfig &cfg);

struct GeneratedCircuit {
    Circuit circuit;
    std::optional<GridTopology> topology;
    std::string id;
    std::uint64_t seed;  // seed actually used (after N_2g retries)
    std::size_t retries; // rejected sequence III draws
};
GeneratedCircuit generate_circuit(const CircuitSpec &spec, std::uint64_t seed,
                                  std::optional<std::uint64_t> params_seed = std::nullopt);
Grouping make_grouping(const std::string &name, const GeneratedCircuit &gc);

struct RunSummary {
    std::size_t points = 0;
    std::vector<std::string> files;
};

/// Executes the config's mode. Throws ConfigError for invalid configs and
/// module errors for numeric failures.
RunSummary run(const RunConfig &cfg);

struct CompareRow {
    std::size_t D;
    std::size_t n_2g;
    double F, F_tilde, F_B, sqrt_F;
};
inline constexpr const char *kCompareHeader = "D,N_2g,F,F_tilde,F_B,sqrt_F,F_B_over_sqrt_F";

/// Depth sweep of an open run against the dense oracle, one row per
/// compression step plus the D = 0 row. Uses the first chi and circuit seed.
std::vector<CompareRow> compare_against_oracle(const RunConfig &cfg);
void write_compare_report(std::ostream &out, const std::vector<CompareRow> &rows);

} // namespace qcdmrg
