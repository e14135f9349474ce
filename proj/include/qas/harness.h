#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qas/agents.h"
#include "qas/env.h"
#include "qas/qsim.h"

namespace qas {

/// Raised for anything wrong with a run configuration; the CLI maps it to
/// exit code 1.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string name = "experiment";
    Algorithm algorithm = Algorithm::PPO;
    int n_qubits = 2;
    std::string target = "bell";  // "bell", "ghz<n>" or an amplitude file
    double fidelity_threshold = 0.99;
    NoiseSpec noise;
    int episodes = 5000;
    int max_steps = 20;
    double step_penalty = 0.01;
    int shots = 0;
    AgentHyper hyper = AgentHyper::ppo_defaults();
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    std::filesystem::path out_dir = "runs/experiment";
    int jobs = 1;

    /// Resolves the target and checks every field; throws ConfigError.
    void validate() const;
    EnvConfig env_config(std::uint64_t seed) const;
};

/// Key/value overrides in "section.key" form, e.g. {"agent.lr", "0.01"}.
using ConfigOverrides = std::map<std::string, std::string>;

/// INI text with [experiment], [env] and [agent] sections. Agent keys that
/// are absent take the defaults of the configured algorithm.
RunConfig parse_config(const std::string& ini_text,
                       const ConfigOverrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const ConfigOverrides& overrides = {});
std::string serialize_config(const RunConfig& config);

/// "bell" -> Bell state, "ghz<n>" -> n-qubit GHZ, anything else is read as a
/// target amplitude file.
PureState resolve_target(const std::string& spec);

// --- metrics -----------------------------------------------------------------

struct MetricRecord {
    std::uint64_t seed = 0;
    int episode = 0;
    double episode_return = 0.0;
    double final_fidelity = 0.0;
    int length = 0;
};

struct SummaryRow {
    int episode = 0;
    double mean_return = 0.0;
    double std_return = 0.0;
    double mean_fidelity = 0.0;
    double std_fidelity = 0.0;
    double mean_length = 0.0;
};

inline constexpr const char* kMetricCsvHeader = "seed,episode,return,fidelity,length";
inline constexpr const char* kSummaryCsvHeader =
    "episode,mean_return,std_return,mean_fidelity,std_fidelity,mean_length";

/// Across-seed mean and population standard deviation per episode. Every
/// series must have the same length.
std::vector<SummaryRow> summarize(
    const std::vector<std::vector<MetricRecord>>& per_seed);

void write_metric_csv(std::ostream& out, const std::vector<MetricRecord>& rows);
std::vector<MetricRecord> read_metric_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(std::istream& in);

// --- circuits ----------------------------------------------------------------

struct CircuitProgram {
    enum class Provenance { Agent, Oracle, User };

    std::vector<GateAction> gates;
    Provenance provenance = Provenance::User;

    /// Space-separated gate list, e.g. "H(1) CNOT(1,0)".
    std::string to_string() const;
};

/// Parses a gate list separated by whitespace or ';'.
CircuitProgram parse_circuit(const std::string& text);

CircuitProgram program_from_actions(const ActionSet& actions,
                                    const std::vector<std::size_t>& indices,
                                    CircuitProgram::Provenance provenance);

/// Shortest action sequence from |0...0> reaching `threshold` fidelity,
/// lexicographically smallest by action index among the shortest. Throws
/// std::length_error when more than 1e8 sequences would be enumerated.
std::optional<CircuitProgram> brute_force_search(int n_qubits,
                                                 const PureState& target,
                                                 int max_depth,
                                                 double threshold);

struct ReplayReport {
    double noise_free_fidelity = 0.0;
    std::optional<double> noisy_fidelity;
    std::string diagram;
};

/// Runs the program on |0...0>; the noisy fidelity is filled in when
/// `noise` has a nonzero gate error.
ReplayReport replay_circuit(const CircuitProgram& program,
                            const PureState& target,
                            const std::optional<NoiseSpec>& noise = {});

/// ASCII wire diagram, one line per qubit.
std::string circuit_diagram(const CircuitProgram& program, int n_qubits);

// --- plotting ----------------------------------------------------------------

inline constexpr int kMovingAverageWindow = 100;

std::vector<double> moving_average(const std::vector<double>& values,
                                   int window);

/// Episode on x, mean return line, +-1 std band and moving-average overlay.
std::string render_plot_svg(const std::vector<SummaryRow>& summary,
                            const std::string& title);
void emit_plot(const std::vector<SummaryRow>& summary,
               const std::filesystem::path& svg_path,
               const std::string& title = "");

// --- experiments ---------------------------------------------------------------

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::vector<MetricRecord> records;
    CircuitProgram greedy_circuit;
    double greedy_fidelity = 0.0;
};

struct ExperimentResult {
    RunConfig config;
    std::vector<SeedOutcome> seeds;
    std::vector<SummaryRow> summary;
};

/// Trains one seed in memory without touching the filesystem.
SeedOutcome run_seed(const RunConfig& config, std::uint64_t seed);

/// Trains every seed and writes seed_<s>.csv, summary.csv, plot.svg,
/// circuits.txt and the resolved config.ini into config.out_dir.
ExperimentResult run_experiment(const RunConfig& config);

/// Mean of `values` over the trailing `window` entries.
double tail_mean(const std::vector<double>& values, std::size_t window);

}  // namespace qas
