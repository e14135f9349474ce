#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "qas/harness.h"

namespace qas {

SeedOutcome run_seed(const RunConfig& config, std::uint64_t seed) {
    QuantumCircuitEnv env(config.env_config(seed));
    TrainResult trained = train(env, config.algorithm, config.hyper,
                                config.episodes, seed);

    SeedOutcome out;
    out.seed = seed;
    out.records.reserve(trained.episodes.size());
    for (const auto& e : trained.episodes) {
        out.records.push_back(
            {seed, e.episode, e.episode_return, e.final_fidelity, e.length});
    }
    const auto greedy = greedy_actions(env, trained.model.actor);
    out.greedy_circuit = program_from_actions(env.action_set(), greedy,
                                              CircuitProgram::Provenance::Agent);
    out.greedy_fidelity =
        replay_circuit(out.greedy_circuit, env.config().target).noise_free_fidelity;
    return out;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file " + path.string());
    return out;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config) {
    config.validate();
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec || !std::filesystem::is_directory(config.out_dir)) {
        throw std::runtime_error("cannot create output directory " +
                                 config.out_dir.string());
    }
    open_output(config.out_dir / "config.ini") << serialize_config(config);

    ExperimentResult result;
    result.config = config;
    result.seeds.resize(config.seeds.size());

    // Each seed owns its environment, model and CSV file.
    auto work = [&](std::size_t i) {
        const std::uint64_t seed = config.seeds[i];
        result.seeds[i] = run_seed(config, seed);
        auto csv = open_output(config.out_dir /
                               ("seed_" + std::to_string(seed) + ".csv"));
        write_metric_csv(csv, result.seeds[i].records);
    };
    for (std::size_t start = 0; start < config.seeds.size();
         start += std::size_t(config.jobs)) {
        std::vector<std::future<void>> batch;
        const std::size_t stop =
            std::min(config.seeds.size(), start + std::size_t(config.jobs));
        for (std::size_t i = start; i < stop; ++i) {
            batch.push_back(std::async(config.jobs > 1 ? std::launch::async
                                                       : std::launch::deferred,
                                       work, i));
        }
        for (auto& f : batch) f.get();
    }

    std::vector<std::vector<MetricRecord>> series;
    for (const auto& s : result.seeds) series.push_back(s.records);
    result.summary = summarize(series);
    {
        auto csv = open_output(config.out_dir / "summary.csv");
        write_summary_csv(csv, result.summary);
    }
    if (result.summary.size() >= 2) {
        emit_plot(result.summary, config.out_dir / "plot.svg",
                  config.name + " (" + to_string(config.algorithm) + ", " +
                      std::to_string(config.seeds.size()) + " seeds)");
    }

    auto circuits = open_output(config.out_dir / "circuits.txt");
    circuits << std::setprecision(12);
    for (const auto& s : result.seeds) {
        circuits << "seed " << s.seed << ": " << s.greedy_circuit.to_string()
                 << "  fidelity " << s.greedy_fidelity << '\n';
    }
    return result;
}

}  // namespace qas
