// Command-line entry point: train, search, replay and plot.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "qas/harness.h"

namespace {

std::string number(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

int run_train(const std::string& config_path,
              const qas::ConfigOverrides& overrides) {
    qas::RunConfig config = config_path.empty()
                                ? qas::parse_config("", overrides)
                                : qas::load_config(config_path, overrides);
    config.validate();
    std::cout << "training " << config.name << ": "
              << qas::to_string(config.algorithm) << ", " << config.n_qubits
              << " qubits, target " << config.target << ", " << config.episodes
              << " episodes x " << config.seeds.size() << " seeds -> "
              << config.out_dir.string() << '\n';
    const auto result = qas::run_experiment(config);
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& s : result.seeds) {
        std::vector<double> returns;
        for (const auto& r : s.records) returns.push_back(r.episode_return);
        std::cout << "seed " << s.seed << ": final-500 mean return "
                  << qas::tail_mean(returns, 500) << ", greedy circuit "
                  << s.greedy_circuit.to_string() << " (F = " << s.greedy_fidelity
                  << ")\n";
    }
    return 0;
}

int run_search(int n_qubits, const std::string& target, int depth,
               double threshold) {
    const auto state = qas::resolve_target(target);
    if (n_qubits == 0) n_qubits = state.n_qubits();
    const auto found = qas::brute_force_search(n_qubits, state, depth, threshold);
    if (!found) {
        std::cout << "not found: no circuit of depth <= " << depth
                  << " reaches fidelity " << threshold << '\n';
        return 0;
    }
    const auto report = qas::replay_circuit(*found, state);
    std::cout << found->to_string() << '\n'
              << report.diagram << std::setprecision(12)
              << "fidelity " << report.noise_free_fidelity << '\n';
    return 0;
}

int run_replay(const std::string& circuit, const std::string& target,
               double p_gate) {
    const auto state = qas::resolve_target(target);
    const auto program = qas::parse_circuit(circuit);
    std::optional<qas::NoiseSpec> noise;
    if (p_gate > 0.0) noise = qas::NoiseSpec{p_gate, 0.0};
    const auto report = qas::replay_circuit(program, state, noise);
    std::cout << report.diagram << std::setprecision(12)
              << "noise-free fidelity " << report.noise_free_fidelity << '\n';
    if (report.noisy_fidelity) {
        std::cout << "noisy fidelity (p_gate = " << p_gate << ") "
                  << *report.noisy_fidelity << '\n';
    }
    return 0;
}

int run_plot(const std::string& summary_path, const std::string& out,
             const std::string& title) {
    std::ifstream in(summary_path);
    if (!in) throw std::runtime_error("cannot read " + summary_path);
    qas::emit_plot(qas::read_summary_csv(in), out, title);
    std::cout << "wrote " << out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum architecture search with deep reinforcement learning"};
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "Train agents over several seeds");
    std::string config_path;
    std::string algo, target, seeds, out;
    std::optional<int> episodes;
    std::optional<double> threshold, p_gate, p_meas;
    train->add_option("config", config_path, "INI experiment file")
        ->check(CLI::ExistingFile);
    train->add_option("--algo", algo, "a2c or ppo");
    train->add_option("--target", target, "bell, ghz<n> or amplitude file");
    train->add_option("--episodes", episodes, "Episodes per seed");
    train->add_option("--seeds", seeds, "Comma-separated seed list");
    train->add_option("--threshold", threshold, "Fidelity threshold");
    train->add_option("--p-gate", p_gate, "Depolarizing probability per gate");
    train->add_option("--p-meas", p_meas, "Readout flip probability");
    train->add_option("--out", out, "Output directory");

    auto* search = app.add_subcommand("search", "Brute-force shortest circuit");
    int search_n = 0;
    std::string search_target = "bell";
    int depth = 3;
    double search_threshold = 0.99;
    search->add_option("--n", search_n, "Qubit count (default: from target)");
    search->add_option("--target", search_target, "bell, ghz<n> or amplitude file");
    search->add_option("--depth", depth, "Maximum circuit depth");
    search->add_option("--threshold", search_threshold, "Fidelity threshold");

    auto* replay = app.add_subcommand("replay", "Evaluate a gate list");
    std::string circuit;
    std::string replay_target = "bell";
    double replay_p_gate = 0.0;
    replay->add_option("circuit", circuit, "e.g. \"H(1) CNOT(1,0)\"")->required();
    replay->add_option("--target", replay_target, "bell, ghz<n> or amplitude file");
    replay->add_option("--p-gate", replay_p_gate, "Also simulate with gate noise");

    auto* plot = app.add_subcommand("plot", "Render summary.csv as SVG");
    std::string summary_path, plot_out = "plot.svg", title;
    plot->add_option("summary", summary_path, "summary.csv")->required();
    plot->add_option("--out", plot_out, "SVG path");
    plot->add_option("--title", title, "Plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train) {
            qas::ConfigOverrides o;
            if (!algo.empty()) o["experiment.algorithm"] = algo;
            if (!target.empty()) o["env.target"] = target;
            if (episodes) o["experiment.episodes"] = std::to_string(*episodes);
            if (!seeds.empty()) o["experiment.seeds"] = seeds;
            if (threshold) o["env.threshold"] = number(*threshold);
            if (p_gate) o["env.p_gate"] = number(*p_gate);
            if (p_meas) o["env.p_meas"] = number(*p_meas);
            if (!out.empty()) o["experiment.out"] = out;
            return run_train(config_path, o);
        }
        if (*search) return run_search(search_n, search_target, depth, search_threshold);
        if (*replay) return run_replay(circuit, replay_target, replay_p_gate);
        if (*plot) return run_plot(summary_path, plot_out, title);
    } catch (const qas::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
