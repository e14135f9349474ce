#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qas/harness.h"

namespace qas {

std::string CircuitProgram::to_string() const {
    std::string out;
    for (const auto& g : gates) {
        if (!out.empty()) out += ' ';
        out += g.to_string();
    }
    return out;
}

CircuitProgram parse_circuit(const std::string& text) {
    CircuitProgram program;
    std::string token;
    int depth = 0;
    // Split on whitespace or ';' outside parentheses.
    auto flush = [&] {
        if (!token.empty()) program.gates.push_back(parse_gate_action(token));
        token.clear();
    };
    for (char c : text) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (depth == 0 && (c == ';' || std::isspace(static_cast<unsigned char>(c)))) {
            flush();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            token += c;
        }
    }
    if (depth != 0) throw std::invalid_argument("unbalanced parentheses in circuit");
    flush();
    return program;
}

CircuitProgram program_from_actions(const ActionSet& actions,
                                    const std::vector<std::size_t>& indices,
                                    CircuitProgram::Provenance provenance) {
    CircuitProgram program;
    program.provenance = provenance;
    for (std::size_t i : indices) program.gates.push_back(actions[i]);
    return program;
}

std::optional<CircuitProgram> brute_force_search(int n_qubits,
                                                 const PureState& target,
                                                 int max_depth,
                                                 double threshold) {
    if (max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
    if (target.n_qubits() != n_qubits) {
        throw std::invalid_argument("target qubit count mismatch");
    }
    const ActionSet actions = ActionSet::build(n_qubits);
    const double branching = double(actions.size());
    double budget = 0.0;
    for (int d = 0; d <= max_depth; ++d) budget += std::pow(branching, d);
    if (budget > 1e8) {
        throw std::length_error("search space of " + std::to_string(budget) +
                                " sequences exceeds the 1e8 budget");
    }

    const PureState start(n_qubits);
    if (fidelity(start, target) >= threshold) {
        CircuitProgram empty;
        empty.provenance = CircuitProgram::Provenance::Oracle;
        return empty;
    }

    // Iterative deepening; within a depth, sequences are visited in
    // lexicographic order of action index.
    for (int depth = 1; depth <= max_depth; ++depth) {
        std::vector<PureState> states{start};
        std::vector<std::size_t> path;
        states.reserve(depth + 1);
        path.reserve(depth);
        std::vector<std::size_t> next{0};
        while (!next.empty()) {
            const std::size_t level = next.size() - 1;
            if (next[level] == actions.size()) {
                next.pop_back();
                if (!path.empty()) path.pop_back();
                states.pop_back();
                continue;
            }
            const std::size_t a = next[level]++;
            const GateAction& act = actions[a];
            PureState s = apply_gate(states.back(), act.gate, act.qubits);
            if (int(level) + 1 == depth) {
                if (fidelity(s, target) >= threshold) {
                    path.push_back(a);
                    return program_from_actions(actions, path,
                                                CircuitProgram::Provenance::Oracle);
                }
            } else {
                states.push_back(std::move(s));
                path.push_back(a);
                next.push_back(0);
            }
        }
    }
    return std::nullopt;
}

ReplayReport replay_circuit(const CircuitProgram& program,
                            const PureState& target,
                            const std::optional<NoiseSpec>& noise) {
    const int n = target.n_qubits();
    for (const auto& g : program.gates) {
        for (int q : g.qubits) {
            if (q < 0 || q >= n) {
                throw std::out_of_range("gate " + g.to_string() +
                                        " addresses a qubit outside 0.." +
                                        std::to_string(n - 1));
            }
        }
    }

    ReplayReport report;
    PureState pure(n);
    for (const auto& g : program.gates) pure = apply_gate(pure, g.gate, g.qubits);
    report.noise_free_fidelity = fidelity(pure, target);

    if (noise && noise->p_gate > 0.0) {
        noise->validate();
        MixedState mixed(n);
        for (const auto& g : program.gates) {
            mixed = apply_gate(mixed, g.gate, g.qubits, *noise);
        }
        report.noisy_fidelity = fidelity(mixed, target);
    }
    report.diagram = circuit_diagram(program, n);
    return report;
}

std::string circuit_diagram(const CircuitProgram& program, int n_qubits) {
    const std::size_t label_width = std::to_string(n_qubits - 1).size() + 2;
    std::vector<std::string> wires(n_qubits);
    for (int q = 0; q < n_qubits; ++q) {
        wires[q] = "q" + std::to_string(q) + ":";
        wires[q].resize(label_width, ' ');
        wires[q] += " --";
    }

    // Controls are '*', CNOT targets '+', wires crossed by a CNOT '|'.
    for (const auto& g : program.gates) {
        std::vector<std::string> cells(n_qubits, "-");
        if (g.gate.arity() == 2) {
            const int c = g.qubits[0];
            const int t = g.qubits[1];
            for (int q = std::min(c, t) + 1; q < std::max(c, t); ++q) cells[q] = "|";
            cells[c] = "*";
            cells[t] = "+";
        } else {
            cells[g.qubits[0]] = g.gate.name();
        }
        std::size_t width = 0;
        for (const auto& c : cells) width = std::max(width, c.size());
        for (int q = 0; q < n_qubits; ++q) {
            std::string cell = cells[q];
            cell.resize(width, '-');
            wires[q] += cell + "--";
        }
    }
    std::string out;
    for (const auto& w : wires) out += w + '\n';
    return out;
}

}  // namespace qas
