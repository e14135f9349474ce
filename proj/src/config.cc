#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "qas/harness.h"

namespace qas {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "experiment.name",   "experiment.algorithm", "experiment.episodes",
        "experiment.seeds",  "experiment.out",       "experiment.jobs",
        "env.n_qubits",      "env.target",           "env.threshold",
        "env.max_steps",     "env.p_gate",           "env.p_meas",
        "env.step_penalty",  "env.shots",            "agent.gamma",
        "agent.lr",          "agent.clip",           "agent.epochs",
        "agent.horizon",     "agent.value_coef",     "agent.entropy_coef",
    };
    return keys;
}

template <typename T>
T get_or(const pt::ptree& tree, const std::string& key, T fallback) {
    if (!tree.get_child_optional(key)) return fallback;
    try {
        return tree.get<T>(key);
    } catch (const pt::ptree_bad_data&) {
        throw ConfigError("bad value for " + key + ": \"" +
                          tree.get<std::string>(key) + "\"");
    }
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (v < 0 || item.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::invalid_argument(item);
            }
            seeds.push_back(static_cast<std::uint64_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("bad seed \"" + item + "\" in seed list");
        }
    }
    if (seeds.empty()) throw ConfigError("seed list is empty");
    return seeds;
}

RunConfig from_tree(const pt::ptree& tree) {
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw ConfigError("key \"" + section + "\" must be inside a section");
        }
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            if (!known_keys().count(full)) {
                throw ConfigError("unknown config key " + full);
            }
        }
    }

    RunConfig c;
    c.name = get_or<std::string>(tree, "experiment.name", c.name);
    try {
        c.algorithm = parse_algorithm(
            get_or<std::string>(tree, "experiment.algorithm", "ppo"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    c.episodes = get_or(tree, "experiment.episodes", c.episodes);
    if (auto s = tree.get_optional<std::string>("experiment.seeds")) {
        c.seeds = parse_seeds(*s);
    }
    c.out_dir = get_or<std::string>(tree, "experiment.out",
                                    "runs/" + c.name);
    c.jobs = get_or(tree, "experiment.jobs", c.jobs);

    c.target = get_or<std::string>(tree, "env.target", c.target);
    if (auto n = tree.get_optional<std::string>("env.n_qubits")) {
        c.n_qubits = get_or(tree, "env.n_qubits", 0);
    } else {
        try {
            c.n_qubits = resolve_target(c.target).n_qubits();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("invalid target: ") + e.what());
        }
    }
    c.fidelity_threshold = get_or(tree, "env.threshold", c.fidelity_threshold);
    c.max_steps = get_or(tree, "env.max_steps", c.max_steps);
    c.noise.p_gate = get_or(tree, "env.p_gate", 0.0);
    c.noise.p_meas = get_or(tree, "env.p_meas", 0.0);
    c.step_penalty = get_or(tree, "env.step_penalty", c.step_penalty);
    c.shots = get_or(tree, "env.shots", c.shots);

    const AgentHyper d = AgentHyper::defaults_for(c.algorithm);
    c.hyper.gamma = get_or(tree, "agent.gamma", d.gamma);
    c.hyper.learning_rate = get_or(tree, "agent.lr", d.learning_rate);
    c.hyper.clip = get_or(tree, "agent.clip", d.clip);
    c.hyper.epochs = get_or(tree, "agent.epochs", d.epochs);
    c.hyper.horizon = get_or(tree, "agent.horizon", d.horizon);
    c.hyper.value_coef = get_or(tree, "agent.value_coef", d.value_coef);
    c.hyper.entropy_coef = get_or(tree, "agent.entropy_coef", d.entropy_coef);
    return c;
}

}  // namespace

PureState resolve_target(const std::string& spec) {
    if (spec == "bell") return bell_state();
    if (spec.size() > 3 && spec.rfind("ghz", 0) == 0 &&
        spec.find_first_not_of("0123456789", 3) == std::string::npos) {
        return ghz_state(std::stoi(spec.substr(3)));
    }
    return load_target_file(spec);
}

void RunConfig::validate() const {
    if (name.empty()) throw ConfigError("experiment name is empty");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    if (seeds.empty()) throw ConfigError("seed list is empty");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    try {
        hyper.validate(algorithm);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid hyperparameter: ") + e.what());
    }
    PureState t(1);
    try {
        t = resolve_target(target);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid target: ") + e.what());
    }
    if (t.n_qubits() != n_qubits) {
        throw ConfigError("invalid target: " + std::to_string(t.n_qubits()) +
                          "-qubit target for n_qubits = " +
                          std::to_string(n_qubits));
    }
    try {
        env_config(0).validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid environment: ") + e.what());
    }
}

EnvConfig RunConfig::env_config(std::uint64_t seed) const {
    EnvConfig env{.n_qubits = n_qubits,
                  .target = resolve_target(target),
                  .fidelity_threshold = fidelity_threshold,
                  .max_steps = max_steps,
                  .noise = noise,
                  .step_penalty = step_penalty,
                  .shots = shots,
                  .shot_seed = seed ^ 0x9e3779b97f4a7c15ULL};
    return env;
}

RunConfig parse_config(const std::string& ini_text,
                       const ConfigOverrides& overrides) {
    pt::ptree tree;
    std::istringstream in(ini_text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    for (const auto& [key, value] : overrides) {
        if (!known_keys().count(key)) {
            throw ConfigError("unknown config key " + key);
        }
        tree.put(key, value);
    }
    return from_tree(tree);
}

RunConfig load_config(const std::filesystem::path& path,
                      const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream seeds;
    for (std::size_t i = 0; i < c.seeds.size(); ++i) {
        if (i) seeds << ',';
        seeds << c.seeds[i];
    }
    pt::ptree tree;
    tree.put("experiment.name", c.name);
    tree.put("experiment.algorithm", to_string(c.algorithm));
    tree.put("experiment.episodes", c.episodes);
    tree.put("experiment.seeds", seeds.str());
    tree.put("experiment.out", c.out_dir.string());
    tree.put("experiment.jobs", c.jobs);
    tree.put("env.n_qubits", c.n_qubits);
    tree.put("env.target", c.target);
    tree.put("env.threshold", c.fidelity_threshold);
    tree.put("env.max_steps", c.max_steps);
    tree.put("env.p_gate", c.noise.p_gate);
    tree.put("env.p_meas", c.noise.p_meas);
    tree.put("env.step_penalty", c.step_penalty);
    tree.put("env.shots", c.shots);
    tree.put("agent.gamma", c.hyper.gamma);
    tree.put("agent.lr", c.hyper.learning_rate);
    tree.put("agent.clip", c.hyper.clip);
    tree.put("agent.epochs", c.hyper.epochs);
    tree.put("agent.horizon", c.hyper.horizon);
    tree.put("agent.value_coef", c.hyper.value_coef);
    tree.put("agent.entropy_coef", c.hyper.entropy_coef);
    std::ostringstream out;
    pt::write_ini(out, tree);
    return out.str();
}

}  // namespace qas
