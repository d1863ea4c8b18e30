#include "nbp/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace nbp {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

void load_into(const std::string& path, ConfigMap& out, int depth) {
    if (depth > 8) throw NbpError("config include depth exceeded at " + path);
    std::ifstream is(path);
    if (!is) throw NbpError("cannot open config " + path);
    const auto dir = std::filesystem::path(path).parent_path();
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.rfind("include ", 0) == 0) {
            load_into((dir / trim(line.substr(8))).string(), out, depth + 1);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw NbpError(path + ":" + std::to_string(lineno) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ','))
        if (!trim(part).empty()) parts.push_back(trim(part));
    return parts;
}

}  // namespace

ConfigMap load_config(const std::string& path) {
    ConfigMap m;
    load_into(path, m, 0);
    return m;
}

std::string cfg_str(const ConfigMap& m, const std::string& key, const std::string& fallback) {
    const auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

int cfg_int(const ConfigMap& m, const std::string& key, int fallback) {
    const auto it = m.find(key);
    if (it == m.end()) return fallback;
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw NbpError("config key '" + key + "': expected integer, got '" + it->second + "'");
    }
}

double cfg_double(const ConfigMap& m, const std::string& key, double fallback) {
    const auto it = m.find(key);
    if (it == m.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw NbpError("config key '" + key + "': expected number, got '" + it->second + "'");
    }
}

uint64_t cfg_u64(const ConfigMap& m, const std::string& key, uint64_t fallback) {
    const auto it = m.find(key);
    if (it == m.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw NbpError("config key '" + key + "': expected integer, got '" + it->second + "'");
    }
}

BenchConfig bench_config_from(const ConfigMap& m) {
    BenchConfig cfg;
    cfg.difficulty = cfg_str(m, "difficulty", cfg.difficulty);
    cfg.scene_count = cfg_int(m, "scene_count", cfg.scene_count);
    cfg.trials = cfg_int(m, "trials", cfg.trials);
    cfg.budget = cfg_int(m, "budget", cfg.budget);
    const std::string planners = cfg_str(m, "planners", "");
    if (!planners.empty()) cfg.planners = split_csv(planners);
    cfg.seed = cfg_u64(m, "seed", cfg.seed);
    cfg.threads = cfg_int(m, "threads", cfg.threads);
    cfg.checkpoint = cfg_str(m, "checkpoint", cfg.checkpoint);
    cfg.oracle_stride = cfg_int(m, "oracle_stride", cfg.oracle_stride);
    if (cfg.trials < 1) throw NbpError("config: trials must be >= 1");
    for (const std::string& p : cfg.planners) planner_from_name(p);  // validate early
    return cfg;
}

TrainConfig train_config_from(const ConfigMap& m) {
    TrainConfig cfg;
    cfg.iterations = cfg_int(m, "iterations", cfg.iterations);
    cfg.curriculum_cutoff = cfg_int(m, "curriculum_cutoff", cfg.curriculum_cutoff);
    cfg.trajectories_first = cfg_int(m, "trajectories_first", cfg.trajectories_first);
    cfg.trajectories_later = cfg_int(m, "trajectories_later", cfg.trajectories_later);
    cfg.epochs = cfg_int(m, "epochs", cfg.epochs);
    cfg.batch_size = cfg_int(m, "batch_size", cfg.batch_size);
    cfg.accumulation = cfg_int(m, "accumulation", cfg.accumulation);
    cfg.learning_rate = cfg_double(m, "learning_rate", cfg.learning_rate);
    cfg.momentum = cfg_double(m, "momentum", cfg.momentum);
    cfg.lr_decay = cfg_double(m, "lr_decay", cfg.lr_decay);
    cfg.plateau_patience = cfg_int(m, "plateau_patience", cfg.plateau_patience);
    cfg.holdout_size = cfg_int(m, "holdout_size", cfg.holdout_size);
    cfg.seed = cfg_u64(m, "seed", cfg.seed);
    cfg.threads = cfg_int(m, "threads", cfg.threads);
    cfg.rollout.length = cfg_int(m, "rollout_length", cfg.rollout.length);
    cfg.rollout.beta = cfg_double(m, "beta", cfg.rollout.beta);
    return cfg;
}

}  // namespace nbp
