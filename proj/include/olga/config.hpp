#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "olga/error.hpp"
#include "olga/evaluate.hpp"

namespace olga {

// Flat key=value run configuration. Lines starting with '#' are comments.
// Command-line flags override file values.
struct RunConfig {
    std::string dataset_path;  // CSV path; empty when synthetic
    std::string synth = "blobs";
    std::size_t n_interest = 250;
    std::size_t n_non_interest = 250;

    Method method = Method::Olga;
    GridSpec grid;
    std::size_t folds = 10;
    std::uint64_t seed = 7;
    std::size_t snapshot_every = 0;
    std::size_t jobs = 1;
    std::string out_dir = "out";

    Dataset load_dataset() const {
        if (!dataset_path.empty()) return load_dataset_csv(dataset_path);
        return synth_dataset(synth_kind_from_string(synth), n_interest, n_non_interest, seed);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

template <typename T>
T parse_scalar(const std::string& value, const std::string& key);

template <>
inline double parse_scalar<double>(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
    }
}

template <>
inline std::size_t parse_scalar<std::size_t>(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size() || v < 0) throw std::invalid_argument(value);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a non-negative integer: '" + value +
                          "'");
    }
}

template <typename T>
std::vector<T> parse_list(const std::string& value, const std::string& key) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_scalar<T>(item, key));
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

}  // namespace detail

inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ": line " + std::to_string(lineno) +
                              ": expected key=value");
        kv[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
    }
    return kv;
}

inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_list;
    using detail::parse_scalar;
    if (key == "dataset") {
        cfg.dataset_path = value;
    } else if (key == "synth") {
        synth_kind_from_string(value);  // validates
        cfg.synth = value;
        cfg.dataset_path.clear();
    } else if (key == "n_interest") {
        cfg.n_interest = parse_scalar<std::size_t>(value, key);
    } else if (key == "n_non_interest") {
        cfg.n_non_interest = parse_scalar<std::size_t>(value, key);
    } else if (key == "method") {
        cfg.method = method_from_string(value);
    } else if (key == "k") {
        cfg.grid.ks = parse_list<std::size_t>(value, key);
    } else if (key == "radius") {
        cfg.grid.radii = parse_list<double>(value, key);
        for (double r : cfg.grid.radii)
            if (r <= 0.0) throw ConfigError("radius values must be positive");
    } else if (key == "lr") {
        cfg.grid.learning_rates = parse_list<double>(value, key);
        for (double lr : cfg.grid.learning_rates)
            if (lr <= 0.0) throw ConfigError("learning rates must be positive");
    } else if (key == "patience") {
        cfg.grid.patiences = parse_list<std::size_t>(value, key);
    } else if (key == "dims") {
        cfg.grid.embedding_dims = parse_list<std::size_t>(value, key);
    } else if (key == "nu") {
        cfg.grid.nus = parse_list<double>(value, key);
        for (double nu : cfg.grid.nus)
            if (nu <= 0.0 || nu >= 1.0) throw ConfigError("nu values must lie in (0,1)");
    } else if (key == "weight_decay") {
        cfg.grid.lambdas = parse_list<double>(value, key);
        for (double l : cfg.grid.lambdas)
            if (l < 0.0) throw ConfigError("weight decay must be >= 0");
    } else if (key == "hidden") {
        cfg.grid.hidden_dim = parse_scalar<std::size_t>(value, key);
    } else if (key == "max_epochs") {
        cfg.grid.max_epochs = parse_scalar<std::size_t>(value, key);
    } else if (key == "folds") {
        cfg.folds = parse_scalar<std::size_t>(value, key);
    } else if (key == "seed") {
        cfg.seed = parse_scalar<std::size_t>(value, key);
    } else if (key == "snapshot_every") {
        cfg.snapshot_every = parse_scalar<std::size_t>(value, key);
    } else if (key == "jobs") {
        cfg.jobs = std::max<std::size_t>(1, parse_scalar<std::size_t>(value, key));
    } else if (key == "out") {
        cfg.out_dir = value;
    } else {
        throw ConfigError("unknown config key: '" + key + "'");
    }
}

inline RunConfig make_run_config(const std::map<std::string, std::string>& kv) {
    RunConfig cfg;
    // synth before dataset so an explicit dataset path wins
    if (auto it = kv.find("synth"); it != kv.end()) apply_config_entry(cfg, "synth", it->second);
    for (const auto& [key, value] : kv) {
        if (key == "synth") continue;
        apply_config_entry(cfg, key, value);
    }
    return cfg;
}

}  // namespace olga
