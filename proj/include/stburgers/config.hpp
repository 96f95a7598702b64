#pragma once

// Flat key-value run configuration (dotted section names, one `key = value`
// per line, `#` comments).  Unknown keys are hard errors: a silently ignored
// typo in an exponent name would invalidate a run against the parameter
// constraints.

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stburgers/analysis.hpp"
#include "stburgers/scheme.hpp"

namespace stburgers {

struct ConfigError : std::runtime_error {
    std::vector<std::string> messages;
    explicit ConfigError(std::vector<std::string> msgs)
        : std::runtime_error(msgs.empty() ? "configuration error" : msgs.front()),
          messages(std::move(msgs)) {}
};

struct RunConfig {
    ModelParams model;
    std::vector<int> levels;
    int n_max = 10;
    std::size_t paths = 64;
    std::uint64_t seed = 1;
    BoundConstants bounds;
    std::string out_dir;
    bool emit_trajectories = false;
    std::string config_text;  // verbatim source, echoed into manifests
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v,
                           std::vector<std::string>& errs) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        errs.push_back(key + ": expected a number, got '" + v + "'");
        return 0.0;
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v,
                               std::vector<std::string>& errs) {
    try {
        std::size_t pos = 0;
        const int base = (v.rfind("0x", 0) == 0 || v.rfind("0X", 0) == 0) ? 16 : 10;
        const std::uint64_t u = std::stoull(v, &pos, base);
        if (pos != v.size()) throw std::invalid_argument("");
        return u;
    } catch (...) {
        errs.push_back(key + ": expected a decimal or 0x-hex integer, got '" + v + "'");
        return 0;
    }
}

inline bool parse_bool(const std::string& key, const std::string& v,
                       std::vector<std::string>& errs) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    errs.push_back(key + ": expected true/false, got '" + v + "'");
    return false;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace config_detail

inline RunConfig parse_config_text(const std::string& text) {
    using namespace config_detail;
    static const std::set<std::string> known = {
        "model.c1", "model.c0", "model.kappa", "model.T", "model.xi_modes",
        "exponents.gamma", "exponents.varrho", "exponents.chi", "exponents.q",
        "discretization.levels", "discretization.n_max",
        "monte_carlo.paths", "monte_carlo.seed",
        "bounds.eta", "bounds.beta", "bounds.theta", "bounds.varphi",
        "bounds.epsilon", "bounds.slack", "bounds.l4_embedding",
        "output.directory", "output.emit_trajectories",
    };

    RunConfig cfg;
    cfg.config_text = text;
    std::vector<std::string> errs;
    std::map<std::string, std::string> kv;

    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errs.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (known.find(key) == known.end()) {
            errs.push_back("unknown key '" + key + "'");
            continue;
        }
        if (kv.count(key)) errs.push_back("duplicate key '" + key + "'");
        kv[key] = val;
    }

    auto get = [&](const std::string& k) -> const std::string* {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };

    if (auto* v = get("model.c1")) cfg.model.c1 = parse_double("model.c1", *v, errs);
    if (auto* v = get("model.c0")) cfg.model.c0 = parse_double("model.c0", *v, errs);
    if (auto* v = get("model.kappa")) cfg.model.kappa = parse_double("model.kappa", *v, errs);
    if (auto* v = get("model.T")) cfg.model.T = parse_double("model.T", *v, errs);
    if (auto* v = get("exponents.gamma")) cfg.model.gamma = parse_double("exponents.gamma", *v, errs);
    if (auto* v = get("exponents.varrho"))
        cfg.model.varrho = parse_double("exponents.varrho", *v, errs);
    if (auto* v = get("exponents.chi")) cfg.model.chi = parse_double("exponents.chi", *v, errs);
    if (auto* v = get("exponents.q")) cfg.model.q_moment = parse_double("exponents.q", *v, errs);
    if (auto* v = get("discretization.n_max"))
        cfg.n_max = static_cast<int>(parse_u64("discretization.n_max", *v, errs));
    if (auto* v = get("monte_carlo.paths"))
        cfg.paths = static_cast<std::size_t>(parse_u64("monte_carlo.paths", *v, errs));
    if (auto* v = get("monte_carlo.seed")) cfg.seed = parse_u64("monte_carlo.seed", *v, errs);
    if (auto* v = get("bounds.eta")) cfg.bounds.eta = parse_double("bounds.eta", *v, errs);
    if (auto* v = get("bounds.beta")) cfg.bounds.beta = parse_double("bounds.beta", *v, errs);
    if (auto* v = get("bounds.theta")) cfg.bounds.theta = parse_double("bounds.theta", *v, errs);
    if (auto* v = get("bounds.varphi")) cfg.bounds.varphi = parse_double("bounds.varphi", *v, errs);
    if (auto* v = get("bounds.epsilon"))
        cfg.bounds.epsilon = parse_double("bounds.epsilon", *v, errs);
    if (auto* v = get("bounds.slack")) cfg.bounds.slack = parse_double("bounds.slack", *v, errs);
    if (auto* v = get("bounds.l4_embedding"))
        cfg.bounds.l4_embedding = parse_double("bounds.l4_embedding", *v, errs);
    if (auto* v = get("output.directory")) cfg.out_dir = *v;
    if (auto* v = get("output.emit_trajectories"))
        cfg.emit_trajectories = parse_bool("output.emit_trajectories", *v, errs);

    // xi as sparse mode:coefficient pairs, e.g. "1:1.0, 3:0.5"
    if (auto* v = get("model.xi_modes")) {
        std::size_t max_mode = 0;
        std::vector<std::pair<std::size_t, double>> entries;
        for (const auto& item : split(*v, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) {
                errs.push_back("model.xi_modes: expected 'mode:coefficient', got '" + item + "'");
                continue;
            }
            const auto mode = parse_u64("model.xi_modes", trim(item.substr(0, colon)), errs);
            const auto coef = parse_double("model.xi_modes", trim(item.substr(colon + 1)), errs);
            if (mode < 1) {
                errs.push_back("model.xi_modes: mode index must be >= 1");
                continue;
            }
            entries.emplace_back(static_cast<std::size_t>(mode), coef);
            max_mode = std::max(max_mode, static_cast<std::size_t>(mode));
        }
        cfg.model.xi = SpectralField(std::max<std::size_t>(max_mode, 1));
        for (auto& [m, c] : entries) cfg.model.xi[m - 1] = c;
    } else {
        cfg.model.xi = SpectralField::basis(1, 1);
    }

    if (auto* v = get("discretization.levels")) {
        for (const auto& item : split(*v, ','))
            cfg.levels.push_back(static_cast<int>(parse_u64("discretization.levels", item, errs)));
    }

    if (!errs.empty()) throw ConfigError(std::move(errs));

    // structural validation
    for (const auto& msg : validate_params(cfg.model)) errs.push_back(msg);
    if (cfg.n_max < 3 || cfg.n_max > 24) errs.push_back("discretization.n_max must be in [3, 24]");
    if (cfg.levels.empty()) errs.push_back("discretization.levels must not be empty");
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
        if (cfg.levels[i] < 1 || cfg.levels[i] > cfg.n_max - 2)
            errs.push_back("discretization.levels entries must lie in [1, n_max - 2]");
        if (i > 0 && cfg.levels[i] <= cfg.levels[i - 1])
            errs.push_back("discretization.levels must be strictly increasing");
    }
    if (cfg.paths < 1) errs.push_back("monte_carlo.paths must be >= 1");
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace stburgers
