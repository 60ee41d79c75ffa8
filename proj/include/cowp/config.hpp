#pragma once

#include <cstdlib>
#include <fstream>
#include <string>

#include "cowp/errors.hpp"
#include "cowp/oracle.hpp"
#include "cowp/strutil.hpp"

namespace cowp {

/// Process-wide settings. Precedence: CLI flag > environment variable >
/// config file > built-in default; the loaders below apply file then
/// environment, and the CLI layers flags on the result.
struct AppConfig {
    std::string data_dir;
    OracleConfig oracle;
    double inject_p = 0.1;
    size_t node_budget = 1'000'000;
    size_t ground_capacity = 1'000'000;
    size_t acquisition_rounds = 3;
    size_t watchdog = 0; // 0: derived per episode
    int verbosity = 1;

    void apply(const std::string& key, const std::string& value) {
        auto as_double = [&] {
            try {
                return std::stod(value);
            } catch (...) {
                throw ConfigError("bad numeric value for " + key + ": " + value);
            }
        };
        auto as_size = [&] {
            try {
                return static_cast<size_t>(std::stoull(value));
            } catch (...) {
                throw ConfigError("bad integer value for " + key + ": " + value);
            }
        };
        if (key == "data.dir") data_dir = value;
        else if (key == "oracle.endpoint") oracle.endpoint = value;
        else if (key == "oracle.model") oracle.model = value;
        else if (key == "oracle.temperature") oracle.temperature = as_double();
        else if (key == "oracle.top_p") oracle.top_p = as_double();
        else if (key == "oracle.max_tokens") oracle.max_tokens = static_cast<int>(as_size());
        else if (key == "oracle.frequency_penalty") oracle.frequency_penalty = as_double();
        else if (key == "oracle.presence_penalty") oracle.presence_penalty = as_double();
        else if (key == "oracle.credential_env") oracle.credential_env = value;
        else if (key == "oracle.max_attempts") oracle.max_attempts = static_cast<int>(as_size());
        else if (key == "sim.p") inject_p = as_double();
        else if (key == "budget.nodes") node_budget = as_size();
        else if (key == "budget.ground") ground_capacity = as_size();
        else if (key == "budget.acquisition_rounds") acquisition_rounds = as_size();
        else if (key == "budget.watchdog") watchdog = as_size();
        else if (key == "log.verbosity") verbosity = static_cast<int>(as_size());
        else throw ConfigError("unknown configuration key '" + key + "'");
        if (inject_p < 0.0 || inject_p > 1.0)
            throw ConfigError("sim.p must lie in [0,1]");
        if (node_budget == 0 || acquisition_rounds == 0)
            throw ConfigError("budgets must be positive");
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string s = str::trim(line);
            if (s.empty() || s[0] == '#') continue;
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": expected key=value");
            apply(str::trim(s.substr(0, eq)), str::trim(s.substr(eq + 1)));
        }
    }

    /// COWP_DATA_DIR, COWP_ORACLE_ENDPOINT, COWP_SIM_P, ...
    void load_env() {
        static const char* keys[] = {
            "data.dir",          "oracle.endpoint",      "oracle.model",
            "oracle.temperature", "oracle.top_p",        "oracle.max_tokens",
            "oracle.frequency_penalty", "oracle.presence_penalty",
            "oracle.credential_env",    "oracle.max_attempts",
            "sim.p",             "budget.nodes",         "budget.ground",
            "budget.acquisition_rounds", "budget.watchdog", "log.verbosity"};
        for (const char* key : keys) {
            std::string env = "COWP_";
            for (char c : std::string(key))
                env += (c == '.') ? '_' : static_cast<char>(std::toupper(c));
            if (const char* v = std::getenv(env.c_str()); v && *v) apply(key, v);
        }
    }
};

} // namespace cowp
