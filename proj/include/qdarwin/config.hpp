#pragma once

#include <json.hpp>

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "qdarwin/errors.hpp"
#include "qdarwin/model.hpp"

namespace qdarwin::cli {

using nlohmann::json;

struct TimeSpec {
    bool explicit_times = false;
    std::vector<double> times;
    std::string scale = "log";
    double t_min = 0.1;
    double t_max = 1000.0;
    int n_points = 200;

    model::TimeGrid resolve() const {
        if (explicit_times) {
            model::TimeGrid g{times};
            g.validate();
            return g;
        }
        return scale == "linear" ? model::TimeGrid::linear(t_min, t_max, n_points)
                                 : model::TimeGrid::logarithmic(t_min, t_max, n_points);
    }
};

struct OracleConfig {
    bool enabled = false;
    int n_cap = 14;
};

struct StatsConfig {
    double t_min = 1e3;
    double t_max = 1e5;
    int n_samples = 10000;
    std::vector<std::uint64_t> fragment_masks; // defaulted from N when empty
};

struct BaselineConfig {
    int d_s = 2;
    int d_e = 2;
    int n_env = 8;
    int n_samples = 2000;
    std::uint64_t budget = 4;
    int fstar_points = 99;
    std::int64_t dim_cap = 1 << 15;
};

struct ExperimentConfig {
    model::ModelParams model;
    bool model_given = false;
    std::optional<std::vector<double>> d_override;
    std::optional<std::vector<std::vector<double>>> m_override;
    TimeSpec time;
    std::uint64_t fragment_budget = 2000;
    std::vector<double> deltas = {0.1};
    std::string unit = "nats";
    OracleConfig oracle;
    std::string output_dir = ".";
    StatsConfig stats;
    BaselineConfig baseline;
};

namespace detail {

inline void check_keys(const json& obj, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("unknown key \"" + path + it.key() + "\"");
    }
}

template <typename T>
T get_as(const json& obj, const std::string& path, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for \"" + path + key + "\": " + e.what());
    }
}

template <typename T>
T require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) throw ConfigError("missing required key \"" + path + key + "\"");
    return get_as<T>(obj, path, key, T{});
}

} // namespace detail

inline ExperimentConfig parse_config(const json& root) {
    using detail::check_keys;
    using detail::get_as;
    using detail::require;

    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    check_keys(root, "", {"model", "couplings", "times", "time_grid", "fragment_budget",
                          "deltas", "unit", "oracle", "output_dir", "stats", "baseline"});

    ExperimentConfig cfg;

    if (root.contains("model")) {
        const json& m = root.at("model");
        if (!m.is_object()) throw ConfigError("\"model\" must be an object");
        check_keys(m, "model.", {"n_env", "sigma_d", "sigma_m", "a", "b", "alpha_phase",
                                 "beta_phase", "seed"});
        cfg.model_given = true;
        cfg.model.n_env = require<int>(m, "model.", "n_env");
        cfg.model.sigma_d = get_as<double>(m, "model.", "sigma_d", cfg.model.sigma_d);
        cfg.model.sigma_m = get_as<double>(m, "model.", "sigma_m", cfg.model.sigma_m);
        cfg.model.a = get_as<double>(m, "model.", "a", cfg.model.a);
        cfg.model.b = get_as<double>(m, "model.", "b", cfg.model.b);
        cfg.model.alpha_phase = get_as<double>(m, "model.", "alpha_phase", 0.0);
        cfg.model.beta_phase = get_as<double>(m, "model.", "beta_phase", 0.0);
        cfg.model.seed = get_as<std::uint64_t>(m, "model.", "seed", cfg.model.seed);
        try {
            cfg.model.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("invalid model: ") + e.what());
        }
    }

    if (root.contains("couplings")) {
        const json& c = root.at("couplings");
        if (!c.is_object()) throw ConfigError("\"couplings\" must be an object");
        check_keys(c, "couplings.", {"d", "m"});
        if (c.contains("d"))
            cfg.d_override = get_as<std::vector<double>>(c, "couplings.", "d", {});
        if (c.contains("m"))
            cfg.m_override =
                get_as<std::vector<std::vector<double>>>(c, "couplings.", "m", {});
    }

    if (root.contains("times") && root.contains("time_grid"))
        throw ConfigError("give either \"times\" or \"time_grid\", not both");
    if (root.contains("times")) {
        cfg.time.explicit_times = true;
        cfg.time.times = get_as<std::vector<double>>(root, "", "times", {});
    }
    if (root.contains("time_grid")) {
        const json& g = root.at("time_grid");
        check_keys(g, "time_grid.", {"scale", "t_min", "t_max", "n_points"});
        cfg.time.scale = get_as<std::string>(g, "time_grid.", "scale", cfg.time.scale);
        if (cfg.time.scale != "log" && cfg.time.scale != "linear")
            throw ConfigError("time_grid.scale must be \"log\" or \"linear\"");
        cfg.time.t_min = get_as<double>(g, "time_grid.", "t_min", cfg.time.t_min);
        cfg.time.t_max = get_as<double>(g, "time_grid.", "t_max", cfg.time.t_max);
        cfg.time.n_points = get_as<int>(g, "time_grid.", "n_points", cfg.time.n_points);
    }
    try {
        cfg.time.resolve();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid time specification: ") + e.what());
    }

    cfg.fragment_budget = get_as<std::uint64_t>(root, "", "fragment_budget", cfg.fragment_budget);
    if (cfg.fragment_budget < 1) throw ConfigError("fragment_budget must be >= 1");
    cfg.deltas = get_as<std::vector<double>>(root, "", "deltas", cfg.deltas);
    for (double d : cfg.deltas)
        if (!(d > 0.0 && d < 1.0)) throw ConfigError("deltas must lie in (0,1)");
    cfg.unit = get_as<std::string>(root, "", "unit", cfg.unit);
    if (cfg.unit != "nats" && cfg.unit != "bits")
        throw ConfigError("unit must be \"nats\" or \"bits\"");
    cfg.output_dir = get_as<std::string>(root, "", "output_dir", cfg.output_dir);

    if (root.contains("oracle")) {
        const json& o = root.at("oracle");
        check_keys(o, "oracle.", {"enabled", "n_cap"});
        cfg.oracle.enabled = get_as<bool>(o, "oracle.", "enabled", false);
        cfg.oracle.n_cap = get_as<int>(o, "oracle.", "n_cap", cfg.oracle.n_cap);
    }

    if (root.contains("stats")) {
        const json& s = root.at("stats");
        check_keys(s, "stats.", {"t_min", "t_max", "n_samples", "fragment_masks"});
        cfg.stats.t_min = get_as<double>(s, "stats.", "t_min", cfg.stats.t_min);
        cfg.stats.t_max = get_as<double>(s, "stats.", "t_max", cfg.stats.t_max);
        cfg.stats.n_samples = get_as<int>(s, "stats.", "n_samples", cfg.stats.n_samples);
        cfg.stats.fragment_masks =
            get_as<std::vector<std::uint64_t>>(s, "stats.", "fragment_masks", {});
        if (!(cfg.stats.t_max > cfg.stats.t_min)) throw ConfigError("stats window is empty");
        if (cfg.stats.n_samples < 100) throw ConfigError("stats.n_samples must be >= 100");
    }

    if (root.contains("baseline")) {
        const json& b = root.at("baseline");
        check_keys(b, "baseline.",
                   {"d_s", "d_e", "n_env", "n_samples", "budget", "fstar_points", "dim_cap"});
        cfg.baseline.d_s = get_as<int>(b, "baseline.", "d_s", cfg.baseline.d_s);
        cfg.baseline.d_e = get_as<int>(b, "baseline.", "d_e", cfg.baseline.d_e);
        cfg.baseline.n_env = get_as<int>(b, "baseline.", "n_env", cfg.baseline.n_env);
        cfg.baseline.n_samples = get_as<int>(b, "baseline.", "n_samples", cfg.baseline.n_samples);
        cfg.baseline.budget = get_as<std::uint64_t>(b, "baseline.", "budget", cfg.baseline.budget);
        cfg.baseline.fstar_points =
            get_as<int>(b, "baseline.", "fstar_points", cfg.baseline.fstar_points);
        cfg.baseline.dim_cap = get_as<std::int64_t>(b, "baseline.", "dim_cap", cfg.baseline.dim_cap);
        if (cfg.baseline.d_s < 2 || cfg.baseline.d_e < 2 || cfg.baseline.n_env < 1 ||
            cfg.baseline.n_samples < 1 || cfg.baseline.budget < 1 ||
            cfg.baseline.fstar_points < 1)
            throw ConfigError("invalid baseline settings");
    }

    // coupling overrides must fit the model
    if (cfg.d_override &&
        cfg.d_override->size() != static_cast<std::size_t>(cfg.model.n_env))
        throw ConfigError("couplings.d must have length n_env");
    if (cfg.m_override) {
        if (cfg.m_override->size() != static_cast<std::size_t>(cfg.model.n_env))
            throw ConfigError("couplings.m must be an n_env x n_env matrix");
        for (const auto& row : *cfg.m_override)
            if (row.size() != static_cast<std::size_t>(cfg.model.n_env))
                throw ConfigError("couplings.m must be an n_env x n_env matrix");
    }

    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return parse_config(root);
}

// Sampled couplings unless the config pins them inline.
inline model::Couplings resolve_couplings(const ExperimentConfig& cfg) {
    model::Couplings c = model::sample_couplings(cfg.model);
    if (cfg.d_override)
        for (int i = 0; i < cfg.model.n_env; ++i)
            c.d(i) = (*cfg.d_override)[static_cast<std::size_t>(i)];
    if (cfg.m_override)
        for (int j = 0; j < cfg.model.n_env; ++j)
            for (int k = 0; k < cfg.model.n_env; ++k)
                c.m(j, k) = (*cfg.m_override)[static_cast<std::size_t>(j)]
                                             [static_cast<std::size_t>(k)];
    return c;
}

// Effective settings echoed into the run manifest.
inline json resolved_config_json(const ExperimentConfig& cfg) {
    json j;
    if (cfg.model_given) {
        j["model"] = {{"n_env", cfg.model.n_env},       {"sigma_d", cfg.model.sigma_d},
                      {"sigma_m", cfg.model.sigma_m},   {"a", cfg.model.a},
                      {"b", cfg.model.b},               {"alpha_phase", cfg.model.alpha_phase},
                      {"beta_phase", cfg.model.beta_phase}, {"seed", cfg.model.seed}};
    }
    if (cfg.time.explicit_times) {
        j["times"] = cfg.time.times;
    } else {
        j["time_grid"] = {{"scale", cfg.time.scale},
                          {"t_min", cfg.time.t_min},
                          {"t_max", cfg.time.t_max},
                          {"n_points", cfg.time.n_points}};
    }
    j["fragment_budget"] = cfg.fragment_budget;
    j["deltas"] = cfg.deltas;
    j["unit"] = cfg.unit;
    j["oracle"] = {{"enabled", cfg.oracle.enabled}, {"n_cap", cfg.oracle.n_cap}};
    j["stats"] = {{"t_min", cfg.stats.t_min},
                  {"t_max", cfg.stats.t_max},
                  {"n_samples", cfg.stats.n_samples},
                  {"fragment_masks", cfg.stats.fragment_masks}};
    j["baseline"] = {{"d_s", cfg.baseline.d_s},           {"d_e", cfg.baseline.d_e},
                     {"n_env", cfg.baseline.n_env},       {"n_samples", cfg.baseline.n_samples},
                     {"budget", cfg.baseline.budget},     {"fstar_points", cfg.baseline.fstar_points},
                     {"dim_cap", cfg.baseline.dim_cap}};
    if (cfg.d_override) j["couplings"]["d"] = *cfg.d_override;
    if (cfg.m_override) j["couplings"]["m"] = *cfg.m_override;
    return j;
}

} // namespace qdarwin::cli
