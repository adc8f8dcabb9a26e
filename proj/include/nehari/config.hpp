#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nehari/errors.hpp"
#include "nehari/grid.hpp"
#include "nehari/model.hpp"
#include "nehari/solve.hpp"

namespace nehari {

struct GridConfig {
    int dim = 1;
    std::vector<Interval> extents;
    std::vector<int> counts;
};

struct ModelConfig {
    std::string kind;
    double theta = 0.0, eta = 0.0, alpha = 0.0;
    std::string f_src, F_src;
    std::optional<double> alpha_override, eta_override;
    std::optional<bool> odd;
};

struct SolveConfig {
    double tol = 1e-8;
    int max_iter = 20000;
    int restarts = 1;
    unsigned seed = 12345;
    double delta_min = 1e-10;
    double sign_tol = 1e-8;
    double fiber_tol = 1e-12;
};

struct VerifyConfig {
    std::string sobolev_mode = "discrete"; // or "user"
    double sobolev_value = 0.0;
    std::vector<double> beta_ladder = default_beta_ladder();
    int tau_index = 1;
    int tau_restarts = 3;
};

struct RunConfig {
    GridConfig grid;
    ModelConfig model;
    SolveConfig solve;
    VerifyConfig verify;
    bool has_verify = false;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("config: unknown key '" + path + it.key() + "'");
    }
}

template <typename T>
T require(const nlohmann::json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError("config: missing key '" + path + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: bad value for '" + path + key + "'");
    }
}

template <typename T>
T optional_or(const nlohmann::json& j, const std::string& path, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: bad value for '" + path + key + "'");
    }
}

} // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::check_keys;
    using detail::optional_or;
    using detail::require;

    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(j, "", {"grid", "model", "solve", "verify"});

    RunConfig cfg;

    {
        if (!j.contains("grid")) throw ConfigError("config: missing key 'grid'");
        const auto& g = j.at("grid");
        check_keys(g, "grid.", {"dim", "extents", "counts"});
        cfg.grid.dim = require<int>(g, "grid.", "dim");
        const auto ext = require<std::vector<std::vector<double>>>(g, "grid.", "extents");
        for (const auto& e : ext) {
            if (e.size() != 2) throw ConfigError("config: grid.extents entries must be [a, b]");
            if (!(e[1] > e[0]))
                throw ConfigError("config: grid.extents entries need b > a");
            cfg.grid.extents.push_back({e[0], e[1]});
        }
        cfg.grid.counts = require<std::vector<int>>(g, "grid.", "counts");
        if (cfg.grid.dim < 1 || cfg.grid.dim > 3)
            throw ConfigError("config: grid.dim must be 1, 2 or 3");
        if (static_cast<int>(cfg.grid.extents.size()) != cfg.grid.dim ||
            static_cast<int>(cfg.grid.counts.size()) != cfg.grid.dim)
            throw ConfigError("config: grid.extents/grid.counts must have dim entries");
        for (int c : cfg.grid.counts)
            if (c < 3) throw ConfigError("config: grid.counts entries must be at least 3");
    }

    {
        if (!j.contains("model")) throw ConfigError("config: missing key 'model'");
        const auto& m = j.at("model");
        cfg.model.kind = require<std::string>(m, "model.", "kind");
        if (cfg.model.kind == "section5") {
            check_keys(m, "model.", {"kind", "theta", "eta"});
            cfg.model.theta = require<double>(m, "model.", "theta");
            cfg.model.eta = require<double>(m, "model.", "eta");
        } else if (cfg.model.kind == "rational" || cfg.model.kind == "coercive") {
            check_keys(m, "model.", {"kind", "alpha", "eta"});
            cfg.model.alpha = require<double>(m, "model.", "alpha");
            cfg.model.eta = require<double>(m, "model.", "eta");
        } else if (cfg.model.kind == "expr") {
            check_keys(m, "model.", {"kind", "f", "F", "alpha", "eta", "odd"});
            cfg.model.f_src = require<std::string>(m, "model.", "f");
            if (m.contains("F")) cfg.model.F_src = m.at("F").get<std::string>();
            if (m.contains("alpha")) cfg.model.alpha_override = m.at("alpha").get<double>();
            if (m.contains("eta")) cfg.model.eta_override = m.at("eta").get<double>();
            if (m.contains("odd")) cfg.model.odd = m.at("odd").get<bool>();
        } else {
            throw ConfigError("config: unknown model.kind '" + cfg.model.kind + "'");
        }
    }

    if (j.contains("solve")) {
        const auto& s = j.at("solve");
        check_keys(s, "solve.",
                   {"tol", "max_iter", "restarts", "seed", "delta_min", "sign_tol", "fiber_tol"});
        cfg.solve.tol = optional_or(s, "solve.", "tol", cfg.solve.tol);
        cfg.solve.max_iter = optional_or(s, "solve.", "max_iter", cfg.solve.max_iter);
        cfg.solve.restarts = optional_or(s, "solve.", "restarts", cfg.solve.restarts);
        cfg.solve.seed = optional_or(s, "solve.", "seed", cfg.solve.seed);
        cfg.solve.delta_min = optional_or(s, "solve.", "delta_min", cfg.solve.delta_min);
        cfg.solve.sign_tol = optional_or(s, "solve.", "sign_tol", cfg.solve.sign_tol);
        cfg.solve.fiber_tol = optional_or(s, "solve.", "fiber_tol", cfg.solve.fiber_tol);
    }

    if (j.contains("verify")) {
        cfg.has_verify = true;
        const auto& v = j.at("verify");
        check_keys(v, "verify.",
                   {"sobolev", "beta_ladder", "tau_index", "tau_restarts"});
        if (v.contains("sobolev")) {
            const auto& s = v.at("sobolev");
            if (s.is_string()) {
                if (s.get<std::string>() != "discrete")
                    throw ConfigError("config: verify.sobolev must be \"discrete\" or a number");
                cfg.verify.sobolev_mode = "discrete";
            } else {
                cfg.verify.sobolev_mode = "user";
                cfg.verify.sobolev_value = s.get<double>();
            }
        }
        cfg.verify.beta_ladder =
            optional_or(v, "verify.", "beta_ladder", cfg.verify.beta_ladder);
        cfg.verify.tau_index = optional_or(v, "verify.", "tau_index", cfg.verify.tau_index);
        cfg.verify.tau_restarts =
            optional_or(v, "verify.", "tau_restarts", cfg.verify.tau_restarts);
    }

    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

inline std::shared_ptr<const Grid> make_grid(const GridConfig& g) {
    return build_grid(g.dim, g.extents, g.counts);
}

inline NonlinearModel make_model(const ModelConfig& m) {
    if (m.kind == "section5") return piecewise_model(m.theta, m.eta);
    if (m.kind == "rational") return rational_model(m.alpha, m.eta);
    if (m.kind == "coercive") return coercive_model(m.alpha, m.eta);
    ExprModelOptions opts;
    if (!m.F_src.empty()) opts.F_src = m.F_src;
    opts.alpha = m.alpha_override;
    opts.eta = m.eta_override;
    opts.odd = m.odd;
    return parse_model(m.f_src, opts);
}

inline SolveOptions make_solve_options(const SolveConfig& s) {
    SolveOptions o;
    o.tol = s.tol;
    o.max_iter = s.max_iter;
    o.restarts = s.restarts;
    o.seed = s.seed;
    o.delta_min_factor = s.delta_min;
    o.sign_tol = s.sign_tol;
    o.fiber_tol = s.fiber_tol;
    return o;
}

} // namespace nehari
