#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fploc/geometry.hpp"
#include "fploc/io.hpp"
#include "fploc/placement.hpp"
#include "fploc/propagation.hpp"

namespace fploc::config {

// Invalid or inconsistent experiment configuration; messages name the field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Experiment description. Defaults mirror the standard indoor setup: a
// 30 m x 18 m two-corridor office, four ceiling APs at 20 dBm, COST-231
// multi-wall propagation, a 3 m square training grid, 10^4 trials.
struct ExperimentConfig {
    geometry::Region region{30.0, 18.0};

    std::string model = "cost231";  // cost231 | noisy | fading
    propagation::Cost231Params cost231;
    propagation::AnalyticChannelParams analytic{2.0, 0.0, 1.0,
                                                propagation::AnalyticModel::noisy};

    std::vector<propagation::Anchor> anchors;  // empty = default four APs
    std::string anchors_file;
    double default_tx = 20.0;  // dBm (cost231) or milliwatts (analytic)

    propagation::FloorPlan plan;  // empty + use_default_plan = built-in office
    std::string walls_file;
    bool use_default_plan = true;

    std::string grid_kind = "square";  // square | hex | random
    double grid_cell = 3.0;            // square cell side
    double grid_spacing = 3.0;         // hex nearest-neighbour distance
    std::size_t grid_count = 40;       // random grid size

    std::size_t m_training = 1;
    std::size_t m_runtime = 1;
    std::size_t k = 3;
    bool weighted = false;

    std::size_t trials = 10000;
    std::uint64_t master_seed = 1;
    double target_wall_clearance = 0.0;  // >0 keeps targets away from walls

    std::string sweep_name = "none";
    std::vector<std::string> sweep_values;  // labels; parsed per sweep name

    std::string placement_method = "voronoi";  // for the anchors.added sweep
    std::uint64_t placement_seed = 0;
};

inline const std::set<std::string>& known_sweeps() {
    static const std::set<std::string> names{
        "none",          "grid.kind",        "grid.cell",  "grid.spacing",
        "grid.count",    "m.both",           "m.training", "m.runtime",
        "knn.k",         "cost231.gamma",    "cost231.wall_loss",
        "cost231.sigma", "analytic.alpha",   "analytic.noise_var",
        "anchors.added"};
    return names;
}

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

}  // namespace detail

// Flat key=value file: one pair per line, '#' comments, no sections. Every
// key must be known; unknown keys are reported rather than ignored.
inline std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file '" + path + "' cannot be opened");
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        const std::string t = io::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(no) +
                              ": expected key=value, got '" + t + "'");
        const std::string key = io::trim(t.substr(0, eq));
        const std::string value = io::trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(no) + ": empty key");
        if (kv.count(key))
            throw ConfigError(path + ":" + std::to_string(no) + ": duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

inline ExperimentConfig config_from_map(std::map<std::string, std::string> kv) {
    ExperimentConfig cfg;
    auto take = [&](const std::string& key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return "";
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto has = [&](const std::string& key) { return kv.count(key) > 0; };

    if (has("region.width")) cfg.region.width = detail::parse_double(take("region.width"), "region.width");
    if (has("region.height"))
        cfg.region.height = detail::parse_double(take("region.height"), "region.height");
    if (!(cfg.region.width > 0.0) || !(cfg.region.height > 0.0))
        throw ConfigError("region.width/region.height: must be positive");

    if (has("model")) cfg.model = take("model");
    if (cfg.model != "cost231" && cfg.model != "noisy" && cfg.model != "fading")
        throw ConfigError("model: expected cost231, noisy or fading, got '" + cfg.model + "'");

    if (has("cost231.lc")) cfg.cost231.lc = detail::parse_double(take("cost231.lc"), "cost231.lc");
    if (has("cost231.gamma"))
        cfg.cost231.gamma = detail::parse_double(take("cost231.gamma"), "cost231.gamma");
    if (has("cost231.wall_loss"))
        cfg.cost231.wall_loss = detail::parse_double(take("cost231.wall_loss"), "cost231.wall_loss");
    if (has("cost231.sigma"))
        cfg.cost231.sigma = detail::parse_double(take("cost231.sigma"), "cost231.sigma");

    if (has("analytic.alpha"))
        cfg.analytic.alpha = detail::parse_double(take("analytic.alpha"), "analytic.alpha");
    if (has("analytic.noise_floor"))
        cfg.analytic.noise_floor =
            detail::parse_double(take("analytic.noise_floor"), "analytic.noise_floor");
    if (has("analytic.noise_var"))
        cfg.analytic.noise_var =
            detail::parse_double(take("analytic.noise_var"), "analytic.noise_var");

    if (has("anchors.tx")) cfg.default_tx = detail::parse_double(take("anchors.tx"), "anchors.tx");
    if (has("anchors.file")) cfg.anchors_file = take("anchors.file");

    if (has("walls.file")) {
        cfg.walls_file = take("walls.file");
        cfg.use_default_plan = false;
    }
    if (has("walls.none") && detail::parse_bool(take("walls.none"), "walls.none")) {
        if (!cfg.walls_file.empty()) throw ConfigError("walls.none: conflicts with walls.file");
        cfg.use_default_plan = false;
    }

    if (has("grid.kind")) cfg.grid_kind = take("grid.kind");
    if (cfg.grid_kind != "square" && cfg.grid_kind != "hex" && cfg.grid_kind != "random")
        throw ConfigError("grid.kind: expected square, hex or random, got '" + cfg.grid_kind + "'");
    if (has("grid.cell")) cfg.grid_cell = detail::parse_double(take("grid.cell"), "grid.cell");
    if (has("grid.spacing"))
        cfg.grid_spacing = detail::parse_double(take("grid.spacing"), "grid.spacing");
    if (has("grid.count"))
        cfg.grid_count = static_cast<std::size_t>(detail::parse_u64(take("grid.count"), "grid.count"));
    if (!(cfg.grid_cell > 0.0) || !(cfg.grid_spacing > 0.0) || cfg.grid_count < 1)
        throw ConfigError("grid.cell/grid.spacing/grid.count: must be positive");

    if (has("m.training"))
        cfg.m_training = static_cast<std::size_t>(detail::parse_u64(take("m.training"), "m.training"));
    if (has("m.runtime"))
        cfg.m_runtime = static_cast<std::size_t>(detail::parse_u64(take("m.runtime"), "m.runtime"));
    if (cfg.m_training < 1 || cfg.m_runtime < 1)
        throw ConfigError("m.training/m.runtime: must be at least 1");

    if (has("knn.k")) cfg.k = static_cast<std::size_t>(detail::parse_u64(take("knn.k"), "knn.k"));
    if (cfg.k < 1) throw ConfigError("knn.k: must be at least 1");
    if (has("knn.weighted")) cfg.weighted = detail::parse_bool(take("knn.weighted"), "knn.weighted");

    if (has("trials"))
        cfg.trials = static_cast<std::size_t>(detail::parse_u64(take("trials"), "trials"));
    if (cfg.trials < 1) throw ConfigError("trials: must be at least 1");
    if (has("seed")) cfg.master_seed = detail::parse_u64(take("seed"), "seed");
    if (has("targets.wall_clearance"))
        cfg.target_wall_clearance =
            detail::parse_double(take("targets.wall_clearance"), "targets.wall_clearance");
    if (cfg.target_wall_clearance < 0.0)
        throw ConfigError("targets.wall_clearance: must be non-negative");

    if (has("sweep.name")) cfg.sweep_name = take("sweep.name");
    if (!known_sweeps().count(cfg.sweep_name))
        throw ConfigError("sweep.name: unknown sweep '" + cfg.sweep_name + "'");
    if (has("sweep.values")) {
        for (const std::string& v : io::split(take("sweep.values")))
            if (!v.empty()) cfg.sweep_values.push_back(v);
    }
    if (cfg.sweep_name != "none" && cfg.sweep_values.empty())
        throw ConfigError("sweep.values: required when sweep.name is set");
    if (cfg.sweep_name == "none" && !cfg.sweep_values.empty())
        throw ConfigError("sweep.values: set but sweep.name is 'none'");

    if (has("placement.method")) cfg.placement_method = take("placement.method");
    if (cfg.placement_method != "voronoi" && cfg.placement_method != "random")
        throw ConfigError("placement.method: expected voronoi or random, got '" +
                          cfg.placement_method + "'");
    if (has("placement.seed"))
        cfg.placement_seed = detail::parse_u64(take("placement.seed"), "placement.seed");

    if (!kv.empty()) throw ConfigError("unknown config key '" + kv.begin()->first + "'");

    try {
        if (cfg.model == "cost231") {
            cfg.cost231.validate();
        } else {
            cfg.analytic.model = cfg.model == "noisy" ? propagation::AnalyticModel::noisy
                                                      : propagation::AnalyticModel::fading;
            cfg.analytic.validate();
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    // Referenced files are loaded eagerly so a bad path fails here, with the
    // offending field named, rather than mid-experiment.
    if (!cfg.anchors_file.empty()) {
        try {
            cfg.anchors = io::read_anchors(cfg.anchors_file);
        } catch (const io::ParseError& e) {
            throw ConfigError(std::string("anchors.file: ") + e.what());
        }
    }
    if (!cfg.walls_file.empty()) {
        try {
            cfg.plan = io::read_floorplan(cfg.walls_file);
        } catch (const io::ParseError& e) {
            throw ConfigError(std::string("walls.file: ") + e.what());
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    return config_from_map(read_key_values(path));
}

// Setup for the error-exponent estimation command. Distributions are comma
// lists of probabilities; a single value is shorthand for Bernoulli.
struct ExponentRunConfig {
    std::vector<double> p1{0.6, 0.4};
    std::vector<double> p2{0.4, 0.6};
    std::string test = "typical_set";  // typical_set | np | map
    double epsilon = 0.02;
    double gamma = 0.0;
    double prior1 = 0.5;
    std::vector<std::size_t> n_values{50, 100, 150, 200, 250, 300};
    std::size_t trials = 100000;
    std::uint64_t seed = 1;
};

inline ExponentRunConfig exponent_config_from_map(std::map<std::string, std::string> kv) {
    ExponentRunConfig cfg;
    auto take = [&](const std::string& key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return "";
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto has = [&](const std::string& key) { return kv.count(key) > 0; };
    auto parse_pmf = [](const std::string& text, const std::string& key) {
        std::vector<double> probs;
        for (const std::string& part : io::split(text))
            probs.push_back(detail::parse_double(part, key));
        if (probs.size() == 1) {
            if (!(probs[0] > 0.0) || !(probs[0] < 1.0))
                throw ConfigError(key + ": a single value must be a probability in (0,1)");
            probs = {probs[0], 1.0 - probs[0]};
        }
        return probs;
    };

    if (has("exponent.p1")) cfg.p1 = parse_pmf(take("exponent.p1"), "exponent.p1");
    if (has("exponent.p2")) cfg.p2 = parse_pmf(take("exponent.p2"), "exponent.p2");
    if (has("exponent.test")) cfg.test = take("exponent.test");
    if (cfg.test != "typical_set" && cfg.test != "np" && cfg.test != "map")
        throw ConfigError("exponent.test: expected typical_set, np or map, got '" + cfg.test + "'");
    if (has("exponent.epsilon"))
        cfg.epsilon = detail::parse_double(take("exponent.epsilon"), "exponent.epsilon");
    if (has("exponent.gamma"))
        cfg.gamma = detail::parse_double(take("exponent.gamma"), "exponent.gamma");
    if (has("exponent.prior1"))
        cfg.prior1 = detail::parse_double(take("exponent.prior1"), "exponent.prior1");
    if (has("exponent.n")) {
        cfg.n_values.clear();
        for (const std::string& part : io::split(take("exponent.n")))
            cfg.n_values.push_back(
                static_cast<std::size_t>(detail::parse_u64(part, "exponent.n")));
    }
    if (has("exponent.trials"))
        cfg.trials =
            static_cast<std::size_t>(detail::parse_u64(take("exponent.trials"), "exponent.trials"));
    if (has("seed")) cfg.seed = detail::parse_u64(take("seed"), "seed");
    if (!kv.empty()) throw ConfigError("unknown config key '" + kv.begin()->first + "'");
    if (!(cfg.epsilon > 0.0)) throw ConfigError("exponent.epsilon: must be positive");
    if (!(cfg.prior1 > 0.0) || !(cfg.prior1 < 1.0))
        throw ConfigError("exponent.prior1: must lie in (0,1)");
    return cfg;
}

inline ExponentRunConfig load_exponent_config(const std::string& path) {
    return exponent_config_from_map(read_key_values(path));
}

}  // namespace fploc::config
