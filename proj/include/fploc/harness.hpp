#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fploc/config.hpp"
#include "fploc/divergence.hpp"
#include "fploc/fingerprinting.hpp"
#include "fploc/geometry.hpp"
#include "fploc/io.hpp"
#include "fploc/placement.hpp"
#include "fploc/propagation.hpp"
#include "fploc/rng.hpp"

namespace fploc::harness {

using config::ConfigError;
using config::ExperimentConfig;

// Built-in office layout for the default 30 m x 18 m region: two horizontal
// corridors with office partitions above, below and between them.
inline propagation::FloorPlan default_floor_plan() {
    propagation::FloorPlan plan;
    auto wall = [&](double x1, double y1, double x2, double y2) {
        plan.walls.push_back({{x1, y1}, {x2, y2}, std::nullopt});
    };
    // corridor walls
    wall(0.0, 6.0, 30.0, 6.0);
    wall(0.0, 7.5, 30.0, 7.5);
    wall(0.0, 10.5, 30.0, 10.5);
    wall(0.0, 12.0, 30.0, 12.0);
    // office partitions, bottom band
    for (double x = 5.0; x <= 25.0; x += 5.0) wall(x, 0.0, x, 6.0);
    // partitions between the corridors
    wall(10.0, 7.5, 10.0, 10.5);
    wall(20.0, 7.5, 20.0, 10.5);
    // office partitions, top band
    for (double x = 5.0; x <= 25.0; x += 5.0) wall(x, 12.0, x, 18.0);
    return plan;
}

inline std::vector<propagation::Anchor> default_anchors(const geometry::Region& region,
                                                        double tx) {
    return {{{region.origin.x + 0.1 * region.width, region.origin.y + 0.15 * region.height}, tx},
            {{region.origin.x + 0.9 * region.width, region.origin.y + 0.15 * region.height}, tx},
            {{region.origin.x + 0.1 * region.width, region.origin.y + 0.85 * region.height}, tx},
            {{region.origin.x + 0.9 * region.width, region.origin.y + 0.85 * region.height}, tx}};
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace detail {

inline propagation::FloorPlan resolve_plan(const ExperimentConfig& cfg) {
    if (!cfg.walls_file.empty()) return cfg.plan;
    return cfg.use_default_plan ? default_floor_plan() : propagation::FloorPlan{};
}

inline std::vector<propagation::Anchor> resolve_base_anchors(const ExperimentConfig& cfg) {
    return cfg.anchors.empty() ? default_anchors(cfg.region, cfg.default_tx) : cfg.anchors;
}

inline propagation::RssModel resolve_model(const ExperimentConfig& cfg,
                                           const propagation::FloorPlan& plan) {
    if (cfg.model == "cost231") return propagation::make_cost231_model(cfg.cost231, plan);
    propagation::AnalyticChannelParams p = cfg.analytic;
    p.model = cfg.model == "noisy" ? propagation::AnalyticModel::noisy
                                   : propagation::AnalyticModel::fading;
    return cfg.model == "noisy" ? propagation::make_noisy_model(p)
                                : propagation::make_fading_model(p);
}

inline geometry::TrainingGrid resolve_grid(const ExperimentConfig& cfg) {
    if (cfg.grid_kind == "square") return geometry::generate_square_grid(cfg.region, cfg.grid_cell);
    if (cfg.grid_kind == "hex") return geometry::generate_hex_grid(cfg.region, cfg.grid_spacing);
    return geometry::generate_random_grid(cfg.region, cfg.grid_count, cfg.master_seed);
}

inline std::size_t sweep_count(const std::string& label, const std::string& name) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(label, &pos);
        if (pos != label.size()) throw std::invalid_argument("");
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("sweep.values: '" + label + "' is not a count for sweep " + name);
    }
}

inline double sweep_real(const std::string& label, const std::string& name) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(label, &pos);
        if (pos != label.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("sweep.values: '" + label + "' is not a number for sweep " + name);
    }
}

// A config with one sweep value applied. anchors.added is handled by the
// caller (it changes the anchor set, not a config field).
inline ExperimentConfig apply_sweep(ExperimentConfig cfg, const std::string& label) {
    const std::string& name = cfg.sweep_name;
    if (name == "none" || name == "anchors.added") return cfg;
    if (name == "grid.kind") {
        if (label != "square" && label != "hex" && label != "random")
            throw ConfigError("sweep.values: unknown grid kind '" + label + "'");
        cfg.grid_kind = label;
    } else if (name == "grid.cell") {
        cfg.grid_cell = sweep_real(label, name);
    } else if (name == "grid.spacing") {
        cfg.grid_spacing = sweep_real(label, name);
    } else if (name == "grid.count") {
        cfg.grid_count = sweep_count(label, name);
    } else if (name == "m.both") {
        cfg.m_training = cfg.m_runtime = sweep_count(label, name);
    } else if (name == "m.training") {
        cfg.m_training = sweep_count(label, name);
    } else if (name == "m.runtime") {
        cfg.m_runtime = sweep_count(label, name);
    } else if (name == "knn.k") {
        cfg.k = sweep_count(label, name);
    } else if (name == "cost231.gamma") {
        cfg.cost231.gamma = sweep_real(label, name);
    } else if (name == "cost231.wall_loss") {
        cfg.cost231.wall_loss = sweep_real(label, name);
    } else if (name == "cost231.sigma") {
        cfg.cost231.sigma = sweep_real(label, name);
    } else if (name == "analytic.alpha") {
        cfg.analytic.alpha = sweep_real(label, name);
    } else if (name == "analytic.noise_var") {
        cfg.analytic.noise_var = sweep_real(label, name);
    }
    if (cfg.m_training < 1 || cfg.m_runtime < 1 || cfg.k < 1)
        throw ConfigError("sweep.values: counts must be at least 1 (got '" + label + "')");
    return cfg;
}

inline geometry::Point draw_target(const ExperimentConfig& cfg,
                                   const propagation::FloorPlan& plan, rng::Stream& stream) {
    for (int attempt = 0; attempt < 100000; ++attempt) {
        geometry::Point p{cfg.region.origin.x + stream.uniform01() * cfg.region.width,
                          cfg.region.origin.y + stream.uniform01() * cfg.region.height};
        if (cfg.target_wall_clearance <= 0.0) return p;
        bool clear = true;
        for (const propagation::Wall& w : plan.walls) {
            if (geometry::distance_point_segment(p, w.a, w.b) < cfg.target_wall_clearance) {
                clear = false;
                break;
            }
        }
        if (clear) return p;
    }
    throw ConfigError("targets.wall_clearance: no admissible target locations");
}

}  // namespace detail

struct SweepRow {
    std::string label;
    fingerprinting::ErrorStats stats;
    std::size_t trials = 0;
    std::vector<double> raw;  // per-trial errors in trial order; filled on request
};

struct ExperimentResult {
    std::string sweep_name;
    std::vector<SweepRow> rows;
};

// Runs the configured experiment: for every sweep value, build the training
// database, then `trials` rounds of (uniform random target, localize). The
// per-trial RNG stream is derived from (seed, hash of "sweep=value", trial),
// so results are bit-identical at any thread count and unaffected by the
// order of sweep values.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads = 1,
                                       bool collect_raw = false) {
    if (threads == 0) threads = 1;
    ExperimentResult result;
    result.sweep_name = cfg.sweep_name;
    std::vector<std::string> labels = cfg.sweep_values;
    if (cfg.sweep_name == "none") labels = {"default"};

    const std::vector<propagation::Anchor> base = detail::resolve_base_anchors(cfg);
    for (const std::string& label : labels) {
        const ExperimentConfig sub = detail::apply_sweep(cfg, label);
        const propagation::FloorPlan plan = detail::resolve_plan(sub);
        const propagation::RssModel model = detail::resolve_model(sub, plan);
        const geometry::TrainingGrid grid = detail::resolve_grid(sub);

        std::vector<propagation::Anchor> anchors = base;
        if (cfg.sweep_name == "anchors.added") {
            const std::size_t added = detail::sweep_count(label, cfg.sweep_name);
            if (added > 0) {
                const auto method = cfg.placement_method == "voronoi"
                                        ? placement::PlacementMethod::voronoi_vertices
                                        : placement::PlacementMethod::random_uniform;
                const placement::PlacementPlan pp = placement::place_new_anchors(
                    base, cfg.region, added, method, cfg.placement_seed);
                for (const geometry::Point& p : pp.added)
                    anchors.push_back({p, cfg.default_tx});
            }
        }

        const std::uint64_t vhash = fnv1a64(cfg.sweep_name + "=" + label);
        const fingerprinting::TrainingDatabase db = fingerprinting::build_database(
            grid, anchors, model, sub.m_training,
            rng::derive_seed(cfg.master_seed, rng::Domain::database, vhash), threads);

        std::vector<double> errors(sub.trials, 0.0);
        auto worker = [&](unsigned t) {
            for (std::size_t trial = t; trial < sub.trials; trial += threads) {
                rng::Stream stream(rng::derive_seed(cfg.master_seed,
                                                    rng::Domain::trial_runtime, vhash, trial));
                const geometry::Point target = detail::draw_target(sub, plan, stream);
                const auto res = fingerprinting::localize(db, anchors, model, target,
                                                          sub.m_runtime, sub.k, sub.weighted,
                                                          stream);
                errors[trial] = res.error;
            }
        };
        if (threads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
            for (auto& th : pool) th.join();
        }

        SweepRow row;
        row.label = label;
        row.trials = sub.trials;
        row.stats = fingerprinting::error_stats(errors);
        if (collect_raw) row.raw = std::move(errors);
        result.rows.push_back(std::move(row));
    }
    return result;
}

struct SpatialCell {
    geometry::Point center;
    double mean_error = 0.0;
};

struct SpatialMap {
    std::vector<SpatialCell> cells;  // row-major, y outer
};

// Mean localization error over repeated trials at every raster cell center.
inline SpatialMap run_spatial_map(const ExperimentConfig& cfg, double eval_raster,
                                  unsigned threads = 1) {
    if (!(eval_raster > 0.0)) throw ConfigError("raster: must be positive");
    if (cfg.sweep_name != "none")
        throw ConfigError("sweep.name: spatial maps do not support sweeps");
    if (threads == 0) threads = 1;
    const propagation::FloorPlan plan = detail::resolve_plan(cfg);
    const propagation::RssModel model = detail::resolve_model(cfg, plan);
    const geometry::TrainingGrid grid = detail::resolve_grid(cfg);
    const std::vector<propagation::Anchor> anchors = detail::resolve_base_anchors(cfg);
    const fingerprinting::TrainingDatabase db = fingerprinting::build_database(
        grid, anchors, model, cfg.m_training,
        rng::derive_seed(cfg.master_seed, rng::Domain::database, fnv1a64("spatial")), threads);

    const std::size_t nx = geometry::detail::raster_cells(cfg.region.width, eval_raster);
    const std::size_t ny = geometry::detail::raster_cells(cfg.region.height, eval_raster);
    geometry::LabelMap frame;  // reused only for its center arithmetic
    frame.region = cfg.region;
    frame.resolution = eval_raster;
    frame.nx = nx;
    frame.ny = ny;

    SpatialMap map;
    map.cells.resize(nx * ny);
    auto worker = [&](unsigned t) {
        for (std::size_t cell = t; cell < nx * ny; cell += threads) {
            const geometry::Point center = frame.cell_center(cell % nx, cell / nx);
            double sum = 0.0;
            for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
                rng::Stream stream(rng::derive_seed(cfg.master_seed,
                                                    rng::Domain::trial_runtime, cell, trial));
                sum += fingerprinting::localize(db, anchors, model, center, cfg.m_runtime,
                                                cfg.k, cfg.weighted, stream)
                           .error;
            }
            map.cells[cell] = {center, sum / static_cast<double>(cfg.trials)};
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    return map;
}

struct TraceData {
    fingerprinting::TrainingDatabase db;
    std::vector<std::string> ap_ids;   // sorted; fingerprint column order
    std::vector<std::string> loc_ids;  // file order of first appearance
};

// Groups trace records into per-location fingerprints. The AP universe is
// the sorted union over the file; anchors unheard at a location get the
// floor entry. Samples are averaged in sample_idx order.
inline TraceData ingest_trace(const std::string& path) {
    const std::vector<io::TraceRecord> records = io::read_trace(path);

    std::set<std::string> ap_set;
    for (const io::TraceRecord& r : records) ap_set.insert(r.ap_id);
    TraceData data;
    data.ap_ids.assign(ap_set.begin(), ap_set.end());
    std::map<std::string, std::size_t> ap_col;
    for (std::size_t i = 0; i < data.ap_ids.size(); ++i) ap_col[data.ap_ids[i]] = i;

    std::map<std::string, std::size_t> loc_index;
    std::vector<geometry::Point> coords;
    std::vector<std::vector<std::vector<std::pair<long long, double>>>> samples;
    std::set<std::string> seen_keys;
    for (const io::TraceRecord& r : records) {
        const std::string key = r.loc_id + "\x1f" + r.ap_id + "\x1f" + std::to_string(r.sample_idx);
        if (!seen_keys.insert(key).second)
            throw io::ParseError(path, r.line,
                                 "duplicate sample (" + r.loc_id + ", " + r.ap_id + ", " +
                                     std::to_string(r.sample_idx) + ")");
        auto it = loc_index.find(r.loc_id);
        std::size_t li;
        if (it == loc_index.end()) {
            li = coords.size();
            loc_index[r.loc_id] = li;
            data.loc_ids.push_back(r.loc_id);
            coords.push_back({r.x, r.y});
            samples.emplace_back(data.ap_ids.size());
        } else {
            li = it->second;
            if (coords[li].x != r.x || coords[li].y != r.y)
                throw io::ParseError(path, r.line,
                                     "location '" + r.loc_id + "' has inconsistent coordinates");
        }
        samples[li][ap_col[r.ap_id]].emplace_back(r.sample_idx, r.rss);
    }

    data.db.grid.kind = geometry::GridKind::random_uniform;
    data.db.grid.points = coords;
    data.db.meta.model_name = "trace";
    data.db.fingerprints.reserve(coords.size());
    for (auto& per_loc : samples) {
        std::vector<std::vector<double>> values(per_loc.size());
        for (std::size_t a = 0; a < per_loc.size(); ++a) {
            std::sort(per_loc[a].begin(), per_loc[a].end());
            values[a].reserve(per_loc[a].size());
            for (const auto& [idx, rss] : per_loc[a]) values[a].push_back(rss);
        }
        data.db.fingerprints.push_back(fingerprinting::make_fingerprint(values));
    }
    return data;
}

namespace detail {

// Fingerprint re-indexed onto a wider AP-id universe; unknown columns get
// the floor entry.
inline fingerprinting::Fingerprint widen_fingerprint(const fingerprinting::Fingerprint& fp,
                                                     const std::vector<std::string>& from_ids,
                                                     const std::vector<std::string>& to_ids) {
    fingerprinting::Fingerprint out;
    out.mean_rss.assign(to_ids.size(), fingerprinting::kMissingAnchorFloor);
    out.counts.assign(to_ids.size(), 0);
    for (std::size_t i = 0; i < from_ids.size(); ++i) {
        const auto it = std::find(to_ids.begin(), to_ids.end(), from_ids[i]);
        const std::size_t j = static_cast<std::size_t>(it - to_ids.begin());
        out.mean_rss[j] = fp.mean_rss[i];
        out.counts[j] = fp.counts[i];
    }
    return out;
}

}  // namespace detail

struct TraceEvalRow {
    std::string loc_id;
    geometry::Point truth;
    geometry::Point estimate;
    double error = 0.0;
    bool no_shared_ap = false;  // no AP heard here was ever heard in training
};

struct TraceEvaluation {
    std::vector<TraceEvalRow> rows;  // evaluation-file location order
    fingerprinting::ErrorStats stats;
};

// Trains a matcher on one trace and scores it against another. Both sides
// are re-indexed onto the union of their AP universes before matching.
inline TraceEvaluation evaluate_on_trace(const std::string& train_path,
                                         const std::string& eval_path, std::size_t k,
                                         bool weighted) {
    const TraceData train = ingest_trace(train_path);
    const TraceData eval = ingest_trace(eval_path);

    std::set<std::string> union_set(train.ap_ids.begin(), train.ap_ids.end());
    union_set.insert(eval.ap_ids.begin(), eval.ap_ids.end());
    const std::vector<std::string> union_ids(union_set.begin(), union_set.end());

    fingerprinting::TrainingDatabase db;
    db.grid = train.db.grid;
    db.meta = train.db.meta;
    db.fingerprints.reserve(train.db.fingerprints.size());
    for (const auto& fp : train.db.fingerprints)
        db.fingerprints.push_back(detail::widen_fingerprint(fp, train.ap_ids, union_ids));

    std::set<std::string> train_heard;
    for (const auto& fp : train.db.fingerprints)
        for (std::size_t a = 0; a < fp.counts.size(); ++a)
            if (fp.counts[a] > 0) train_heard.insert(train.ap_ids[a]);

    TraceEvaluation out;
    std::vector<double> errors;
    errors.reserve(eval.db.fingerprints.size());
    for (std::size_t i = 0; i < eval.db.fingerprints.size(); ++i) {
        const auto query =
            detail::widen_fingerprint(eval.db.fingerprints[i], eval.ap_ids, union_ids);
        TraceEvalRow row;
        row.loc_id = eval.loc_ids[i];
        row.truth = eval.db.grid.points[i];
        row.estimate = fingerprinting::knn_estimate(db, query, k, weighted);
        row.error = geometry::distance(row.estimate, row.truth);
        row.no_shared_ap = true;
        for (std::size_t a = 0; a < eval.ap_ids.size(); ++a) {
            if (eval.db.fingerprints[i].counts[a] > 0 && train_heard.count(eval.ap_ids[a]))
                row.no_shared_ap = false;
        }
        errors.push_back(row.error);
        out.rows.push_back(std::move(row));
    }
    out.stats = fingerprinting::error_stats(errors);
    return out;
}

// ---- CSV emission for the CLI ----

inline void write_results(std::ostream& os, const ExperimentResult& result) {
    os << "sweep_value,min,q25,median,q75,max,mean,trials\n";
    for (const SweepRow& row : result.rows) {
        os << row.label << ',' << io::fmt(row.stats.min, 12) << ',' << io::fmt(row.stats.q25, 12)
           << ',' << io::fmt(row.stats.median, 12) << ',' << io::fmt(row.stats.q75, 12) << ','
           << io::fmt(row.stats.max, 12) << ',' << io::fmt(row.stats.mean, 12) << ','
           << row.trials << '\n';
    }
}

inline void write_raw_errors(std::ostream& os, const ExperimentResult& result) {
    os << "sweep_value,trial,error\n";
    for (const SweepRow& row : result.rows)
        for (std::size_t t = 0; t < row.raw.size(); ++t)
            os << row.label << ',' << t << ',' << io::fmt(row.raw[t]) << '\n';
}

inline void write_spatial_map(std::ostream& os, const SpatialMap& map) {
    os << "x,y,mean_error\n";
    for (const SpatialCell& c : map.cells)
        os << io::fmt(c.center.x, 12) << ',' << io::fmt(c.center.y, 12) << ','
           << io::fmt(c.mean_error, 12) << '\n';
}

inline void write_trace_evaluation(std::ostream& os, const TraceEvaluation& eval) {
    os << "loc_id,true_x,true_y,est_x,est_y,error,no_shared_ap\n";
    for (const TraceEvalRow& r : eval.rows)
        os << r.loc_id << ',' << io::fmt(r.truth.x) << ',' << io::fmt(r.truth.y) << ','
           << io::fmt(r.estimate.x) << ',' << io::fmt(r.estimate.y) << ','
           << io::fmt(r.error, 12) << ',' << (r.no_shared_ap ? 1 : 0) << '\n';
    os << "summary," << io::fmt(eval.stats.min, 12) << ',' << io::fmt(eval.stats.q25, 12) << ','
       << io::fmt(eval.stats.median, 12) << ',' << io::fmt(eval.stats.q75, 12) << ','
       << io::fmt(eval.stats.max, 12) << ',' << io::fmt(eval.stats.mean, 12) << '\n';
}

}  // namespace fploc::harness
