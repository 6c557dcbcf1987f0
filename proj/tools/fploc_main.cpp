// fploc: command-line front end for the fingerprinting-localization toolkit.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fploc/config.hpp"
#include "fploc/divergence.hpp"
#include "fploc/harness.hpp"
#include "fploc/hypothesis.hpp"
#include "fploc/io.hpp"
#include "fploc/placement.hpp"

namespace {

using fploc::config::ConfigError;

// Output sink: --out PATH or stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw ConfigError("--out: cannot open '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

fploc::config::ExperimentConfig load_experiment(const std::string& path, CLI::Option* seed_opt,
                                                std::uint64_t seed) {
    fploc::config::ExperimentConfig cfg =
        path.empty() ? fploc::config::ExperimentConfig{} : fploc::config::load_config(path);
    if (seed_opt->count() > 0) cfg.master_seed = seed;
    return cfg;
}

int run_simulate(const std::string& config_path, CLI::Option* seed_opt, std::uint64_t seed,
                 const std::string& out, unsigned threads, bool raw) {
    if (raw && out.empty()) throw ConfigError("--raw requires --out");
    const auto cfg = load_experiment(config_path, seed_opt, seed);
    const auto result = fploc::harness::run_experiment(cfg, threads, raw);
    Sink sink(out);
    fploc::harness::write_results(sink.stream(), result);
    if (raw) {
        std::ofstream rf(out + ".raw.csv");
        if (!rf) throw ConfigError("--raw: cannot open '" + out + ".raw.csv'");
        fploc::harness::write_raw_errors(rf, result);
    }
    return 0;
}

int run_spatial(const std::string& config_path, CLI::Option* seed_opt, std::uint64_t seed,
                const std::string& out, unsigned threads, double raster) {
    const auto cfg = load_experiment(config_path, seed_opt, seed);
    const auto map = fploc::harness::run_spatial_map(cfg, raster, threads);
    Sink sink(out);
    fploc::harness::write_spatial_map(sink.stream(), map);
    return 0;
}

int run_analyze_kl(const std::string& config_path, const std::string& field, double ex, double ey,
                   double raster, const std::string& out) {
    const auto cfg = config_path.empty() ? fploc::config::ExperimentConfig{}
                                         : fploc::config::load_config(config_path);
    if (cfg.model == "cost231")
        throw ConfigError("model: analyze-kl needs an analytic model (noisy or fading)");
    if (!(raster > 0.0)) throw ConfigError("--raster: must be positive");
    fploc::divergence::Scenario scen;
    scen.anchors = fploc::harness::detail::resolve_base_anchors(cfg);
    scen.params = cfg.analytic;
    scen.params.model = cfg.model == "noisy" ? fploc::propagation::AnalyticModel::noisy
                                             : fploc::propagation::AnalyticModel::fading;

    const std::size_t nx = fploc::geometry::detail::raster_cells(cfg.region.width, raster);
    const std::size_t ny = fploc::geometry::detail::raster_cells(cfg.region.height, raster);
    fploc::geometry::LabelMap frame;
    frame.region = cfg.region;
    frame.resolution = raster;
    frame.nx = nx;
    frame.ny = ny;

    Sink sink(out);
    std::ostream& os = sink.stream();
    os << "x,y,value\n";
    for (std::size_t iy = 0; iy < ny; ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const fploc::geometry::Point u = frame.cell_center(ix, iy);
            double value = 0.0;
            if (field == "approx") {
                value = fploc::divergence::level_field_approx(u, scen);
            } else if (scen.params.model == fploc::propagation::AnalyticModel::noisy) {
                value = fploc::divergence::level_curve_value(u, {ex, ey}, scen);
            } else {
                value = fploc::divergence::kl_fading_rss(u, {u.x + ex, u.y + ey}, scen);
            }
            os << fploc::io::fmt(u.x, 12) << ',' << fploc::io::fmt(u.y, 12) << ','
               << fploc::io::fmt(value, 12) << '\n';
        }
    }
    return 0;
}

int run_exponent(const std::string& config_path, CLI::Option* seed_opt, std::uint64_t seed,
                 const std::string& out, unsigned threads) {
    fploc::config::ExponentRunConfig cfg = config_path.empty()
                                               ? fploc::config::ExponentRunConfig{}
                                               : fploc::config::load_exponent_config(config_path);
    if (seed_opt->count() > 0) cfg.seed = seed;

    fploc::divergence::DiscreteDistribution p1, p2;
    try {
        p1 = fploc::divergence::DiscreteDistribution(cfg.p1);
        p2 = fploc::divergence::DiscreteDistribution(cfg.p2);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("exponent.p1/p2: ") + e.what());
    }

    fploc::hypothesis::TestRule rule = fploc::hypothesis::TypicalSetRule{cfg.epsilon};
    double theory = 0.0;
    if (cfg.test == "np") {
        rule = fploc::hypothesis::NeymanPearsonRule{cfg.gamma};
        theory = fploc::divergence::kl_discrete(p1, p2);
    } else if (cfg.test == "map") {
        rule = fploc::hypothesis::MapRule{cfg.prior1};
        theory = fploc::divergence::chernoff_information(p1, p2);
    } else {
        theory = fploc::divergence::kl_discrete(p1, p2);
    }

    const auto est = fploc::hypothesis::estimate_error_exponent(p1, p2, rule, cfg.n_values,
                                                                cfg.trials, cfg.seed, threads);
    Sink sink(out);
    std::ostream& os = sink.stream();
    os << "n,errors,trials,log_error\n";
    for (std::size_t n : cfg.n_values) {
        bool usable = false;
        for (std::size_t i = 0; i < est.n_values.size(); ++i) {
            if (est.n_values[i] == n) {
                os << n << ',' << est.error_counts[i] << ',' << est.trials << ','
                   << fploc::io::fmt(est.log_error[i], 12) << '\n';
                usable = true;
                break;
            }
        }
        if (!usable) os << n << ",0," << est.trials << ",-inf\n";
    }
    os << fploc::io::fmt(est.slope, 12) << ',' << fploc::io::fmt(est.slope_stderr, 12) << ','
       << fploc::io::fmt(theory, 12) << '\n';
    return 0;
}

int run_place_anchors(const std::string& config_path, CLI::Option* seed_opt, std::uint64_t seed,
                      const std::string& out, std::size_t count, const std::string& method_flag) {
    fploc::config::ExperimentConfig cfg = config_path.empty()
                                              ? fploc::config::ExperimentConfig{}
                                              : fploc::config::load_config(config_path);
    std::string method = method_flag.empty() ? cfg.placement_method : method_flag;
    if (seed_opt->count() > 0) cfg.placement_seed = seed;
    const auto anchors = fploc::harness::detail::resolve_base_anchors(cfg);
    const auto plan = fploc::placement::place_new_anchors(
        anchors, cfg.region, count,
        method == "voronoi" ? fploc::placement::PlacementMethod::voronoi_vertices
                            : fploc::placement::PlacementMethod::random_uniform,
        cfg.placement_seed);
    Sink sink(out);
    std::ostream& os = sink.stream();
    os << "step,x,y,min_dist\n";
    for (std::size_t i = 0; i < plan.added.size(); ++i)
        os << (i + 1) << ',' << fploc::io::fmt(plan.added[i].x, 12) << ','
           << fploc::io::fmt(plan.added[i].y, 12) << ','
           << fploc::io::fmt(plan.min_distances[i], 12) << '\n';
    return 0;
}

int run_ingest(const std::string& in, const std::string& out) {
    const auto data = fploc::harness::ingest_trace(in);
    Sink sink(out);
    fploc::io::write_database(sink.stream(), data.db, data.ap_ids);
    return 0;
}

int run_evaluate(const std::string& train, const std::string& eval_path, std::size_t k,
                 bool weighted, const std::string& out) {
    const auto result = fploc::harness::evaluate_on_trace(train, eval_path, k, weighted);
    Sink sink(out);
    fploc::harness::write_trace_evaluation(sink.stream(), result);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RSS-fingerprinting localization simulator"};
    app.require_subcommand(1);

    std::string config_path, out, train, eval_path, in_path;
    std::string field = "approx", method;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool raw = false, weighted = false;
    double raster = 1.0, kl_raster = 0.5, ex = 1.0, ey = 0.0;
    std::size_t count = 1, k = 3;

    auto* sim = app.add_subcommand("simulate", "Run the configured localization experiment");
    sim->add_option("--config", config_path, "experiment config file")->required();
    auto* sim_seed = sim->add_option("--seed", seed, "override the master seed");
    sim->add_option("--out", out, "output CSV path (default stdout)");
    sim->add_option("--threads", threads, "worker threads");
    sim->add_flag("--raw", raw, "also write per-trial errors to <out>.raw.csv");

    auto* spat = app.add_subcommand("spatial-map", "Mean localization error over a raster");
    spat->add_option("--config", config_path, "experiment config file")->required();
    auto* spat_seed = spat->add_option("--seed", seed, "override the master seed");
    spat->add_option("--out", out, "output CSV path (default stdout)");
    spat->add_option("--threads", threads, "worker threads");
    spat->add_option("--raster", raster, "evaluation raster size, meters");

    auto* akl = app.add_subcommand("analyze-kl", "Divergence field of an analytic scenario");
    akl->add_option("--config", config_path, "experiment config file (analytic model)");
    akl->add_option("--field", field, "level (finite displacement) or approx")
        ->check(CLI::IsMember({"level", "approx"}));
    akl->add_option("--ex", ex, "displacement x for --field level");
    akl->add_option("--ey", ey, "displacement y for --field level");
    akl->add_option("--raster", kl_raster, "raster size, meters");
    akl->add_option("--out", out, "output CSV path (default stdout)");

    auto* expo = app.add_subcommand("exponent", "Monte Carlo error-exponent estimate");
    expo->add_option("--config", config_path, "exponent config file");
    auto* expo_seed = expo->add_option("--seed", seed, "override the seed");
    expo->add_option("--out", out, "output CSV path (default stdout)");
    expo->add_option("--threads", threads, "worker threads");

    auto* place = app.add_subcommand("place-anchors", "Plan additional anchor locations");
    place->add_option("--config", config_path, "experiment config file");
    place->add_option("--count", count, "number of anchors to add")->required();
    place->add_option("--method", method, "voronoi or random")
        ->check(CLI::IsMember({"voronoi", "random"}));
    auto* place_seed = place->add_option("--seed", seed, "seed for random placement");
    place->add_option("--out", out, "output CSV path (default stdout)");

    auto* ingest = app.add_subcommand("ingest-trace", "Build a fingerprint database from a trace");
    ingest->add_option("--in", in_path, "trace CSV")->required();
    ingest->add_option("--out", out, "output CSV path (default stdout)");

    auto* eval = app.add_subcommand("evaluate-trace", "Score a matcher on a second trace");
    eval->add_option("--train", train, "training trace CSV")->required();
    eval->add_option("--eval", eval_path, "evaluation trace CSV")->required();
    eval->add_option("--k", k, "number of neighbours");
    eval->add_flag("--weighted", weighted, "inverse-distance weighting");
    eval->add_option("--out", out, "output CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(config_path, sim_seed, seed, out, threads, raw);
        if (spat->parsed()) return run_spatial(config_path, spat_seed, seed, out, threads, raster);
        if (akl->parsed()) return run_analyze_kl(config_path, field, ex, ey, kl_raster, out);
        if (expo->parsed()) return run_exponent(config_path, expo_seed, seed, out, threads);
        if (place->parsed())
            return run_place_anchors(config_path, place_seed, seed, out, count, method);
        if (ingest->parsed()) return run_ingest(in_path, out);
        if (eval->parsed()) return run_evaluate(train, eval_path, k, weighted, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const fploc::io::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 3;
    } catch (const fploc::hypothesis::InsufficientErrorData& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
