#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fploc/divergence.hpp"
#include "fploc/geometry.hpp"
#include "fploc/propagation.hpp"
#include "fploc/rng.hpp"

namespace fploc::fingerprinting {

// Entry recorded for an anchor that was never heard at a location.
inline constexpr double kMissingAnchorFloor = -100.0;  // dBm

struct Fingerprint {
    std::vector<double> mean_rss;  // one entry per anchor (dBm or milliwatts)
    std::vector<int> counts;       // samples behind each mean; 0 = anchor unheard
    std::vector<divergence::DiscreteDistribution> empirical;  // optional, may be empty

    std::size_t anchor_count() const { return mean_rss.size(); }
};

// Averages the per-anchor sample lists. An anchor with no samples gets the
// floor value and count 0; a fingerprint needs at least one heard anchor.
inline Fingerprint make_fingerprint(const std::vector<std::vector<double>>& samples) {
    if (samples.empty()) throw std::invalid_argument("make_fingerprint: no anchors");
    Fingerprint fp;
    fp.mean_rss.reserve(samples.size());
    fp.counts.reserve(samples.size());
    bool any = false;
    for (const auto& list : samples) {
        if (list.empty()) {
            fp.mean_rss.push_back(kMissingAnchorFloor);
            fp.counts.push_back(0);
            continue;
        }
        any = true;
        double sum = 0.0;
        for (double v : list) sum += v;
        fp.mean_rss.push_back(sum / static_cast<double>(list.size()));
        fp.counts.push_back(static_cast<int>(list.size()));
    }
    if (!any) throw std::invalid_argument("make_fingerprint: every anchor is missing");
    return fp;
}

struct DatabaseMeta {
    std::string model_name;
    std::uint64_t seed = 0;
    std::size_t m_training = 0;
};

struct TrainingDatabase {
    geometry::TrainingGrid grid;
    std::vector<Fingerprint> fingerprints;
    DatabaseMeta meta;
};

// Surveys every training point: m samples per anchor (anchor-major order)
// from a per-point derived stream, then the mean fingerprint. Deterministic
// for a fixed seed at any thread count.
inline TrainingDatabase build_database(const geometry::TrainingGrid& grid,
                                       const std::vector<propagation::Anchor>& anchors,
                                       const propagation::RssModel& model, std::size_t m,
                                       std::uint64_t seed, unsigned threads = 1) {
    if (m < 1) throw std::invalid_argument("build_database: need at least one sample");
    if (anchors.empty()) throw std::invalid_argument("build_database: no anchors");
    if (threads == 0) threads = 1;
    TrainingDatabase db;
    db.grid = grid;
    db.meta = {model.name, seed, m};
    db.fingerprints.resize(grid.points.size());
    auto worker = [&](unsigned t) {
        for (std::size_t i = t; i < grid.points.size(); i += threads) {
            rng::Stream stream(rng::derive_seed(seed, rng::Domain::database, i));
            std::vector<std::vector<double>> samples(anchors.size());
            for (std::size_t a = 0; a < anchors.size(); ++a) {
                samples[a].reserve(m);
                for (std::size_t s = 0; s < m; ++s)
                    samples[a].push_back(model.sample(grid.points[i], anchors[a], stream));
            }
            db.fingerprints[i] = make_fingerprint(samples);
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    return db;
}

inline double fingerprint_distance(const Fingerprint& a, const Fingerprint& b) {
    if (a.anchor_count() != b.anchor_count())
        throw std::invalid_argument("fingerprint_distance: anchor count mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.mean_rss.size(); ++i) {
        const double d = a.mean_rss[i] - b.mean_rss[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

// k nearest training points by fingerprint distance, ties broken by lower
// training index; unweighted centroid or inverse-distance weighting with a
// small guard so an exact match dominates.
inline geometry::Point knn_estimate(const TrainingDatabase& db, const Fingerprint& query,
                                    std::size_t k, bool weighted) {
    if (k < 1 || k > db.fingerprints.size())
        throw std::invalid_argument("knn_estimate: k out of range");
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(db.fingerprints.size());
    for (std::size_t i = 0; i < db.fingerprints.size(); ++i)
        order.emplace_back(fingerprint_distance(query, db.fingerprints[i]), i);
    std::sort(order.begin(), order.end());
    double sx = 0.0, sy = 0.0, sw = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const geometry::Point& p = db.grid.points[order[j].second];
        const double w = weighted ? 1.0 / std::max(order[j].first, 1e-6) : 1.0;
        sx += w * p.x;
        sy += w * p.y;
        sw += w;
    }
    return {sx / sw, sy / sw};
}

struct LocalizationResult {
    geometry::Point estimate;
    geometry::Point true_location;
    double error = 0.0;
    std::size_t k_used = 0;
};

// One runtime fix: m_runtime samples per anchor at the true target (same
// anchor-major order as the training survey), then the kNN estimate.
inline LocalizationResult localize(const TrainingDatabase& db,
                                   const std::vector<propagation::Anchor>& anchors,
                                   const propagation::RssModel& model,
                                   const geometry::Point& target, std::size_t m_runtime,
                                   std::size_t k, bool weighted, rng::Stream& stream) {
    if (m_runtime < 1) throw std::invalid_argument("localize: need at least one sample");
    std::vector<std::vector<double>> samples(anchors.size());
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        samples[a].reserve(m_runtime);
        for (std::size_t s = 0; s < m_runtime; ++s)
            samples[a].push_back(model.sample(target, anchors[a], stream));
    }
    LocalizationResult result;
    result.true_location = target;
    result.estimate = knn_estimate(db, make_fingerprint(samples), k, weighted);
    result.error = geometry::distance(result.estimate, target);
    result.k_used = k;
    return result;
}

struct ErrorStats {
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

// Box-plot summary; percentiles by linear interpolation between order
// statistics.
inline ErrorStats error_stats(std::vector<double> errors) {
    if (errors.empty()) throw std::invalid_argument("error_stats: empty input");
    std::sort(errors.begin(), errors.end());
    auto percentile = [&](double p) {
        const double pos = p * static_cast<double>(errors.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        if (lo + 1 >= errors.size()) return errors.back();
        const double frac = pos - static_cast<double>(lo);
        return errors[lo] + frac * (errors[lo + 1] - errors[lo]);
    };
    ErrorStats s;
    s.min = errors.front();
    s.q25 = percentile(0.25);
    s.median = percentile(0.5);
    s.q75 = percentile(0.75);
    s.max = errors.back();
    double sum = 0.0;
    for (double e : errors) sum += e;
    s.mean = sum / static_cast<double>(errors.size());
    return s;
}

// Noise-free signature of a point: the model mean toward every anchor. This
// is what nearest-fingerprint partitions are built from.
inline std::vector<double> noiseless_signature(const geometry::Point& p,
                                               const std::vector<propagation::Anchor>& anchors,
                                               const propagation::RssModel& model) {
    std::vector<double> sig;
    sig.reserve(anchors.size());
    for (const propagation::Anchor& a : anchors) sig.push_back(model.mean(p, a));
    return sig;
}

}  // namespace fploc::fingerprinting
