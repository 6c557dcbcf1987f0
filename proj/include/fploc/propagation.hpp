#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fploc/geometry.hpp"
#include "fploc/rng.hpp"

namespace fploc::propagation {

// Transmitter-to-receiver distances are clamped below to avoid the power-law
// singularity at zero range: 0.01 m for the linear-power models, 0.1 m for
// the dB-domain model (whose reference distance is 1 m).
inline constexpr double kMinDistance = 0.01;
inline constexpr double kMinDistanceDb = 0.1;

inline double path_distance(const geometry::Point& u, const geometry::Point& w) {
    return std::max(geometry::distance(u, w), kMinDistance);
}

inline double path_distance_db(const geometry::Point& u, const geometry::Point& w) {
    return std::max(geometry::distance(u, w), kMinDistanceDb);
}

struct Anchor {
    geometry::Point location;
    double tx_power = 1.0;  // milliwatts for the analytic models, dBm for COST-231
};

enum class AnalyticModel { noisy, fading };

// Parameters of the analytic power-law channels. Received power is linear
// (milliwatts): tx_power / d^alpha plus an ambient floor, observed either
// through additive Gaussian noise or through multiplicative Rayleigh fading
// (exponentially distributed power gain with unit mean).
struct AnalyticChannelParams {
    double alpha = 2.0;        // path-loss exponent
    double noise_floor = 0.0;  // ambient power offset, milliwatts
    double noise_var = 1.0;    // Gaussian measurement-noise variance (noisy model)
    AnalyticModel model = AnalyticModel::noisy;

    void validate() const {
        if (!(alpha > 0.0)) throw std::invalid_argument("channel: alpha must be positive");
        if (noise_floor < 0.0) throw std::invalid_argument("channel: negative noise floor");
        if (model == AnalyticModel::noisy && !(noise_var > 0.0))
            throw std::invalid_argument("channel: noise variance must be positive");
    }
};

// Noise-free received power at u from one anchor, milliwatts.
inline double mean_rss_linear(const geometry::Point& u, const Anchor& anchor,
                              const AnalyticChannelParams& params) {
    const double d = path_distance(u, anchor.location);
    return anchor.tx_power / std::pow(d, params.alpha) + params.noise_floor;
}

inline double sample_rss_noisy(const geometry::Point& u, const Anchor& anchor,
                               const AnalyticChannelParams& params, rng::Stream& stream) {
    return mean_rss_linear(u, anchor, params) + std::sqrt(params.noise_var) * stream.normal();
}

inline double sample_rss_fading(const geometry::Point& u, const Anchor& anchor,
                                const AnalyticChannelParams& params, rng::Stream& stream) {
    const double d = path_distance(u, anchor.location);
    const double gain = stream.exponential();  // unit-mean power gain
    return gain * anchor.tx_power / std::pow(d, params.alpha) + params.noise_floor;
}

struct Wall {
    geometry::Point a;
    geometry::Point b;
    std::optional<double> attenuation_db;  // falls back to Cost231Params::wall_loss
};

struct FloorPlan {
    std::vector<Wall> walls;
};

namespace detail {

inline double orient(const geometry::Point& a, const geometry::Point& b,
                     const geometry::Point& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool on_segment(const geometry::Point& a, const geometry::Point& b,
                       const geometry::Point& c) {
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= c.y && c.y <= std::max(a.y, b.y);
}

// Closed-segment intersection test; touching endpoints and collinear overlap
// both count as an intersection.
inline bool segments_intersect(const geometry::Point& p1, const geometry::Point& p2,
                               const geometry::Point& q1, const geometry::Point& q2) {
    const double d1 = orient(q1, q2, p1);
    const double d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1);
    const double d4 = orient(p1, p2, q2);
    if (((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) &&
        ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)))
        return true;
    if (d1 == 0.0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0.0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0.0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0.0 && on_segment(p1, p2, q2)) return true;
    return false;
}

}  // namespace detail

// Number of plan walls the straight path from u to w crosses or touches.
// Each wall contributes at most once.
inline int count_wall_intersections(const geometry::Point& u, const geometry::Point& w,
                                    const FloorPlan& plan) {
    int n = 0;
    for (const Wall& wall : plan.walls)
        if (detail::segments_intersect(u, w, wall.a, wall.b)) ++n;
    return n;
}

// COST-231 multi-wall model, dB domain. Path loss at the 1 m reference is
// `lc`; each crossed wall adds its own attenuation or `wall_loss`.
struct Cost231Params {
    double lc = 53.73;        // dB, constant loss at 1 m
    double gamma = 1.64;      // distance-power decay index
    double wall_loss = 4.51;  // dB per wall, default
    double sigma = 2.0;       // log-normal shadowing std dev, dB

    void validate() const {
        if (sigma < 0.0) throw std::invalid_argument("cost231: negative sigma");
        if (!(gamma > 0.0)) throw std::invalid_argument("cost231: gamma must be positive");
        if (wall_loss < 0.0) throw std::invalid_argument("cost231: negative wall loss");
    }
};

inline double cost231_path_loss(const geometry::Point& u, const Anchor& anchor,
                                const Cost231Params& params, const FloorPlan& plan) {
    const double d = path_distance_db(u, anchor.location);
    double wall_db = 0.0;
    for (const Wall& wall : plan.walls) {
        if (detail::segments_intersect(u, anchor.location, wall.a, wall.b))
            wall_db += wall.attenuation_db.value_or(params.wall_loss);
    }
    return params.lc + 10.0 * params.gamma * std::log10(d) + wall_db;
}

// Received signal strength in dBm, without shadowing.
inline double cost231_mean_rss(const geometry::Point& u, const Anchor& anchor,
                               const Cost231Params& params, const FloorPlan& plan) {
    return anchor.tx_power - cost231_path_loss(u, anchor, params, plan);
}

inline double cost231_sample_rss(const geometry::Point& u, const Anchor& anchor,
                                 const Cost231Params& params, const FloorPlan& plan,
                                 rng::Stream& stream) {
    double rss = cost231_mean_rss(u, anchor, params, plan);
    if (params.sigma > 0.0) rss += params.sigma * stream.normal();
    return rss;
}

// Uniform facade over the channel models so databases and trials can be
// generated without knowing which family is in use. `mean` is noise-free.
struct RssModel {
    std::string name;
    std::function<double(const geometry::Point&, const Anchor&)> mean;
    std::function<double(const geometry::Point&, const Anchor&, rng::Stream&)> sample;
};

inline RssModel make_noisy_model(AnalyticChannelParams params) {
    params.model = AnalyticModel::noisy;
    params.validate();
    RssModel m;
    m.name = "noisy";
    m.mean = [params](const geometry::Point& u, const Anchor& a) {
        return mean_rss_linear(u, a, params);
    };
    m.sample = [params](const geometry::Point& u, const Anchor& a, rng::Stream& s) {
        return sample_rss_noisy(u, a, params, s);
    };
    return m;
}

inline RssModel make_fading_model(AnalyticChannelParams params) {
    params.model = AnalyticModel::fading;
    params.validate();
    RssModel m;
    m.name = "fading";
    m.mean = [params](const geometry::Point& u, const Anchor& a) {
        return mean_rss_linear(u, a, params);
    };
    m.sample = [params](const geometry::Point& u, const Anchor& a, rng::Stream& s) {
        return sample_rss_fading(u, a, params, s);
    };
    return m;
}

inline RssModel make_cost231_model(Cost231Params params, FloorPlan plan) {
    params.validate();
    RssModel m;
    m.name = "cost231";
    m.mean = [params, plan](const geometry::Point& u, const Anchor& a) {
        return cost231_mean_rss(u, a, params, plan);
    };
    m.sample = [params, plan](const geometry::Point& u, const Anchor& a, rng::Stream& s) {
        return cost231_sample_rss(u, a, params, plan, s);
    };
    return m;
}

}  // namespace fploc::propagation
