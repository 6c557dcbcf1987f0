#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fploc/geometry.hpp"
#include "fploc/propagation.hpp"
#include "fploc/rng.hpp"

namespace fploc::placement {

enum class PlacementMethod { voronoi_vertices, random_uniform };

struct PlacementPlan {
    std::vector<propagation::Anchor> existing;
    std::vector<geometry::Point> added;     // in placement order
    std::vector<double> min_distances;      // distance to prior anchors at each step
    PlacementMethod method = PlacementMethod::voronoi_vertices;
};

// Vertices of the region-clipped Voronoi diagram of the anchors (cell
// corners, region corners, boundary intersections), each paired with its
// distance to the nearest anchor, sorted farthest first; ties by (x, y).
inline std::vector<std::pair<geometry::Point, double>> voronoi_vertex_candidates(
    const std::vector<geometry::Point>& anchors, const geometry::Region& region) {
    const geometry::VoronoiDiagram vd = geometry::voronoi_diagram(anchors, region);
    std::vector<std::pair<geometry::Point, double>> candidates;
    candidates.reserve(vd.vertices.size());
    for (const geometry::Point& v : vd.vertices) {
        double best = geometry::distance(v, anchors.front());
        for (const geometry::Point& a : anchors)
            best = std::min(best, geometry::distance(v, a));
        candidates.emplace_back(v, best);
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        if (a.first.x != b.first.x) return a.first.x < b.first.x;
        return a.first.y < b.first.y;
    });
    return candidates;
}

// Adds `count` anchor locations. The Voronoi method takes the current
// diagram's farthest vertex, commits it, and recomputes before the next
// pick; the random method draws uniform points, rejecting duplicates.
inline PlacementPlan place_new_anchors(const std::vector<propagation::Anchor>& anchors,
                                       const geometry::Region& region, std::size_t count,
                                       PlacementMethod method, std::uint64_t seed = 0) {
    if (count < 1) throw std::invalid_argument("place_new_anchors: count must be >= 1");
    if (anchors.empty()) throw std::invalid_argument("place_new_anchors: no existing anchors");
    PlacementPlan plan;
    plan.existing = anchors;
    plan.method = method;
    std::vector<geometry::Point> sites;
    sites.reserve(anchors.size() + count);
    for (const propagation::Anchor& a : anchors) sites.push_back(a.location);

    if (method == PlacementMethod::voronoi_vertices) {
        for (std::size_t step = 0; step < count; ++step) {
            const auto candidates = voronoi_vertex_candidates(sites, region);
            const auto& top = candidates.front();
            plan.added.push_back(top.first);
            plan.min_distances.push_back(top.second);
            sites.push_back(top.first);
        }
        return plan;
    }

    rng::Stream stream(rng::derive_seed(seed, rng::Domain::placement));
    while (plan.added.size() < count) {
        geometry::Point p{region.origin.x + stream.uniform01() * region.width,
                          region.origin.y + stream.uniform01() * region.height};
        double best = geometry::distance(p, sites.front());
        bool dup = false;
        for (const geometry::Point& s : sites) {
            const double d = geometry::distance(p, s);
            best = std::min(best, d);
            dup = dup || d <= 1e-12;
        }
        if (dup) continue;
        plan.added.push_back(p);
        plan.min_distances.push_back(best);
        sites.push_back(p);
    }
    return plan;
}

}  // namespace fploc::placement
