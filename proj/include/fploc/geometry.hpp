#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fploc/rng.hpp"

namespace fploc::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

inline double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double distance_point_segment(const Point& p, const Point& a, const Point& b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    if (len2 == 0.0) return distance(p, a);
    double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, {a.x + t * vx, a.y + t * vy});
}

// Axis-aligned rectangular deployment region.
struct Region {
    double width = 0.0;
    double height = 0.0;
    Point origin{0.0, 0.0};

    bool contains(const Point& p, double tol = 0.0) const {
        return p.x >= origin.x - tol && p.x <= origin.x + width + tol &&
               p.y >= origin.y - tol && p.y <= origin.y + height + tol;
    }

    double area() const { return width * height; }
};

// Convex polygon, counter-clockwise vertex order.
using Polygon = std::vector<Point>;

inline double polygon_area(const Polygon& poly) {
    double twice = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * twice;
}

inline Polygon region_polygon(const Region& r) {
    return {{r.origin.x, r.origin.y},
            {r.origin.x + r.width, r.origin.y},
            {r.origin.x + r.width, r.origin.y + r.height},
            {r.origin.x, r.origin.y + r.height}};
}

// Clips `poly` against the half-plane a*x + b*y <= c (Sutherland-Hodgman).
inline Polygon clip_halfplane(const Polygon& poly, double a, double b, double c) {
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % n];
        const double fp = a * p.x + b * p.y - c;
        const double fq = a * q.x + b * q.y - c;
        if (fp <= 0.0) out.push_back(p);
        if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
            const double t = fp / (fp - fq);
            out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
        }
    }
    // Drop duplicate consecutive vertices introduced by clips through corners.
    Polygon clean;
    for (const Point& v : out) {
        if (clean.empty() || distance(clean.back(), v) > 1e-12) clean.push_back(v);
    }
    while (clean.size() > 1 && distance(clean.front(), clean.back()) <= 1e-12) clean.pop_back();
    if (clean.size() < 3) clean.clear();
    return clean;
}

enum class GridKind { square, hexagonal, random_uniform };

struct TrainingGrid {
    std::vector<Point> points;
    GridKind kind = GridKind::square;
    double spacing = 0.0;  // lattice parameter; 0 for random grids
};

namespace detail {

// Lattice coordinates along one axis: start + k*step for k = 0,1,... while
// the value stays below extent. Falls back to the axis midpoint when even
// the first value does not fit, so any region yields at least one point.
inline std::vector<double> axis_coords(double extent, double start, double step) {
    std::vector<double> xs;
    for (double v = start; v < extent; v += step) xs.push_back(v);
    if (xs.empty()) xs.push_back(extent / 2.0);
    return xs;
}

}  // namespace detail

// Square lattice with cell side `cell`, inset cell/2 from the region origin.
inline TrainingGrid generate_square_grid(const Region& region, double cell) {
    if (cell <= 0.0) throw std::invalid_argument("square grid: cell must be positive");
    TrainingGrid g;
    g.kind = GridKind::square;
    g.spacing = cell;
    const auto xs = detail::axis_coords(region.width, cell / 2.0, cell);
    const auto ys = detail::axis_coords(region.height, cell / 2.0, cell);
    for (double y : ys)
        for (double x : xs) g.points.push_back({region.origin.x + x, region.origin.y + y});
    return g;
}

// Hexagonal (triangular lattice) layout with nearest-neighbour distance `d`:
// rows spaced d*sqrt(3)/2, alternate rows shifted by d/2.
inline TrainingGrid generate_hex_grid(const Region& region, double d) {
    if (d <= 0.0) throw std::invalid_argument("hex grid: spacing must be positive");
    TrainingGrid g;
    g.kind = GridKind::hexagonal;
    g.spacing = d;
    const double row_step = d * std::sqrt(3.0) / 2.0;
    const auto ys = detail::axis_coords(region.height, d / 2.0, row_step);
    for (std::size_t j = 0; j < ys.size(); ++j) {
        const double x0 = (j % 2 == 0) ? d / 2.0 : d;
        const auto xs = detail::axis_coords(region.width, x0, d);
        for (double x : xs) g.points.push_back({region.origin.x + x, region.origin.y + ys[j]});
    }
    return g;
}

inline TrainingGrid generate_random_grid(const Region& region, std::size_t n,
                                         std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("random grid: n must be positive");
    TrainingGrid g;
    g.kind = GridKind::random_uniform;
    g.spacing = 0.0;
    rng::Stream stream(rng::derive_seed(seed, rng::Domain::grid));
    while (g.points.size() < n) {
        Point p{region.origin.x + stream.uniform01() * region.width,
                region.origin.y + stream.uniform01() * region.height};
        bool dup = false;
        for (const Point& q : g.points) dup = dup || (q == p);
        if (!dup) g.points.push_back(p);
    }
    return g;
}

struct VoronoiDiagram {
    std::vector<Point> sites;
    std::vector<Polygon> cells;    // cells[i] is the region-clipped cell of sites[i]
    std::vector<Point> vertices;   // deduplicated cell corners
};

// Builds each cell by clipping the region rectangle against the perpendicular
// bisector half-plane of every other site. Quadratic in the number of sites,
// which is fine at the deployment scales used here.
inline VoronoiDiagram voronoi_diagram(const std::vector<Point>& sites, const Region& region) {
    if (sites.empty()) throw std::invalid_argument("voronoi: need at least one site");
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (!region.contains(sites[i], 1e-9))
            throw std::invalid_argument("voronoi: site outside region");
        for (std::size_t j = i + 1; j < sites.size(); ++j) {
            if (distance(sites[i], sites[j]) <= 1e-12)
                throw std::invalid_argument("voronoi: duplicate sites");
        }
    }
    VoronoiDiagram vd;
    vd.sites = sites;
    vd.cells.reserve(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) {
        Polygon cell = region_polygon(region);
        for (std::size_t j = 0; j < sites.size() && !cell.empty(); ++j) {
            if (j == i) continue;
            // Half-plane of points at least as close to site i as to site j.
            const double a = 2.0 * (sites[j].x - sites[i].x);
            const double b = 2.0 * (sites[j].y - sites[i].y);
            const double c = sites[j].x * sites[j].x + sites[j].y * sites[j].y -
                             sites[i].x * sites[i].x - sites[i].y * sites[i].y;
            cell = clip_halfplane(cell, a, b, c);
        }
        vd.cells.push_back(std::move(cell));
    }
    std::vector<Point> verts;
    for (const Polygon& cell : vd.cells)
        for (const Point& v : cell) verts.push_back(v);
    std::sort(verts.begin(), verts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    for (const Point& v : verts) {
        bool dup = false;
        for (auto it = vd.vertices.rbegin(); it != vd.vertices.rend(); ++it) {
            if (v.x - it->x > 1e-9) break;
            if (std::abs(v.x - it->x) <= 1e-9 && std::abs(v.y - it->y) <= 1e-9) {
                dup = true;
                break;
            }
        }
        if (!dup) vd.vertices.push_back(v);
    }
    return vd;
}

// Largest distance from `site` to its cell; attained at a vertex because the
// cell is convex.
inline double covering_radius(const Polygon& cell, const Point& site) {
    if (cell.empty()) throw std::invalid_argument("covering_radius: empty cell");
    double r = 0.0;
    for (const Point& v : cell) r = std::max(r, distance(v, site));
    return r;
}

// Covering radii of the ideal infinite lattices with nearest-neighbour
// distance d: every point of the plane lies within this radius of a site.
inline double lattice_covering_radius(GridKind kind, double d) {
    switch (kind) {
        case GridKind::hexagonal: return d / std::sqrt(3.0);
        case GridKind::square: return d / std::sqrt(2.0);
        default: throw std::invalid_argument("lattice_covering_radius: no closed form");
    }
}

// Raster of training-point labels over a region. Cell (ix, iy) spans
// [ix*res, min((ix+1)*res, width)] x [...]; centers are midpoints of the
// possibly clipped spans so they always lie inside the region.
struct LabelMap {
    Region region;
    double resolution = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<int> labels;  // row-major, iy * nx + ix

    int label_at(std::size_t ix, std::size_t iy) const { return labels[iy * nx + ix]; }

    Point cell_center(std::size_t ix, std::size_t iy) const {
        const double hi_x = std::min((ix + 1) * resolution, region.width);
        const double hi_y = std::min((iy + 1) * resolution, region.height);
        return {region.origin.x + (ix * resolution + hi_x) / 2.0,
                region.origin.y + (iy * resolution + hi_y) / 2.0};
    }
};

namespace detail {

inline std::size_t raster_cells(double extent, double res) {
    const double q = extent / res;
    const double r = std::round(q);
    if (std::abs(q - r) < 1e-9) return static_cast<std::size_t>(std::max(1.0, r));
    return static_cast<std::size_t>(std::floor(q)) + 1;
}

}  // namespace detail

// Partition induced by nearest-fingerprint matching: each raster cell is
// labelled with the training point whose signature is closest to the
// signature at the cell center. Ties go to the lowest training index.
//
// `signature_fn(Point) -> std::vector<double>` and
// `metric(vector, vector) -> double` define the matching rule.
template <typename SignatureFn, typename Metric>
LabelMap modified_voronoi(const TrainingGrid& grid, const Region& region,
                          SignatureFn&& signature_fn, Metric&& metric, double resolution) {
    if (grid.points.empty()) throw std::invalid_argument("modified_voronoi: empty grid");
    if (resolution <= 0.0) throw std::invalid_argument("modified_voronoi: bad resolution");
    LabelMap map;
    map.region = region;
    map.resolution = resolution;
    map.nx = detail::raster_cells(region.width, resolution);
    map.ny = detail::raster_cells(region.height, resolution);
    map.labels.assign(map.nx * map.ny, 0);

    std::vector<std::vector<double>> reference(grid.points.size());
    for (std::size_t t = 0; t < grid.points.size(); ++t)
        reference[t] = signature_fn(grid.points[t]);

    for (std::size_t iy = 0; iy < map.ny; ++iy) {
        for (std::size_t ix = 0; ix < map.nx; ++ix) {
            const std::vector<double> sig = signature_fn(map.cell_center(ix, iy));
            int best = 0;
            double best_d = metric(sig, reference[0]);
            for (std::size_t t = 1; t < grid.points.size(); ++t) {
                const double d = metric(sig, reference[t]);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(t);
                }
            }
            map.labels[iy * map.nx + ix] = best;
        }
    }
    return map;
}

// Plain geometric nearest-neighbour partition on the same raster.
inline LabelMap nearest_point_labels(const TrainingGrid& grid, const Region& region,
                                     double resolution) {
    return modified_voronoi(
        grid, region, [](const Point& p) { return std::vector<double>{p.x, p.y}; },
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return std::hypot(a[0] - b[0], a[1] - b[1]);
        },
        resolution);
}

// Distance from each raster-cell center to its labelled training point,
// reduced per label. Entries for labels that own no raster cell stay 0.
inline std::vector<double> per_label_covering_radii(const TrainingGrid& grid,
                                                    const LabelMap& map) {
    std::vector<double> radii(grid.points.size(), 0.0);
    for (std::size_t iy = 0; iy < map.ny; ++iy) {
        for (std::size_t ix = 0; ix < map.nx; ++ix) {
            const int label = map.label_at(ix, iy);
            if (label < 0 || static_cast<std::size_t>(label) >= grid.points.size())
                throw std::logic_error("label map references unknown training point");
            const double d = distance(map.cell_center(ix, iy), grid.points[label]);
            radii[label] = std::max(radii[label], d);
        }
    }
    return radii;
}

// Worst-case matching distance over the whole region (raster approximation).
inline double max_covering_radius(const TrainingGrid& grid, const LabelMap& map) {
    const auto radii = per_label_covering_radii(grid, map);
    return *std::max_element(radii.begin(), radii.end());
}

}  // namespace fploc::geometry
