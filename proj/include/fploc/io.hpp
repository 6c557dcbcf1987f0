#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fploc/fingerprinting.hpp"
#include "fploc/geometry.hpp"
#include "fploc/propagation.hpp"

namespace fploc::io {

// Malformed input data (CSV rows, trace files). Carries the source line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Fixed-format float text. 17 significant digits round-trip doubles exactly;
// 12 is used for derived statistics.
inline std::string fmt(double v, int digits = 17) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_double(const std::string& s, const std::string& source, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(source, line, "not a number: '" + s + "'");
    }
}

inline long long parse_int(const std::string& s, const std::string& source, std::size_t line) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(source, line, "not an integer: '" + s + "'");
    }
}

// Reads non-empty lines (with their 1-based numbers); '#' lines are skipped.
inline std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        lines.emplace_back(no, t);
    }
    return lines;
}

// ---- grids: index,x,y ----

inline void write_grid(std::ostream& os, const geometry::TrainingGrid& grid) {
    os << "index,x,y\n";
    for (std::size_t i = 0; i < grid.points.size(); ++i)
        os << i << ',' << fmt(grid.points[i].x) << ',' << fmt(grid.points[i].y) << '\n';
}

// ---- label maps: ix,iy,label ----

inline void write_label_map(std::ostream& os, const geometry::LabelMap& map) {
    os << "ix,iy,label\n";
    for (std::size_t iy = 0; iy < map.ny; ++iy)
        for (std::size_t ix = 0; ix < map.nx; ++ix)
            os << ix << ',' << iy << ',' << map.label_at(ix, iy) << '\n';
}

// ---- anchors: id,x,y,txpower ----

inline std::vector<propagation::Anchor> read_anchors(const std::string& path) {
    std::vector<propagation::Anchor> anchors;
    for (const auto& [no, line] : read_lines(path)) {
        const auto fields = split(line);
        if (fields.size() == 4 && fields[0] == "id") continue;  // header
        if (fields.size() != 4) throw ParseError(path, no, "expected id,x,y,txpower");
        propagation::Anchor a;
        a.location.x = parse_double(fields[1], path, no);
        a.location.y = parse_double(fields[2], path, no);
        a.tx_power = parse_double(fields[3], path, no);
        anchors.push_back(a);
    }
    if (anchors.empty()) throw ParseError(path, 0, "no anchors in file");
    return anchors;
}

inline void write_anchors(std::ostream& os, const std::vector<propagation::Anchor>& anchors) {
    os << "id,x,y,txpower\n";
    for (std::size_t i = 0; i < anchors.size(); ++i)
        os << i << ',' << fmt(anchors[i].location.x) << ',' << fmt(anchors[i].location.y)
           << ',' << fmt(anchors[i].tx_power) << '\n';
}

// ---- floor plans: x1,y1,x2,y2[,att_db] ----

inline propagation::FloorPlan read_floorplan(const std::string& path) {
    propagation::FloorPlan plan;
    for (const auto& [no, line] : read_lines(path)) {
        const auto fields = split(line);
        if (!fields.empty() && fields[0] == "x1") continue;  // header
        if (fields.size() != 4 && fields.size() != 5)
            throw ParseError(path, no, "expected x1,y1,x2,y2[,att_db]");
        propagation::Wall w;
        w.a.x = parse_double(fields[0], path, no);
        w.a.y = parse_double(fields[1], path, no);
        w.b.x = parse_double(fields[2], path, no);
        w.b.y = parse_double(fields[3], path, no);
        if (fields.size() == 5) w.attenuation_db = parse_double(fields[4], path, no);
        plan.walls.push_back(w);
    }
    return plan;
}

inline void write_floorplan(std::ostream& os, const propagation::FloorPlan& plan) {
    os << "x1,y1,x2,y2,att_db\n";
    for (const propagation::Wall& w : plan.walls) {
        os << fmt(w.a.x) << ',' << fmt(w.a.y) << ',' << fmt(w.b.x) << ',' << fmt(w.b.y);
        if (w.attenuation_db) os << ',' << fmt(*w.attenuation_db);
        os << '\n';
    }
}

// ---- fingerprint databases: point_index,x,y,ap_id,mean_rss,count ----

inline void write_database(std::ostream& os, const fingerprinting::TrainingDatabase& db,
                           const std::vector<std::string>& ap_ids = {}) {
    os << "point_index,x,y,ap_id,mean_rss,count\n";
    for (std::size_t i = 0; i < db.fingerprints.size(); ++i) {
        const auto& fp = db.fingerprints[i];
        for (std::size_t a = 0; a < fp.anchor_count(); ++a) {
            const std::string id = a < ap_ids.size() ? ap_ids[a] : std::to_string(a);
            os << i << ',' << fmt(db.grid.points[i].x) << ',' << fmt(db.grid.points[i].y)
               << ',' << id << ',' << fmt(fp.mean_rss[a]) << ',' << fp.counts[a] << '\n';
        }
    }
}

struct DatabaseFile {
    fingerprinting::TrainingDatabase db;
    std::vector<std::string> ap_ids;  // column order of the fingerprints
};

// Rebuilds a database from its CSV export. Anchor columns follow the file's
// first-appearance order of ap ids; point order follows point_index.
inline DatabaseFile read_database(const std::string& path) {
    struct Row {
        std::size_t point;
        geometry::Point p;
        std::string ap;
        double mean;
        int count;
    };
    std::vector<Row> rows;
    std::vector<std::string> ap_ids;
    std::size_t max_point = 0;
    for (const auto& [no, line] : read_lines(path)) {
        const auto fields = split(line);
        if (!fields.empty() && fields[0] == "point_index") continue;
        if (fields.size() != 6)
            throw ParseError(path, no, "expected point_index,x,y,ap_id,mean_rss,count");
        Row r;
        r.point = static_cast<std::size_t>(parse_int(fields[0], path, no));
        r.p.x = parse_double(fields[1], path, no);
        r.p.y = parse_double(fields[2], path, no);
        r.ap = fields[3];
        r.mean = parse_double(fields[4], path, no);
        r.count = static_cast<int>(parse_int(fields[5], path, no));
        max_point = std::max(max_point, r.point);
        bool known = false;
        for (const auto& id : ap_ids) known = known || id == r.ap;
        if (!known) ap_ids.push_back(r.ap);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ParseError(path, 0, "empty database file");

    DatabaseFile out;
    out.ap_ids = ap_ids;
    out.db.grid.kind = geometry::GridKind::random_uniform;
    out.db.grid.points.assign(max_point + 1, {});
    out.db.meta.model_name = "imported";
    fingerprinting::Fingerprint blank;
    blank.mean_rss.assign(ap_ids.size(), fingerprinting::kMissingAnchorFloor);
    blank.counts.assign(ap_ids.size(), 0);
    out.db.fingerprints.assign(max_point + 1, blank);
    for (const Row& r : rows) {
        out.db.grid.points[r.point] = r.p;
        std::size_t col = 0;
        while (ap_ids[col] != r.ap) ++col;
        out.db.fingerprints[r.point].mean_rss[col] = r.mean;
        out.db.fingerprints[r.point].counts[col] = r.count;
    }
    return out;
}

// ---- measurement traces: loc_id,x,y,ap_id,rss_dbm,sample_idx ----

struct TraceRecord {
    std::string loc_id;
    double x = 0.0;
    double y = 0.0;
    std::string ap_id;
    double rss = 0.0;
    long long sample_idx = 0;
    std::size_t line = 0;  // source line, for diagnostics
};

inline std::vector<TraceRecord> read_trace(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw ParseError(path, 0, "empty trace file");
    std::vector<TraceRecord> records;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto& [no, line] = lines[i];
        const auto fields = split(line);
        if (i == 0) {
            if (line != "loc_id,x,y,ap_id,rss_dbm,sample_idx")
                throw ParseError(path, no,
                                 "expected header loc_id,x,y,ap_id,rss_dbm,sample_idx");
            continue;
        }
        if (fields.size() != 6)
            throw ParseError(path, no, "expected 6 fields, got " +
                                           std::to_string(fields.size()));
        TraceRecord r;
        r.line = no;
        r.loc_id = fields[0];
        r.x = parse_double(fields[1], path, no);
        r.y = parse_double(fields[2], path, no);
        r.ap_id = fields[3];
        r.rss = parse_double(fields[4], path, no);
        r.sample_idx = parse_int(fields[5], path, no);
        if (!std::isfinite(r.rss)) throw ParseError(path, no, "rss must be finite");
        if (r.loc_id.empty() || r.ap_id.empty())
            throw ParseError(path, no, "loc_id and ap_id must be non-empty");
        records.push_back(std::move(r));
    }
    if (records.empty()) throw ParseError(path, 0, "trace has no data rows");
    return records;
}

inline void write_trace(std::ostream& os, const std::vector<TraceRecord>& records) {
    os << "loc_id,x,y,ap_id,rss_dbm,sample_idx\n";
    for (const TraceRecord& r : records)
        os << r.loc_id << ',' << fmt(r.x) << ',' << fmt(r.y) << ',' << r.ap_id << ','
           << fmt(r.rss) << ',' << r.sample_idx << '\n';
}

}  // namespace fploc::io
