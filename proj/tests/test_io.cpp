#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fploc/fingerprinting.hpp"
#include "fploc/io.hpp"

using namespace fploc;

namespace {

// Scratch directory for files the reader functions need on disk.
struct TempDir {
    std::filesystem::path dir;

    TempDir() {
        dir = std::filesystem::temp_directory_path() /
              ("fploc_io_" + std::to_string(::getpid()));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }

    std::string file(const std::string& name, const std::string& content) const {
        const auto p = dir / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

}  // namespace

TEST_CASE("float formatting round-trips doubles", "[io]") {
    for (double v : {0.1 + 0.2, 3.141592653589793, 1e-300, -7.25, 0.0,
                     1.0 / 3.0, 123456789.123456789}) {
        CHECK(std::stod(io::fmt(v)) == v);
    }
    CHECK(io::fmt(1.0) == "1");
    CHECK(io::fmt(0.5, 12) == "0.5");
}

TEST_CASE("line splitting and trimming", "[io]") {
    CHECK(io::trim("  a b \t") == "a b");
    CHECK(io::trim(" \t ") == "");
    CHECK(io::split(" a , b ,, c ") == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(io::split("x") == std::vector<std::string>{"x"});
}

TEST_CASE("numeric parsing reports the source line", "[io]") {
    CHECK(io::parse_double("2.5e-1", "f", 1) == 0.25);
    CHECK(io::parse_int("-42", "f", 1) == -42);
    try {
        io::parse_double("12x", "data.csv", 7);
        FAIL("expected ParseError");
    } catch (const io::ParseError& e) {
        CHECK(e.line() == 7);
        CHECK(std::string(e.what()).find("data.csv:7") != std::string::npos);
    }
    CHECK_THROWS_AS(io::parse_int("3.5", "f", 2), io::ParseError);
}

TEST_CASE("comment and blank lines are skipped with numbering kept", "[io]") {
    const TempDir tmp;
    const auto path = tmp.file("lines.txt", "first\n\n# comment\n  second  \n");
    const auto lines = io::read_lines(path);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == std::pair<std::size_t, std::string>{1, "first"});
    CHECK(lines[1] == std::pair<std::size_t, std::string>{4, "second"});
    CHECK_THROWS_AS(io::read_lines((tmp.dir / "missing.txt").string()), io::ParseError);
}

TEST_CASE("anchor files", "[io]") {
    const TempDir tmp;
    const auto good = tmp.file("anchors.csv",
                               "id,x,y,txpower\nap0,3,2.75,20\nap1,27,15.25,18.5\n");
    const auto anchors = io::read_anchors(good);
    REQUIRE(anchors.size() == 2);
    CHECK(anchors[0].location == geometry::Point{3.0, 2.75});
    CHECK(anchors[1].tx_power == 18.5);

    const auto bad = tmp.file("bad.csv", "id,x,y,txpower\nap0,3,2.75\n");
    try {
        io::read_anchors(bad);
        FAIL("expected ParseError");
    } catch (const io::ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(io::read_anchors(tmp.file("empty.csv", "id,x,y,txpower\n")),
                    io::ParseError);

    std::ostringstream os;
    io::write_anchors(os, anchors);
    CHECK(os.str() == "id,x,y,txpower\n0,3,2.75,20\n1,27,15.25,18.5\n");
}

TEST_CASE("floor plan files carry optional per-wall attenuation", "[io]") {
    const TempDir tmp;
    const auto path = tmp.file("walls.csv",
                               "x1,y1,x2,y2,att_db\n0,6,30,6\n5,0,5,6,10\n");
    const auto plan = io::read_floorplan(path);
    REQUIRE(plan.walls.size() == 2);
    CHECK_FALSE(plan.walls[0].attenuation_db.has_value());
    REQUIRE(plan.walls[1].attenuation_db.has_value());
    CHECK(*plan.walls[1].attenuation_db == 10.0);
    CHECK(plan.walls[1].a == geometry::Point{5.0, 0.0});

    CHECK_THROWS_AS(io::read_floorplan(tmp.file("bad.csv", "1,2,3\n")), io::ParseError);

    std::ostringstream os;
    io::write_floorplan(os, plan);
    CHECK(os.str() == "x1,y1,x2,y2,att_db\n0,6,30,6\n5,0,5,6,10\n");
}

TEST_CASE("database files preserve ap order and mark unheard anchors", "[io]") {
    const TempDir tmp;
    // ap order is first appearance: wifi-b before wifi-a. Point 1 never
    // heard wifi-b, so that slot reads back as the floor with count 0.
    const auto path = tmp.file("db.csv",
                               "point_index,x,y,ap_id,mean_rss,count\n"
                               "0,1.5,2.5,wifi-b,-40.25,3\n"
                               "0,1.5,2.5,wifi-a,-52.5,3\n"
                               "1,4.5,2.5,wifi-a,-48,3\n");
    const auto file = io::read_database(path);
    CHECK(file.ap_ids == std::vector<std::string>{"wifi-b", "wifi-a"});
    REQUIRE(file.db.fingerprints.size() == 2);
    CHECK(file.db.grid.points[1] == geometry::Point{4.5, 2.5});
    CHECK(file.db.fingerprints[0].mean_rss == std::vector<double>{-40.25, -52.5});
    CHECK(file.db.fingerprints[1].mean_rss ==
          std::vector<double>{fingerprinting::kMissingAnchorFloor, -48.0});
    CHECK(file.db.fingerprints[1].counts == std::vector<int>{0, 3});

    CHECK_THROWS_AS(
        io::read_database(tmp.file("short.csv", "0,1,2,ap,-40\n")), io::ParseError);
    CHECK_THROWS_AS(
        io::read_database(tmp.file("empty.csv", "point_index,x,y,ap_id,mean_rss,count\n")),
        io::ParseError);

    // Exported databases read back with identical fingerprints.
    std::ostringstream os;
    io::write_database(os, file.db, file.ap_ids);
    const auto again = io::read_database(tmp.file("db2.csv", os.str()));
    CHECK(again.ap_ids == file.ap_ids);
    for (std::size_t i = 0; i < file.db.fingerprints.size(); ++i) {
        CHECK(again.db.fingerprints[i].mean_rss == file.db.fingerprints[i].mean_rss);
        CHECK(again.db.fingerprints[i].counts == file.db.fingerprints[i].counts);
    }
}

TEST_CASE("trace files enforce the exact header and field rules", "[io]") {
    const TempDir tmp;
    const std::string header = "loc_id,x,y,ap_id,rss_dbm,sample_idx\n";
    const auto good = tmp.file("trace.csv", header +
                                                "p0,1.5,2.5,ap0,-40.5,0\n"
                                                "p0,1.5,2.5,ap0,-41.5,1\n");
    const auto records = io::read_trace(good);
    REQUIRE(records.size() == 2);
    CHECK(records[0].loc_id == "p0");
    CHECK(records[0].rss == -40.5);
    CHECK(records[1].sample_idx == 1);
    CHECK(records[1].line == 3);

    CHECK_THROWS_AS(io::read_trace(tmp.file("h.csv", "loc,x,y,ap,rss,idx\np,1,2,a,-4,0\n")),
                    io::ParseError);
    CHECK_THROWS_AS(io::read_trace(tmp.file("w.csv", header + "p0,1,2,ap0,-40\n")),
                    io::ParseError);
    CHECK_THROWS_AS(io::read_trace(tmp.file("n.csv", header + "p0,1,2,ap0,nan,0\n")),
                    io::ParseError);
    CHECK_THROWS_AS(io::read_trace(tmp.file("e.csv", header + ",1,2,ap0,-40,0\n")),
                    io::ParseError);
    CHECK_THROWS_AS(io::read_trace(tmp.file("only.csv", header)), io::ParseError);

    std::ostringstream os;
    io::write_trace(os, records);
    const auto back = io::read_trace(tmp.file("rt.csv", os.str()));
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].loc_id == records[i].loc_id);
        CHECK(back[i].x == records[i].x);
        CHECK(back[i].rss == records[i].rss);
        CHECK(back[i].sample_idx == records[i].sample_idx);
    }
}

TEST_CASE("grid and label map writers", "[io]") {
    geometry::TrainingGrid grid;
    grid.points = {{1.5, 2.25}, {4.5, 2.25}};
    std::ostringstream os;
    io::write_grid(os, grid);
    CHECK(os.str() == "index,x,y\n0,1.5,2.25\n1,4.5,2.25\n");

    geometry::LabelMap map;
    map.region = {2.0, 1.0, {0.0, 0.0}};
    map.resolution = 1.0;
    map.nx = 2;
    map.ny = 1;
    map.labels = {0, 1};
    std::ostringstream os2;
    io::write_label_map(os2, map);
    CHECK(os2.str() == "ix,iy,label\n0,0,0\n1,0,1\n");
}
