#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "checks.hpp"
#include "oracles.hpp"
#include "posc/error.hpp"
#include "posc/io.hpp"

using namespace posc;
using checks::error_of;
using checks::mentions;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("posc_io_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void put(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("x,value CSV") {
  TempDir dir;
  std::mt19937_64 rng(51);
  SUBCASE("round trip is exact, holes included") {
    const Lattice lat = Lattice::line(0.01, 300, -1.495);
    const Region support = Region::index_range(lat, 0, 299) - Region::index_range(lat, 100, 120);
    const ScalarField u = oracle::random_field(support, rng, -1e3, 1e3);
    io::write_field_csv(dir.file("u.csv"), u);
    const ScalarField back = io::read_field_csv(dir.file("u.csv"));
    CHECK(back.lattice().h() == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(back.lattice().extent(0) == 300);
    CHECK(back.lattice().center(0, 0) == doctest::Approx(-1.495));
    CHECK(back.support().count() == support.count());
    for (std::size_t i : support.indices()) CHECK(back.at(i) == u.at(i));
    const ScalarField given = io::read_field_csv(dir.file("u.csv"), 0.01);
    CHECK(given.lattice().h() == 0.01);
  }
  SUBCASE("malformed input") {
    put(dir.file("bad.csv"), "x,value\n0,1\n0.1,zz\n");
    CHECK(mentions(error_of([&] { io::read_field_csv(dir.file("bad.csv")); }), ":3: malformed number"));
    put(dir.file("uneven.csv"), "0,1\n0.1,1\n0.25,1\n");
    CHECK(mentions(error_of([&] { io::read_field_csv(dir.file("uneven.csv")); }), "uniform grid"));
    put(dir.file("one.csv"), "0,1\n");
    CHECK(mentions(error_of([&] { io::read_field_csv(dir.file("one.csv")); }), "pass --h"));
    CHECK(io::read_field_csv(dir.file("one.csv"), 0.5).support().count() == 1);
    put(dir.file("cols.csv"), "0,1,2\n");
    CHECK(mentions(error_of([&] { io::read_field_csv(dir.file("cols.csv")); }), "expected 'x,value'"));
    put(dir.file("empty.csv"), "x,value\n");
    CHECK(mentions(error_of([&] { io::read_field_csv(dir.file("empty.csv")); }), "no data rows"));
    CHECK(mentions(error_of([&] { io::read_field_csv(dir.file("missing.csv")); }), "cannot open input file"));
    CHECK_THROWS_AS(io::read_field_csv(dir.file("missing.csv")), ValidationError);
  }
  SUBCASE("unwritable output is a runtime error") {
    const ScalarField u = ScalarField::constant(Region::full(Lattice::line(1.0, 3)), 1.0);
    CHECK_THROWS_AS(io::write_field_csv(dir.file("no/such/dir/u.csv"), u), RuntimeError);
  }
}

TEST_CASE("grid CSV") {
  TempDir dir;
  std::mt19937_64 rng(52);
  const Lattice lat = Lattice::plane(0.5, 7, 5, {1.0, -2.0});
  const Region support = oracle::random_region(lat, 0.7, rng);
  const ScalarField u = oracle::random_field(support, rng);
  io::write_grid_csv(dir.file("g.csv"), u);
  const ScalarField back = io::read_grid_csv(dir.file("g.csv"), 0.5, {1.0, -2.0});
  CHECK(back.lattice() == lat);
  CHECK(back.support() == support);
  for (std::size_t i : support.indices()) CHECK(back.at(i) == u.at(i));

  put(dir.file("blank.csv"), "1,,2\nnan,3,NaN\n");
  const ScalarField b = io::read_grid_csv(dir.file("blank.csv"), 1.0);
  CHECK(b.support().count() == 3);
  CHECK(b.at(Cell{1, 1}) == 3.0);
  put(dir.file("ragged.csv"), "1,2\n3\n");
  CHECK(mentions(error_of([&] { io::read_grid_csv(dir.file("ragged.csv"), 1.0); }), "ragged"));
  put(dir.file("none.csv"), "# nothing\n");
  CHECK(mentions(error_of([&] { io::read_grid_csv(dir.file("none.csv"), 1.0); }), "empty grid"));
}

TEST_CASE("run-length regions") {
  TempDir dir;
  std::mt19937_64 rng(53);
  const Lattice lat = Lattice::line(0.1, 50);
  for (int t = 0; t < 5; ++t) {
    const Region r = oracle::random_region(lat, 0.2 * t + 0.1, rng);
    io::write_region_runs(dir.file("r.csv"), r);
    CHECK(io::read_region_runs(dir.file("r.csv"), lat) == r);
  }
  put(dir.file("h.csv"), "start,end\n2,4\n# note\n10,10\n");
  CHECK(io::read_region_runs(dir.file("h.csv"), lat) ==
        (Region::index_range(lat, 2, 4) | Region::index_range(lat, 10, 10)));
  put(dir.file("bad.csv"), "4,2\n");
  CHECK(mentions(error_of([&] { io::read_region_runs(dir.file("bad.csv"), lat); }), "integer start <= end"));
  put(dir.file("frac.csv"), "1.5,2\n");
  CHECK_THROWS_AS(io::read_region_runs(dir.file("frac.csv"), lat), ValidationError);
  CHECK_THROWS_AS(io::read_region_runs(dir.file("h.csv"), Lattice::plane(1.0, 3, 3)), ValidationError);
}

TEST_CASE("PGM images") {
  TempDir dir;
  const io::PgmImage img{3, 2, 10, {0, 1, 2, 3, 4, 10}};
  io::write_pgm(dir.file("a.pgm"), img);
  const io::PgmImage back = io::read_pgm(dir.file("a.pgm"));
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.maxval == 10);
  CHECK(back.pixels == img.pixels);

  put(dir.file("c.pgm"), "P2 # comment\n2 1\n# more\n255\n7 8\n");
  CHECK(io::read_pgm(dir.file("c.pgm")).pixels == std::vector<int>{7, 8});
  put(dir.file("p5.pgm"), "P5\n1 1\n255\n0\n");
  CHECK(mentions(error_of([&] { io::read_pgm(dir.file("p5.pgm")); }), "not an ASCII PGM"));
  put(dir.file("short.pgm"), "P2\n2 2\n255\n1 2 3\n");
  CHECK(mentions(error_of([&] { io::read_pgm(dir.file("short.pgm")); }), "pixel count"));
  put(dir.file("hot.pgm"), "P2\n1 1\n9\n10\n");
  CHECK(mentions(error_of([&] { io::read_pgm(dir.file("hot.pgm")); }), "out of range"));
  put(dir.file("dims.pgm"), "P2\n0 1\n9\n");
  CHECK_THROWS_AS(io::read_pgm(dir.file("dims.pgm")), ValidationError);
}

TEST_CASE("PGM masks") {
  const Lattice lat = Lattice::plane(1.0, 3, 2);
  const io::PgmImage img{3, 2, 255, {0, 127, 128, 255, 0, 200}};
  const Region r = io::region_from_pgm(img, lat);
  CHECK(r.indices() == std::vector<std::size_t>{2, 3, 5});
  CHECK(io::region_from_pgm(io::region_to_pgm(r), lat) == r);
  CHECK_THROWS_AS(io::region_from_pgm(img, Lattice::plane(1.0, 2, 3)), ValidationError);
}

TEST_CASE("PGM fields with a scaling sidecar") {
  TempDir dir;
  std::mt19937_64 rng(54);
  const Lattice lat = Lattice::plane(0.25, 9, 6, {-1.0, 0.5});
  SUBCASE("quantized values round-trip bit for bit") {
    const io::PgmScaling sc{-3.0, 0.01, 1000};
    std::uniform_int_distribution<int> pix(0, 1000);
    std::vector<double> v(lat.size());
    for (double& x : v) x = sc.offset + sc.scale * pix(rng);
    const ScalarField u(Region::full(lat), v);
    io::write_pgm_field(dir.file("f.pgm"), u, sc);
    const auto side = io::read_sidecar(dir.file("f.pgm"));
    REQUIRE(side.has_value());
    CHECK(side->offset == -3.0);
    CHECK(side->scale == 0.01);
    CHECK(side->maxval == 1000);
    const ScalarField back = io::read_pgm_field(dir.file("f.pgm"), 0.25, {-1.0, 0.5});
    CHECK(back == u);
  }
  SUBCASE("fitted scaling keeps the error under half a step") {
    const ScalarField u = oracle::random_field(Region::full(lat), rng, 2.0, 5.0);
    const io::PgmScaling sc = io::fit_scaling(u);
    CHECK(sc.offset == u.min_value());
    io::write_pgm_field(dir.file("g.pgm"), u, sc);
    const ScalarField back = io::read_pgm_field(dir.file("g.pgm"), 0.25, {-1.0, 0.5});
    for (std::size_t i = 0; i < lat.size(); ++i) CHECK(std::abs(back.at(i) - u.at(i)) <= 0.5 * sc.scale * (1 + 1e-9));
    const ScalarField flat = ScalarField::constant(Region::full(lat), 7.0);
    CHECK(io::fit_scaling(flat).scale == 1.0);
  }
  SUBCASE("identity scaling without a sidecar") {
    io::write_pgm(dir.file("raw.pgm"), io::PgmImage{2, 1, 255, {3, 250}});
    CHECK_FALSE(io::read_sidecar(dir.file("raw.pgm")).has_value());
    const ScalarField f = io::read_pgm_field(dir.file("raw.pgm"), 1.0);
    CHECK(f.at(Cell{1, 0}) == 250.0);
  }
  SUBCASE("clamping, off-support cells and bad scalings") {
    const Lattice small = Lattice::plane(1.0, 3, 1);
    const ScalarField u(Region::index_box(small, {0, 0}, {1, 0}), {-5.0, 900.0, 1.0});
    const io::PgmImage img = io::field_to_pgm(u, io::PgmScaling{0.0, 1.0, 255});
    CHECK(img.pixels == std::vector<int>{0, 255, 0});
    CHECK_THROWS_AS(io::field_to_pgm(u, io::PgmScaling{0.0, 0.0, 255}), ValidationError);
    put(dir.file("s.pgm"), "P2\n1 1\n9\n1\n");
    put(dir.file("s.pgm.json"), "{\"offset\": 1}");
    CHECK(mentions(error_of([&] { io::read_pgm_field(dir.file("s.pgm"), 1.0); }), "malformed scaling sidecar"));
  }
}
