#include <cstring>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lrbathy/config.hpp"
#include "lrbathy/error.hpp"
#include "lrbathy/evaluate.hpp"
#include "lrbathy/io.hpp"
#include "lrbathy/report.hpp"
#include "oracles.hpp"

using namespace lrb;

namespace {

LRSurface refined_surface(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> z(-50, 10);
  auto s = LRSurface::tensor_product({100.5, 731.25, -20, 480.125}, 2, 2, 6, 5);
  for (int k = 0; k < 25; ++k) s.insert_segment(oracle::random_refinement(s, rng));
  for (std::size_t i = 0; i < s.size(); ++i) s.set_coefficient(i, z(rng) / 3.0);
  s.set_units({"ft", "m"});
  return s;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void check_identical(const LRSurface& a, const LRSurface& b) {
  REQUIRE(a.size() == b.size());
  CHECK(a.domain() == b.domain());
  CHECK(a.units() == b.units());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.bsplines()[i];
    const auto& y = b.bsplines()[i];
    CHECK(x.knots_u == y.knots_u);
    CHECK(x.knots_v == y.knots_v);
    CHECK(same_bits(x.coefficient, y.coefficient));
    CHECK(same_bits(x.scaling, y.scaling));
  }
  CHECK(a.topology()->elements.size() == b.topology()->elements.size());
}

Survey parse(const std::string& text) {
  std::istringstream in(text);
  return read_survey(in, "fallback");
}

}  // namespace

TEST_CASE("binary surface round trip is exact") {
  const auto s = refined_surface(3);
  std::stringstream buf;
  write_surface_binary(s, buf);
  CHECK(buf.str().size() == binary_size(s));
  const auto r = read_surface_binary(buf);
  check_identical(s, r);
  std::stringstream again;
  write_surface_binary(r, again);
  CHECK(again.str() == buf.str());
}

TEST_CASE("text surface round trip") {
  const auto s = refined_surface(4);
  std::stringstream buf;
  write_surface_text(s, buf);
  const auto r = read_surface_text(buf);
  check_identical(s, r);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(100.5, 731.25), v(-20, 480.125);
  for (int k = 0; k < 200; ++k) {
    const double x = u(rng), y = v(rng);
    CHECK(evaluate(r, x, y) == doctest::Approx(evaluate(s, x, y)).epsilon(1e-12));
  }
}

TEST_CASE("corrupt surface files are rejected") {
  const auto s = refined_surface(5);
  std::stringstream buf;
  write_surface_binary(s, buf);
  const std::string bytes = buf.str();

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_surface_binary(truncated), InputError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::istringstream m(bad_magic);
  CHECK_THROWS_AS(read_surface_binary(m), InputError);
  std::istringstream text("not a surface");
  CHECK_THROWS_AS(read_surface_text(text), InputError);
}

TEST_CASE("survey text with metadata") {
  const auto s = parse(
      "# id: north\n"
      "# score: 0.75\n"
      "# method: mbes\n"
      "# date: 2011-04-02\n"
      "# density: 2.5\n"
      "# units: ft m\n"
      "# count: 3\n"
      "1 2 -3.5\n"
      "\n"
      "4,5,-6\n"
      "7;8;-9.25\n");
  CHECK(s.id == "north");
  REQUIRE(s.meta.score);
  CHECK(*s.meta.score == 0.75);
  CHECK(s.meta.method == "mbes");
  CHECK(s.meta.date == "2011-04-02");
  CHECK(s.meta.density == 2.5);
  CHECK(s.meta.horizontal_units == "ft");
  CHECK(s.meta.vertical_units == "m");
  REQUIRE(s.points.size() == 3);
  CHECK(s.points[2].z == -9.25);

  const auto plain = parse("0 0 1\n1 0 2\n");
  CHECK(plain.id == "fallback");
  CHECK_FALSE(plain.meta.score);
  CHECK(plain.meta.horizontal_units.empty());
  CHECK(parse("# units: m\n0 0 0\n").meta.vertical_units == "m");
}

TEST_CASE("malformed survey text") {
  CHECK_THROWS_AS(parse("1 2\n"), InputError);
  CHECK_THROWS_AS(parse("1 2 x\n"), InputError);
  CHECK_THROWS_AS(parse("1 2 nan\n"), InputError);
  CHECK_THROWS_AS(parse("# score: 2\n1 2 3\n"), InputError);
  CHECK_THROWS_AS(parse("# count: 2\n1 2 3\n"), InputError);
  CHECK_THROWS_AS(parse("# units: a b c\n1 2 3\n"), InputError);
}

TEST_CASE("survey round trips") {
  Survey s;
  s.id = "s1";
  s.meta.score = 0.1;
  s.meta.method = "lidar";
  s.meta.horizontal_units = "m";
  s.meta.vertical_units = "m";
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0, 100);
  for (int i = 0; i < 100; ++i) s.points.push_back({g(rng), g(rng), g(rng)});
  for (bool binary : {false, true}) {
    std::stringstream buf;
    if (binary) write_survey_binary(s, buf);
    else write_survey_text(s, buf);
    const auto r = read_survey(buf, "x");
    CHECK(r.id == "s1");
    CHECK(r.meta.score == s.meta.score);
    CHECK(r.meta.method == "lidar");
    CHECK(r.meta.horizontal_units == "m");
    REQUIRE(r.points.size() == s.points.size());
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      CHECK(same_bits(r.points[i].x, s.points[i].x));
      CHECK(same_bits(r.points[i].z, s.points[i].z));
    }
  }
}

TEST_CASE("exact number formatting") {
  for (double x : {0.1, -1.0 / 3.0, 1e-300, 123456789.123456789, -0.0}) {
    CHECK(same_bits(std::stod(format_exact(x)), x));
  }
}

TEST_CASE("config defaults, overrides and round trip") {
  const auto d = parse_config("{}");
  CHECK(d.fit.tolerance == FitConfig{}.tolerance);
  CHECK(d.deconflict_level == 3);

  const auto c = parse_config(R"({
    "fit": {"tolerance": 0.2, "max_iterations": 5},
    "least_squares": {"alpha_smooth": 0.01},
    "deconflict": {"level": 4, "df_method": "pooled", "within_fraction": 0.8},
    "tiling": {"nx": 3, "ny": 2, "continuity": "c0"},
    "threads": 2
  })");
  CHECK(c.fit.tolerance == 0.2);
  CHECK(c.criteria.tolerance == 0.2);
  CHECK(c.fit.max_iterations == 5);
  CHECK(c.fit.least_squares.weights.alpha_smooth == 0.01);
  CHECK(c.fit.least_squares.weights.alpha_data == 0.99);
  CHECK(c.deconflict_level == 4);
  CHECK(c.criteria.df_method == DfMethod::Pooled);
  CHECK(c.criteria.within_fraction == 0.8);
  CHECK(c.tiles_x == 3);
  CHECK(c.stitch == StitchMode::C0);
  CHECK(c.threads == 2);

  const auto r = parse_config(dump_config(c));
  CHECK(dump_config(r) == dump_config(c));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"fit": {"tolerence": 1}})"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"colour": 1})"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"fit": {"tolerance": "big"}})"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"fit": {"tolerance": -1}})"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"deconflict": {"df_method": "student"}})"), InputError);
  CHECK_THROWS_AS(parse_config(R"({"tiling": {"overlap": 0.7}})"), InputError);
}

TEST_CASE("distance field export") {
  const auto s = LRSurface::tensor_product({0, 1, 0, 1}, 2, 2, 3, 3, 1.0);
  const std::vector<Point3> pts{{0.5, 0.5, 1.25}, {2.0, 0.5, 0.0}};
  const auto f = distance_field(s, pts, 0.1);
  std::ostringstream out;
  write_distance_field(out, pts, f);
  CHECK(out.str() ==
        "x,y,z,residual,element,class\n"
        "0.5,0.5,1.25,0.25,0," +
            std::string(to_string(f.classification[0])) + "\n2,0.5,0,,," +
            std::string(to_string(f.classification[1])) + "\n");
}

TEST_CASE("iteration report columns") {
  IterationReport r{2, 100, 49, 0.5, 0.125, 7};
  std::ostringstream out;
  write_iteration_report(out, std::vector<IterationReport>{r}, std::vector<Approximation>{Approximation::Mba});
  CHECK(out.str() ==
        "iteration,method,file_size,coefficients,max_distance,average_distance,out_of_tolerance\n"
        "2,mba,100,49,0.5,0.125,7\n");
}
