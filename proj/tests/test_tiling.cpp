#include <random>

#include "doctest.h"
#include "lrbathy/error.hpp"
#include "lrbathy/evaluate.hpp"
#include "lrbathy/synthetic.hpp"
#include "lrbathy/tiling.hpp"

using namespace lrb;

namespace {

std::vector<Point3> plane_points(std::size_t n, const Box& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(box.umin, box.umax), v(box.vmin, box.vmax);
  std::vector<Point3> pts(n);
  for (auto& p : pts) {
    p.x = u(rng);
    p.y = v(rng);
    p.z = 3.0 + 0.5 * p.x - 0.2 * p.y;
  }
  return pts;
}

TileSet benchmark_tiles(int nx, int ny) {
  BenchmarkSpec spec;
  spec.points = 30000;
  const auto pts = synthetic_benchmark(spec);
  FitConfig cfg;
  cfg.tolerance = benchmark_tolerance();
  cfg.max_iterations = 4;
  return fit_tiles(pts, make_tiles({0, spec.extent, 0, spec.extent}, nx, ny), cfg);
}

}  // namespace

TEST_CASE("tile cores partition the grid box") {
  const Box box{-10, 40, 5, 20};
  const auto g = make_tiles(box, 5, 3, 0.1);
  REQUIRE(g.tiles.size() == 15);
  double area = 0.0;
  for (int iy = 0; iy < 3; ++iy) {
    for (int ix = 0; ix < 5; ++ix) {
      const Tile& t = g.tiles[g.index(ix, iy)];
      CHECK(t.ix == ix);
      CHECK(t.iy == iy);
      CHECK(t.expanded.contains(t.core));
      CHECK(box.contains(t.expanded));
      area += t.core.area();
      if (ix + 1 < 5) CHECK(t.core.umax == g.tiles[g.index(ix + 1, iy)].core.umin);
      if (iy + 1 < 3) CHECK(t.core.vmax == g.tiles[g.index(ix, iy + 1)].core.vmin);
    }
  }
  CHECK(area == doctest::Approx(box.area()));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(box.umin, box.umax), v(box.vmin, box.vmax);
  for (int k = 0; k < 2000; ++k) {
    const double x = u(rng), y = v(rng);
    const std::size_t t = g.core_tile(x, y);
    CHECK(g.tiles[t].core.contains(x, y));
    const auto ex = g.expanded_tiles(x, y);
    CHECK(std::find(ex.begin(), ex.end(), t) != ex.end());
  }
  CHECK(g.core_tile(box.umax, box.vmax) == g.index(4, 2));
}

TEST_CASE("zero overlap and single tile grids") {
  const Box box{0, 9, 0, 4};
  const auto g = make_tiles(box, 3, 2, 0.0);
  for (const auto& t : g.tiles) CHECK(t.expanded == t.core);
  const auto one = make_tiles(box, 1, 1);
  REQUIRE(one.tiles.size() == 1);
  CHECK(one.tiles[0].core == box);
  CHECK(one.tiles[0].expanded == box);
  CHECK_THROWS_AS(make_tiles(box, 0, 2), InputError);
}

TEST_CASE("independent tile fits of a plane already agree") {
  const Box box{0, 200, 0, 100};
  const auto pts = plane_points(4000, box, 9);
  FitConfig cfg;
  cfg.tolerance = 0.01;
  cfg.max_iterations = 2;
  const auto set = fit_tiles(pts, make_tiles(box, 2, 1), cfg);
  const auto edges = tile_edges(set);
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].vertical);
  CHECK(edges[0].position == doctest::Approx(100.0));
  const auto j = measure_edge(set, edges[0]);
  CHECK(j.value <= 1e-6);
  CHECK(j.derivative <= 1e-6);
}

TEST_CASE("empty tiles become holes") {
  const Box box{0, 200, 0, 100};
  auto pts = plane_points(3000, {0, 90, 0, 100}, 4);
  pts.push_back({200, 100, 0});
  FitConfig cfg;
  cfg.tolerance = 0.01;
  cfg.max_iterations = 1;
  const auto set = fit_tiles(pts, make_tiles(box, 2, 1), cfg);
  CHECK(set.fits[0].surface);
  CHECK_FALSE(set.fits[1].surface);
  CHECK_FALSE(set.fits[1].note.empty());
  CHECK(tile_edges(set).empty());
}

TEST_CASE("stitching closes value and derivative jumps") {
  auto set = benchmark_tiles(2, 2);
  const auto edges = tile_edges(set);
  REQUIRE(edges.size() == 4);
  double before = 0.0;
  for (const auto& e : edges) before = std::max(before, measure_edge(set, e).value);
  CHECK(before > 1e-6);

  auto c0 = set;
  stitch(c0, Continuity::C0);
  for (const auto& e : tile_edges(c0)) CHECK(measure_edge(c0, e).value <= 1e-10);

  const auto rep = stitch(set, Continuity::C1);
  CHECK(rep.strip_width > 0.0);
  CHECK(rep.constraints > 0);
  for (const auto& e : edges) {
    const auto j = measure_edge(set, e);
    CHECK(j.value <= 1e-10);
    CHECK(j.derivative <= 1e-7 * j.derivative_scale);
  }
  for (const auto& f : set.fits) CHECK(f.surface->validate().empty());
}

TEST_CASE("stitching leaves the surface away from the strips unchanged") {
  auto set = benchmark_tiles(2, 1);
  const auto before = set;
  const auto rep = stitch(set, Continuity::C1);
  const double edge = set.grid.xs[1];
  const double reach = 2.0 * rep.strip_width * (1.0 + 1e-9);
  std::mt19937_64 rng(8);
  for (std::size_t t = 0; t < 2; ++t) {
    const Box d = set.fits[t].surface->domain();
    std::uniform_real_distribution<double> u(d.umin, d.umax), v(d.vmin, d.vmax);
    int far = 0;
    double worst = 0.0;
    while (far < 2000) {
      const double x = u(rng), y = v(rng);
      if (std::abs(x - edge) <= reach) continue;
      ++far;
      worst = std::max(worst, std::abs(evaluate(*set.fits[t].surface, x, y) - evaluate(*before.fits[t].surface, x, y)));
    }
    CHECK(worst <= 1e-11);
  }
}

TEST_CASE("stitching rejects mismatched degrees") {
  auto set = benchmark_tiles(2, 1);
  set.fits[1].surface = LRSurface::tensor_product(set.grid.tiles[1].core, 3, 3, 5, 5);
  CHECK_THROWS_AS(stitch(set, Continuity::C0), InputError);
}
