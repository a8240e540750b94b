#include <random>

#include "doctest.h"
#include "lrbathy/adaptive.hpp"
#include "lrbathy/error.hpp"
#include "lrbathy/evaluate.hpp"
#include "lrbathy/independence.hpp"
#include "lrbathy/least_squares.hpp"
#include "lrbathy/mba.hpp"
#include "lrbathy/synthetic.hpp"
#include "oracles.hpp"

using namespace lrb;

namespace {

std::vector<Point3> sample(std::size_t n, const Box& box, std::uint64_t seed, auto&& height) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(box.umin, box.umax), v(box.vmin, box.vmax);
  std::vector<Point3> pts(n);
  for (auto& p : pts) {
    p.x = u(rng);
    p.y = v(rng);
    p.z = height(p.x, p.y);
  }
  return pts;
}

oracle::Quadratic random_quadratic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-2, 2);
  return {c(rng), c(rng), c(rng), c(rng), c(rng), c(rng)};
}

double max_error(const LRSurface& s, auto&& height) {
  const Box& d = s.domain();
  double m = 0.0;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const double u = d.umin + d.width() * i / 40.0, v = d.vmin + d.height() * j / 40.0;
      m = std::max(m, std::abs(evaluate(s, u, v) - height(u, v)));
    }
  }
  return m;
}

}  // namespace

TEST_CASE("blossom coefficients reproduce a quadratic through refinement") {
  std::mt19937_64 rng(21);
  const auto q = random_quadratic(rng);
  auto s = oracle::blossom_surface(q, {0, 2, -1, 1}, 5, 4);
  for (int k = 0; k < 20; ++k) s.insert_segment(oracle::random_refinement(s, rng));
  CHECK(max_error(s, q) <= 1e-12);
}

TEST_CASE("smoothing functional matches quadrature on quadratics") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  const Box box{-1, 2, 0.5, 3};
  for (int k = 0; k < 10; ++k) {
    const auto q = random_quadratic(rng);
    auto s = oracle::blossom_surface(q, box, 4, 6);
    for (int r = 0; r < 8; ++r) s.insert_segment(oracle::random_refinement(s, rng));
    const SmoothingWeights sw{1e-3, 1.0 - 1e-3, w(rng), w(rng), w(rng)};
    const double expected = oracle::smoothing_by_quadrature(q, box, sw.w1, sw.w2, sw.w3);
    CHECK(smoothing_functional(s, sw) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("smoothing matrix is symmetric and vanishes on planes") {
  std::mt19937_64 rng(6);
  auto s = oracle::blossom_surface({1.0, 0.3, -2.0, 0, 0, 0}, {0, 1, 0, 1}, 5, 5);
  for (int r = 0; r < 6; ++r) s.insert_segment(oracle::random_refinement(s, rng));
  const auto m = smoothing_matrix(s, SmoothingWeights{});
  const Eigen::MatrixXd dense(m);
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * dense.cwiseAbs().maxCoeff());
  CHECK(std::abs(smoothing_functional(s, SmoothingWeights{})) <= 1e-12);
}

TEST_CASE("least squares reproduces a plane") {
  const Box box{0, 10, 0, 5};
  auto plane = [](double x, double y) { return x + 2 * y; };
  const auto pts = sample(3000, box, 3, plane);
  auto s = LRSurface::tensor_product(box, 2, 2, 8, 6);
  LeastSquaresOptions opt;
  opt.weights = SmoothingWeights::with_smoothing(1e-9);
  fit_least_squares(s, pts, opt, GhostSource::InverseDistance);
  CHECK(max_error(s, plane) <= 1e-8);
}

TEST_CASE("stronger smoothing lowers the smoothing functional") {
  BenchmarkSpec spec;
  spec.points = 5000;
  const auto pts = synthetic_benchmark(spec);
  const Box box{0, spec.extent, 0, spec.extent};
  double prev = INFINITY;
  for (double a : {1e-9, 1e-4, 1e-1}) {
    auto s = LRSurface::tensor_product(box, 2, 2, 12, 12);
    LeastSquaresOptions opt;
    opt.weights = SmoothingWeights::with_smoothing(a);
    fit_least_squares(s, pts, opt, GhostSource::InverseDistance);
    const double j = smoothing_functional(s, opt.weights);
    CHECK(j < prev);
    prev = j;
  }
}

TEST_CASE("least squares fills empty supports with ghost points") {
  const Box box{0, 1, 0, 1};
  const auto pts = sample(400, {0, 0.4, 0, 1}, 8, [](double x, double y) { return 2.0 + x - y; });
  auto s = LRSurface::tensor_product(box, 2, 2, 8, 8);
  const auto counts = support_point_counts(s, pts);
  CHECK(std::count(counts.begin(), counts.end(), std::size_t{0}) > 0);
  const auto ghosts = ghost_points(s, pts, GhostSource::InverseDistance);
  CHECK_FALSE(ghosts.empty());
  LeastSquaresOptions opt;
  const auto r = fit_least_squares(s, pts, opt, GhostSource::InverseDistance);
  CHECK(r.ghost_points == ghosts.size());
  for (double y : {0.1, 0.5, 0.9}) CHECK(std::isfinite(evaluate(s, 0.9, y)));
}

TEST_CASE("one-point update interpolates the point") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> c(-1, 1);
  auto s = LRSurface::tensor_product({0, 1, 0, 1}, 2, 2, 3, 3);
  for (std::size_t i = 0; i < s.size(); ++i) s.set_coefficient(i, c(rng));
  const std::vector<Point3> pt{{0.3, 0.65, 1.7}};
  const double before = evaluate(s, 0.3, 0.65);
  const double r = 1.7 - before;

  std::vector<double> w(s.size());
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& b = s.bsplines()[i];
    w[i] = b.scaling * oracle::local_basis(b.knots_u, 0.3, 1.0) * oracle::local_basis(b.knots_v, 0.65, 1.0);
    sum_sq += w[i] * w[i];
  }
  const auto old = s.coefficients();
  mba_step(s, pt, 0.0);
  const auto now = s.coefficients();
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(now[i] - old[i] == doctest::Approx(w[i] * r / sum_sq).epsilon(1e-12).scale(1.0));
  }
  CHECK(evaluate(s, 0.3, 0.65) == doctest::Approx(1.7).epsilon(1e-13));
}

TEST_CASE("update of a constant residual follows the direct formula") {
  auto s = LRSurface::tensor_product({0, 1, 0, 1}, 2, 2, 6, 6);
  std::vector<Point3> pts;
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 60; ++j) pts.push_back({(i + 0.5) / 60.0, (j + 0.5) / 60.0, 1.0});
  }
  // Direct sums of the update formula over all points and B-splines.
  std::vector<double> num(s.size(), 0.0), den(s.size(), 0.0);
  for (const auto& p : pts) {
    std::vector<double> w(s.size());
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& b = s.bsplines()[i];
      w[i] = b.scaling * oracle::local_basis(b.knots_u, p.x, 1.0) * oracle::local_basis(b.knots_v, p.y, 1.0);
      sum_sq += w[i] * w[i];
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (w[i] == 0.0) continue;
      num[i] += w[i] * w[i] * (w[i] * p.z / sum_sq);
      den[i] += w[i] * w[i];
    }
  }
  mba_step(s, pts, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.bsplines()[i].coefficient == doctest::Approx(num[i] / den[i]).epsilon(1e-12));
  }
}

TEST_CASE("update leaves a surface within tolerance unchanged") {
  auto s = oracle::blossom_surface({0.5, 1, 2, 0, 0, 0}, {0, 1, 0, 1}, 6, 6);
  const auto pts = sample(2000, {0, 1, 0, 1}, 1, [](double x, double y) { return 0.5 + x + 2 * y; });
  const auto old = s.coefficients();
  const auto r = mba_step(s, pts, 1e-6);
  CHECK(r.updated == 0);
  CHECK(s.coefficients() == old);

  auto zero = s;
  const std::vector<Point3> none;
  mba_step(zero, none, 0.0);
  CHECK(zero.coefficients() == old);
}

TEST_CASE("update is local to the supports that contain points") {
  auto s = LRSurface::tensor_product({0, 1, 0, 1}, 2, 2, 8, 8);
  const auto pts = sample(200, {0, 0.2, 0, 0.2}, 4, [](double, double) { return 1.0; });
  mba_step(s, pts, 0.0);
  for (const auto& b : s.bsplines()) {
    if (b.knots_u.front() >= 0.2 || b.knots_v.front() >= 0.2) CHECK(b.coefficient == 0.0);
  }
}

TEST_CASE("adaptive fit meets the tolerance on smooth data") {
  BenchmarkSpec spec;
  spec.points = 20000;
  const auto pts = synthetic_benchmark(spec);
  FitConfig cfg;
  cfg.tolerance = 2.0 * benchmark_tolerance();
  cfg.max_iterations = 10;
  const auto r = fit(pts, cfg);
  REQUIRE_FALSE(r.reports.empty());
  CHECK(r.reports.back().out_of_tolerance == 0);
  CHECK(r.reports.size() == r.methods.size());
  CHECK(r.methods.front() == Approximation::LeastSquares);
  CHECK(r.surface.validate().empty());
  const auto f = distance_field(r.surface, pts, cfg.tolerance);
  const auto again = make_report(r.reports.back().iteration, r.surface, f);
  CHECK(again == r.reports.back());
  for (std::size_t i = 1; i < r.reports.size(); ++i) {
    CHECK(r.reports[i].coefficients >= r.reports[i - 1].coefficients);
  }
}

TEST_CASE("adaptive fit input checks") {
  CHECK_THROWS_AS(fit({}, FitConfig{}), InputError);
  std::vector<Point3> line;
  for (int i = 0; i < 50; ++i) line.push_back({1.0 * i, 2.0 * i, 0.0});
  CHECK_THROWS_AS(fit(line, FitConfig{}), InputError);
  const auto few = sample(6, {0, 1, 0, 1}, 2, [](double x, double) { return x; });
  const auto r = fit(few, FitConfig{});
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("tensor-product spaces are locally independent") {
  const auto s = LRSurface::tensor_product({0, 1, 0, 1}, 2, 2, 6, 5);
  const auto rep = check_local_independence(s);
  CHECK(rep.global);
  CHECK(rep.independent());
  REQUIRE(rep.clusters.size() == 1);
  CHECK(rep.clusters[0].rank == s.size());
}

TEST_CASE("midpoint refinements keep the B-splines independent") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    std::mt19937_64 rng(seed);
    auto s = LRSurface::tensor_product({0, 1, 0, 1}, 2, 2, 4, 4);
    for (int k = 0; k < 25; ++k) s.insert_segment(oracle::random_refinement(s, rng));
    CHECK(check_local_independence(s).independent());
    CHECK(check_local_independence(s, 4, 0).independent());
  }
}

TEST_CASE("a duplicated B-spline is reported") {
  const auto s = LRSurface::tensor_product({0, 1, 0, 1}, 2, 2, 4, 4);
  auto parts = s.bsplines();
  const auto copy = parts[5];
  parts.push_back(copy);
  const auto dup = LRSurface::from_parts(s.mesh(), parts);
  const auto rep = check_local_independence(dup);
  CHECK_FALSE(rep.independent());
  CHECK_FALSE(rep.suspects.empty());
}
