// Independent reference computations used by the tests. Nothing here calls
// the element machinery of the library; everything is brute force.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "lrbathy/bspline_basis.hpp"
#include "lrbathy/lr_surface.hpp"

namespace oracle {

// Cox-de Boor by the textbook recursion, half-open intervals, with the right
// end of the whole domain closed.
inline double cox_de_boor(const std::vector<double>& t, int j, int p, double x, double domain_max) {
  if (p == 0) {
    if (t[j] < t[j + 1] && t[j] <= x && (x < t[j + 1] || (x == domain_max && t[j + 1] == domain_max))) {
      return 1.0;
    }
    return 0.0;
  }
  double a = 0.0;
  double b = 0.0;
  if (t[j + p] > t[j]) a = (x - t[j]) / (t[j + p] - t[j]) * cox_de_boor(t, j, p - 1, x, domain_max);
  if (t[j + p + 1] > t[j + 1]) {
    b = (t[j + p + 1] - x) / (t[j + p + 1] - t[j + 1]) * cox_de_boor(t, j + 1, p - 1, x, domain_max);
  }
  return a + b;
}

inline double local_basis(const std::vector<double>& t, double x, double domain_max) {
  return cox_de_boor(t, 0, static_cast<int>(t.size()) - 2, x, domain_max);
}

// Sum over every B-spline of the surface, ignoring element residency.
inline double full_sum(const lrb::LRSurface& s, double u, double v, bool unity = false) {
  const auto& d = s.domain();
  double f = 0.0;
  for (const auto& b : s.bsplines()) {
    const double nu = local_basis(b.knots_u, u, d.umax);
    if (nu == 0.0) continue;
    const double nv = local_basis(b.knots_v, v, d.vmax);
    f += b.scaling * (unity ? 1.0 : b.coefficient) * nu * nv;
  }
  return f;
}

// Classical tensor-product spline with global knot vectors.
struct TensorSpline {
  int du = 2;
  int dv = 2;
  std::vector<double> ku;
  std::vector<double> kv;
  std::vector<std::vector<double>> coef;  // [i][j], i along u

  std::size_t nu() const { return ku.size() - du - 1; }
  std::size_t nv() const { return kv.size() - dv - 1; }

  double operator()(double u, double v) const {
    double f = 0.0;
    for (std::size_t i = 0; i < nu(); ++i) {
      const double bu = cox_de_boor(ku, static_cast<int>(i), du, u, ku.back());
      if (bu == 0.0) continue;
      for (std::size_t j = 0; j < nv(); ++j) {
        f += coef[i][j] * bu * cox_de_boor(kv, static_cast<int>(j), dv, v, kv.back());
      }
    }
    return f;
  }

  // Boehm insertion of one knot in u.
  void insert_u(double k) {
    const std::size_t r = static_cast<std::size_t>(std::upper_bound(ku.begin(), ku.end(), k) - ku.begin()) - 1;
    std::vector<std::vector<double>> next(nu() + 1, std::vector<double>(nv()));
    for (std::size_t i = 0; i <= nu(); ++i) {
      double a;
      if (i + du <= r) {
        a = 1.0;
      } else if (i > r) {
        a = 0.0;
      } else {
        a = (k - ku[i]) / (ku[i + du] - ku[i]);
      }
      for (std::size_t j = 0; j < nv(); ++j) {
        const double pi = i < nu() ? coef[i][j] : 0.0;
        const double pm = i > 0 ? coef[i - 1][j] : 0.0;
        next[i][j] = a * pi + (1.0 - a) * pm;
      }
    }
    ku.insert(ku.begin() + static_cast<long>(r) + 1, k);
    coef = std::move(next);
  }
};

// Counts the maximal rectangles of the partition by flood fill over the grid
// of all distinct line coordinates.
inline std::size_t count_elements(const lrb::BoxMesh& m) {
  const auto us = m.coordinates(lrb::Direction::ConstU);
  const auto vs = m.coordinates(lrb::Direction::ConstV);
  const std::size_t nu = us.size() - 1;
  const std::size_t nv = vs.size() - 1;
  auto blocked = [&](lrb::Direction d, double value, double lo, double hi) {
    const auto& lines = m.lines(d);
    auto it = lines.find(value);
    if (it == lines.end()) return false;
    for (const auto& p : it->second.parts()) {
      if (p.start <= lo && hi <= p.stop) return true;
    }
    return false;
  };
  std::vector<int> parent(nu * nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (std::size_t i = 0; i < nu; ++i) {
    for (std::size_t j = 0; j < nv; ++j) {
      const int c = static_cast<int>(i * nv + j);
      if (i + 1 < nu && !blocked(lrb::Direction::ConstU, us[i + 1], vs[j], vs[j + 1])) {
        parent[find(c)] = find(static_cast<int>((i + 1) * nv + j));
      }
      if (j + 1 < nv && !blocked(lrb::Direction::ConstV, vs[j + 1], us[i], us[i + 1])) {
        parent[find(c)] = find(static_cast<int>(i * nv + j + 1));
      }
    }
  }
  std::set<int> roots;
  for (std::size_t c = 0; c < parent.size(); ++c) roots.insert(find(static_cast<int>(c)));
  return roots.size();
}

// A random legal refinement: a midpoint line across the full support of a
// random B-spline in a random direction.
inline lrb::Segment random_refinement(const lrb::LRSurface& s, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  const auto& b = s.bsplines()[pick(rng)];
  const auto dir = coin(rng) == 0 ? lrb::Direction::ConstU : lrb::Direction::ConstV;
  const auto& t = b.knots(dir);
  const auto& o = b.knots(lrb::orthogonal(dir));
  std::vector<std::size_t> spans;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    if (t[j] < t[j + 1]) spans.push_back(j);
  }
  std::uniform_int_distribution<std::size_t> sp(0, spans.size() - 1);
  const std::size_t j = spans[sp(rng)];
  return {dir, 0.5 * (t[j] + t[j + 1]), o.front(), o.back(), 1};
}

// q(x, y) = a + b x + c y + d x^2 + e x y + f y^2
struct Quadratic {
  double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

  double operator()(double x, double y) const { return a + b * x + c * y + d * x * x + e * x * y + f * y * y; }

  // Polar form, symmetric in (x1, x2) and in (y1, y2).
  double blossom(double x1, double x2, double y1, double y2) const {
    const double mx = 0.5 * (x1 + x2);
    const double my = 0.5 * (y1 + y2);
    return a + b * mx + c * my + d * x1 * x2 + e * mx * my + f * y1 * y2;
  }
};

// Biquadratic tensor-product surface reproducing q exactly: every coefficient
// is the blossom at the two interior knots of its B-spline.
inline lrb::LRSurface blossom_surface(const Quadratic& q, const lrb::Box& domain, int n_u, int n_v) {
  auto s = lrb::LRSurface::tensor_product(domain, 2, 2, n_u, n_v);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& b = s.bsplines()[i];
    s.set_coefficient(i, q.blossom(b.knots_u[1], b.knots_u[2], b.knots_v[1], b.knots_v[2]) / b.scaling);
  }
  return s;
}

// The smoothing functional of a quadratic by brute force: the direction
// integral with the trapezoidal rule (exact for these trigonometric
// polynomials), the area integral with a 3x3 Gauss rule over the whole box
// (exact for the quadratic integrand of the first-derivative term).
inline double smoothing_by_quadrature(const Quadratic& q, const lrb::Box& box, double w1, double w2, double w3) {
  const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const int n_dir = 64;
  const double pi = std::acos(-1.0);
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double x = box.center_u() + 0.5 * box.width() * gx[i];
    for (int j = 0; j < 3; ++j) {
      const double y = box.center_v() + 0.5 * box.height() * gx[j];
      const double fx = q.b + 2 * q.d * x + q.e * y;
      const double fy = q.c + q.e * x + 2 * q.f * y;
      double inner = 0.0;
      for (int k = 0; k < n_dir; ++k) {
        const double phi = pi * k / n_dir;
        const double cs = std::cos(phi), sn = std::sin(phi);
        const double d1 = fx * cs + fy * sn;
        const double d2 = 2 * q.d * cs * cs + 2 * q.e * cs * sn + 2 * q.f * sn * sn;
        const double d3 = 0.0;
        inner += w1 * d1 * d1 + w2 * d2 * d2 + w3 * d3 * d3;
      }
      inner *= pi / n_dir;
      total += gw[i] * gw[j] * 0.25 * box.area() * inner;
    }
  }
  return total;
}

}  // namespace oracle

