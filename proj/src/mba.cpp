#include "lrbathy/mba.hpp"

#include <cmath>

#include "lrbathy/error.hpp"

namespace lrb {

MbaResult mba_update(LRSurface& s, std::span<const Point3> pts, const DistanceField& field, double tolerance) {
  if (field.size() != pts.size()) throw InputError("distance field does not match the point set");
  auto topo = s.topology();
  if (field.element_points.size() != topo->elements.size()) {
    throw InputError("distance field was computed on a different mesh");
  }
  const std::size_t n = s.size();
  std::vector<double> num(n, 0.0);
  std::vector<double> den(n, 0.0);
  std::vector<char> active(n, 0);
  std::vector<double> w;

  // Point order fixes the summation order of every accumulator.
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::size_t el = field.element[k];
    if (el == kNoElement) continue;
    const Element& e = topo->elements[el];
    element_basis(s, e, pts[k].x, pts[k].y, w);
    double sum_sq = 0.0;
    for (double v : w) sum_sq += v * v;
    if (!(sum_sq > 0.0)) continue;
    const double r = field.residual[k];
    const bool out = std::abs(r) > tolerance;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      const std::size_t b = e.resident[i];
      const double w2 = w[i] * w[i];
      const double phi = w[i] * r / sum_sq;
      num[b] += w2 * phi;
      den[b] += w2;
      if (out) active[b] = 1;
    }
  }

  MbaResult res;
  for (std::size_t b = 0; b < n; ++b) {
    if (!active[b] || !(den[b] > 0.0)) continue;
    const double dp = num[b] / den[b];
    if (dp == 0.0) continue;
    s.add_to_coefficient(b, dp);
    ++res.updated;
  }
  return res;
}

MbaResult mba_step(LRSurface& s, std::span<const Point3> pts, double tolerance) {
  const auto f = distance_field(s, pts, tolerance);
  return mba_update(s, pts, f, tolerance);
}

}  // namespace lrb
