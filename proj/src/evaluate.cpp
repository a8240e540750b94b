#include "lrbathy/evaluate.hpp"

#include <cmath>
#include <sstream>

#include "lrbathy/bspline_basis.hpp"
#include "lrbathy/error.hpp"
#include "lrbathy/parallel.hpp"

namespace lrb {

namespace {

const Element& locate_or_throw(const LRSurface& s, const Topology& topo, double u, double v) {
  const std::size_t e = topo.locate(u, v);
  if (e == kNoElement) {
    const Box& d = s.domain();
    const double nu = std::clamp(u, d.umin, d.umax);
    const double nv = std::clamp(v, d.vmin, d.vmax);
    std::ostringstream msg;
    msg.precision(17);
    msg << "point (" << u << ", " << v << ") is outside the surface domain; nearest domain point is ("
        << nu << ", " << nv << ")";
    throw DomainError(msg.str(), nu, nv);
  }
  return topo.elements[e];
}

}  // namespace

void element_basis(const LRSurface& s, const Element& e, double u, double v, std::vector<double>& out) {
  out.resize(e.resident.size());
  const auto& bs = s.bsplines();
  double bu[1];
  double bv[1];
  for (std::size_t r = 0; r < e.resident.size(); ++r) {
    const auto& b = bs[e.resident[r]];
    bspline_piece(b.knots_u, e.box.umin, e.box.umax, u, 0, bu);
    bspline_piece(b.knots_v, e.box.vmin, e.box.vmax, v, 0, bv);
    out[r] = b.scaling * bu[0] * bv[0];
  }
}

void element_basis_partials(const LRSurface& s, const Element& e, double u, double v, int order,
                            std::vector<double>& out) {
  order = std::clamp(order, 0, kMaxDerivative);
  out.assign(e.resident.size() * 10, 0.0);
  const auto& bs = s.bsplines();
  std::array<double, kMaxDerivative + 1> bu{};
  std::array<double, kMaxDerivative + 1> bv{};
  for (std::size_t r = 0; r < e.resident.size(); ++r) {
    const auto& b = bs[e.resident[r]];
    bspline_piece(b.knots_u, e.box.umin, e.box.umax, u, order, std::span(bu).first(order + 1));
    bspline_piece(b.knots_v, e.box.vmin, e.box.vmax, v, order, std::span(bv).first(order + 1));
    double* o = out.data() + r * 10;
    for (int k = 0; k <= order; ++k) {
      for (int j = 0; j <= k; ++j) o[Partials::slot(k - j, j)] = b.scaling * bu[k - j] * bv[j];
    }
  }
}

Partials evaluate_in_element(const LRSurface& s, const Element& e, double u, double v, int order) {
  order = std::clamp(order, 0, kMaxDerivative);
  Partials p;
  p.order = order;
  const auto& bs = s.bsplines();
  std::array<double, kMaxDerivative + 1> bu{};
  std::array<double, kMaxDerivative + 1> bv{};
  for (std::size_t i : e.resident) {
    const auto& b = bs[i];
    bspline_piece(b.knots_u, e.box.umin, e.box.umax, u, order, std::span(bu).first(order + 1));
    bspline_piece(b.knots_v, e.box.vmin, e.box.vmax, v, order, std::span(bv).first(order + 1));
    const double c = b.scaling * b.coefficient;
    for (int k = 0; k <= order; ++k) {
      for (int j = 0; j <= k; ++j) p.d[Partials::slot(k - j, j)] += c * bu[k - j] * bv[j];
    }
  }
  return p;
}

double evaluate(const LRSurface& s, double u, double v) { return evaluate(s, u, v, 0).value(); }

Partials evaluate(const LRSurface& s, double u, double v, int order) {
  auto topo = s.topology();
  return evaluate_in_element(s, locate_or_throw(s, *topo, u, v), u, v, order);
}

std::string_view to_string(PointClass c) {
  switch (c) {
    case PointClass::Within: return "within";
    case PointClass::Above: return "above";
    case PointClass::Below: return "below";
    case PointClass::Outside: return "outside-domain";
  }
  return "unknown";
}

std::size_t DistanceField::out_of_tolerance() const {
  std::size_t n = 0;
  for (auto c : classification) n += (c == PointClass::Above || c == PointClass::Below) ? 1 : 0;
  return n;
}

double DistanceField::max_abs() const {
  double m = 0.0;
  for (std::size_t k = 0; k < residual.size(); ++k) {
    if (element[k] != kNoElement) m = std::max(m, std::abs(residual[k]));
  }
  return m;
}

double DistanceField::mean_abs() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < residual.size(); ++k) {
    if (element[k] != kNoElement) sum += std::abs(residual[k]);
  }
  const std::size_t n = inside();
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

DistanceField distance_field(const LRSurface& s, std::span<const Point3> pts, double tolerance) {
  DistanceField f;
  f.tolerance = tolerance;
  f.residual.resize(pts.size());
  f.element.resize(pts.size());
  f.classification.resize(pts.size());
  auto topo = s.topology();

  parallel_chunks(pts.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t k = b; k < e; ++k) {
      const auto& p = pts[k];
      const std::size_t el = topo->locate(p.x, p.y);
      f.element[k] = el;
      if (el == kNoElement) {
        f.residual[k] = std::numeric_limits<double>::quiet_NaN();
        f.classification[k] = PointClass::Outside;
        continue;
      }
      const double r = p.z - evaluate_in_element(s, topo->elements[el], p.x, p.y, 0).value();
      f.residual[k] = r;
      f.classification[k] = r > tolerance ? PointClass::Above
                            : r < -tolerance ? PointClass::Below
                                             : PointClass::Within;
    }
  });

  f.element_points.assign(topo->elements.size(), {});
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (f.element[k] == kNoElement) {
      ++f.outside;
    } else {
      f.element_points[f.element[k]].push_back(k);
    }
  }
  return f;
}

std::vector<ElementAccuracy> element_accuracy(const DistanceField& f) {
  std::vector<ElementAccuracy> acc(f.element_points.size());
  for (std::size_t e = 0; e < acc.size(); ++e) {
    auto& a = acc[e];
    double sum = 0.0;
    for (std::size_t k : f.element_points[e]) {
      const double r = std::abs(f.residual[k]);
      a.max_abs = std::max(a.max_abs, r);
      sum += r;
      if (r > f.tolerance) ++a.out_count;
    }
    a.count = f.element_points[e].size();
    a.mean_abs = a.count == 0 ? 0.0 : sum / static_cast<double>(a.count);
  }
  return acc;
}

}  // namespace lrb
