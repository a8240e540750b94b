#include "lrbathy/least_squares.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <queue>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "lrbathy/error.hpp"
#include "lrbathy/evaluate.hpp"
#include "lrbathy/parallel.hpp"
#include "lrbathy/quadrature.hpp"

namespace lrb {

namespace {

using Triplet = Eigen::Triplet<double>;
using SpMat = Eigen::SparseMatrix<double>;

constexpr double kPi = std::numbers::pi;

// phi-integrated squared radial derivatives as a bilinear form on the partial
// derivative vectors f and g (layout of Partials::slot).
double radial_form(const SmoothingWeights& w, const double* f, const double* g) {
  double r = 0.0;
  if (w.w1 != 0.0) r += w.w1 * kPi / 2.0 * (f[1] * g[1] + f[2] * g[2]);
  if (w.w2 != 0.0) {
    r += w.w2 * kPi / 8.0 *
         (3.0 * f[3] * g[3] + f[3] * g[5] + f[5] * g[3] + 4.0 * f[4] * g[4] + 3.0 * f[5] * g[5]);
  }
  if (w.w3 != 0.0) {
    const double fa = f[6], fb = 3.0 * f[7], fc = 3.0 * f[8], fd = f[9];
    const double ga = g[6], gb = 3.0 * g[7], gc = 3.0 * g[8], gd = g[9];
    r += w.w3 * kPi / 16.0 *
         (5.0 * fa * ga + 5.0 * fd * gd + fb * gb + fc * gc + fa * gc + fc * ga + fb * gd + fd * gb);
  }
  return r;
}

int form_order(const SmoothingWeights& w) { return w.w3 != 0.0 ? 3 : (w.w2 != 0.0 ? 2 : 1); }

// Local element contributions gathered into triplets in element order.
template <class LocalFn>
std::vector<Triplet> assemble_by_element(const Topology& topo, LocalFn&& local) {
  const std::size_t ne = topo.elements.size();
  std::vector<std::vector<double>> blocks(ne);
  parallel_chunks(
      ne, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) blocks[i] = local(i);
      },
      64);
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < ne; ++i) {
    const auto& res = topo.elements[i].resident;
    const std::size_t nr = res.size();
    if (blocks[i].empty()) continue;
    for (std::size_t a = 0; a < nr; ++a) {
      for (std::size_t b = 0; b < nr; ++b) {
        const double v = blocks[i][a * nr + b];
        if (v != 0.0) trip.emplace_back(static_cast<int>(res[a]), static_cast<int>(res[b]), v);
      }
    }
  }
  return trip;
}

std::vector<std::vector<std::size_t>> group_by_element(const Topology& topo, std::span<const Point3> pts) {
  std::vector<std::vector<std::size_t>> out(topo.elements.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::size_t e = topo.locate(pts[k].x, pts[k].y);
    if (e != kNoElement) out[e].push_back(k);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

SpMat smoothing_matrix(const LRSurface& s, const SmoothingWeights& w) {
  auto topo = s.topology();
  const int order = form_order(w);
  const GaussRule gu = gauss_legendre(s.degree_u() + 1);
  const GaussRule gv = gauss_legendre(s.degree_v() + 1);

  auto trip = assemble_by_element(*topo, [&](std::size_t ei) {
    const Element& e = topo->elements[ei];
    const std::size_t nr = e.resident.size();
    std::vector<double> block(nr * nr, 0.0);
    std::vector<double> part;
    const double hu = 0.5 * e.box.width();
    const double hv = 0.5 * e.box.height();
    for (std::size_t a = 0; a < gu.nodes.size(); ++a) {
      const double u = e.box.center_u() + hu * gu.nodes[a];
      for (std::size_t b = 0; b < gv.nodes.size(); ++b) {
        const double v = e.box.center_v() + hv * gv.nodes[b];
        const double wt = gu.weights[a] * gv.weights[b] * hu * hv;
        element_basis_partials(s, e, u, v, order, part);
        for (std::size_t i = 0; i < nr; ++i) {
          for (std::size_t j = i; j < nr; ++j) {
            block[i * nr + j] += wt * radial_form(w, &part[i * 10], &part[j * 10]);
          }
        }
      }
    }
    for (std::size_t i = 0; i < nr; ++i) {
      for (std::size_t j = 0; j < i; ++j) block[i * nr + j] = block[j * nr + i];
    }
    return block;
  });
  SpMat m(static_cast<int>(s.size()), static_cast<int>(s.size()));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// Integrated from the surface derivatives directly; c^T M c loses digits to
// cancellation when the coefficients are large next to the derivatives.
double smoothing_functional(const LRSurface& s, const SmoothingWeights& w) {
  auto topo = s.topology();
  const int order = form_order(w);
  const GaussRule gu = gauss_legendre(s.degree_u() + 1);
  const GaussRule gv = gauss_legendre(s.degree_v() + 1);
  const auto coef = s.coefficients();
  const std::size_t ne = topo->elements.size();
  std::vector<double> per_element(ne, 0.0);
  parallel_chunks(
      ne, [&](std::size_t first, std::size_t last) {
        std::vector<double> part;
        for (std::size_t ei = first; ei < last; ++ei) {
          const Element& e = topo->elements[ei];
          const double hu = 0.5 * e.box.width();
          const double hv = 0.5 * e.box.height();
          double sum = 0.0;
          for (std::size_t a = 0; a < gu.nodes.size(); ++a) {
            const double u = e.box.center_u() + hu * gu.nodes[a];
            for (std::size_t b = 0; b < gv.nodes.size(); ++b) {
              const double v = e.box.center_v() + hv * gv.nodes[b];
              element_basis_partials(s, e, u, v, order, part);
              double d[10] = {};
              for (std::size_t i = 0; i < e.resident.size(); ++i) {
                for (int k = 0; k < 10; ++k) d[k] += coef[e.resident[i]] * part[i * 10 + k];
              }
              sum += gu.weights[a] * gv.weights[b] * hu * hv * radial_form(w, d, d);
            }
          }
          per_element[ei] = sum;
        }
      },
      64);
  double j = 0.0;
  for (double x : per_element) j += x;
  return j;
}

double penalty(const LRSurface& s, std::span<const Point3> pts, const SmoothingWeights& w) {
  const auto f = distance_field(s, pts, 0.0);
  double sq = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (f.element[k] != kNoElement) sq += f.residual[k] * f.residual[k];
  }
  const double j = w.alpha_smooth != 0.0 ? smoothing_functional(s, w) : 0.0;
  return w.alpha_smooth * j + w.alpha_data * sq;
}

std::vector<std::size_t> support_point_counts(const LRSurface& s, std::span<const Point3> pts) {
  auto topo = s.topology();
  std::vector<std::size_t> per_element(topo->elements.size(), 0);
  for (const auto& p : pts) {
    const std::size_t e = topo->locate(p.x, p.y);
    if (e != kNoElement) ++per_element[e];
  }
  std::vector<std::size_t> counts(s.size(), 0);
  for (std::size_t b = 0; b < s.size(); ++b) {
    for (std::size_t e : topo->bspline_elements[b]) counts[b] += per_element[e];
  }
  return counts;
}

std::vector<Point3> ghost_points(const LRSurface& s, std::span<const Point3> pts, GhostSource source,
                                 int idw_neighbours) {
  auto topo = s.topology();
  const auto counts = support_point_counts(s, pts);
  const std::size_t need = static_cast<std::size_t>((s.degree_u() + 1) * (s.degree_v() + 1));
  std::vector<char> chosen(topo->elements.size(), 0);
  for (std::size_t b = 0; b < s.size(); ++b) {
    if (counts[b] >= need) continue;
    for (std::size_t e : topo->bspline_elements[b]) chosen[e] = 1;
  }
  std::vector<Point3> ghosts;
  std::optional<NeighbourGrid> grid;
  if (source == GhostSource::InverseDistance && !pts.empty()) grid.emplace(pts);
  for (std::size_t e = 0; e < chosen.size(); ++e) {
    if (!chosen[e]) continue;
    const Box& b = topo->elements[e].box;
    Point3 g{b.center_u(), b.center_v(), 0.0};
    if (source == GhostSource::CurrentSurface) {
      g.z = evaluate_in_element(s, topo->elements[e], g.x, g.y, 0).value();
    } else if (grid) {
      g.z = grid->idw(g.x, g.y, idw_neighbours);
    }
    ghosts.push_back(g);
  }
  return ghosts;
}

LeastSquaresResult fit_least_squares(LRSurface& s, std::span<const Point3> pts, const LeastSquaresOptions& opt,
                                     GhostSource source) {
  LeastSquaresResult result;
  const auto& w = opt.weights;
  if (!(w.alpha_data > 0.0)) throw InputError("the data weight must be positive");

  std::vector<Point3> ghosts;
  if (opt.stabilize && opt.ghost_weight > 0.0) {
    ghosts = ghost_points(s, pts, source, opt.idw_neighbours);
  }
  result.ghost_points = ghosts.size();

  auto topo = s.topology();
  const auto data = group_by_element(*topo, pts);
  const auto extra = group_by_element(*topo, ghosts);
  const double gw = opt.ghost_weight;

  const std::size_t n = s.size();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<std::vector<double>> local_rhs(topo->elements.size());

  auto trip = assemble_by_element(*topo, [&](std::size_t ei) {
    const Element& e = topo->elements[ei];
    const std::size_t nr = e.resident.size();
    if (data[ei].empty() && extra[ei].empty()) return std::vector<double>{};
    std::vector<double> block(nr * nr, 0.0);
    std::vector<double> r(nr, 0.0);
    std::vector<double> bv;
    auto add = [&](const Point3& p, double weight) {
      element_basis(s, e, p.x, p.y, bv);
      for (std::size_t i = 0; i < nr; ++i) {
        if (bv[i] == 0.0) continue;
        const double wi = weight * bv[i];
        r[i] += wi * p.z;
        for (std::size_t j = 0; j < nr; ++j) block[i * nr + j] += wi * bv[j];
      }
    };
    for (std::size_t k : data[ei]) add(pts[k], w.alpha_data);
    for (std::size_t k : extra[ei]) add(ghosts[k], w.alpha_data * gw);
    local_rhs[ei] = std::move(r);
    return block;
  });
  for (std::size_t ei = 0; ei < local_rhs.size(); ++ei) {
    const auto& res = topo->elements[ei].resident;
    for (std::size_t i = 0; i < local_rhs[ei].size(); ++i) rhs[static_cast<Eigen::Index>(res[i])] += local_rhs[ei][i];
  }

  SpMat a(static_cast<int>(n), static_cast<int>(n));
  a.setFromTriplets(trip.begin(), trip.end());
  if (w.alpha_smooth != 0.0) a += w.alpha_smooth * smoothing_matrix(s, w);
  a.makeCompressed();

  Eigen::VectorXd x;
  bool solved = false;
  if (n <= opt.direct_solver_limit) {
    Eigen::SimplicialLDLT<SpMat> ldlt(a);
    if (ldlt.info() == Eigen::Success) {
      x = ldlt.solve(rhs);
      // A few refinement sweeps recover accuracy on poorly scaled systems.
      for (int it = 0; it < 3; ++it) {
        const Eigen::VectorXd res = rhs - a * x;
        if (res.norm() <= opt.tolerance * rhs.norm()) break;
        x += ldlt.solve(res);
      }
      solved = ldlt.info() == Eigen::Success && x.allFinite();
    }
  }
  if (!solved) {
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
    cg.setTolerance(opt.tolerance);
    cg.setMaxIterations(static_cast<Eigen::Index>(std::max<std::size_t>(1000, 20 * n)));
    cg.compute(a);
    if (cg.info() == Eigen::Success) {
      x = cg.solve(rhs);
      solved = x.allFinite();
      result.iterative = true;
    }
  }

  const double bn = rhs.norm();
  result.relative_residual = solved ? (bn > 0.0 ? (rhs - a * x).norm() / bn : (a * x).norm()) : INFINITY;
  if (!solved || !(result.relative_residual <= std::max(opt.tolerance, 1e-10) * 100.0)) {
    const auto counts = support_point_counts(s, pts);
    std::ostringstream msg;
    msg << "least squares system could not be solved (relative residual " << result.relative_residual << ")";
    std::size_t listed = 0;
    for (std::size_t b = 0; b < counts.size() && listed < 20; ++b) {
      if (counts[b] == 0) {
        msg << (listed == 0 ? "; B-splines without data in their support:" : "") << ' ' << b;
        ++listed;
      }
    }
    throw SolverError(msg.str());
  }
  s.set_coefficients(std::span<const double>(x.data(), n));
  return result;
}

// ---------------------------------------------------------------------------
// NeighbourGrid

NeighbourGrid::NeighbourGrid(std::span<const Point3> pts) : pts_(pts) {
  box_ = bounding_box(pts);
  const double area = std::max(box_.area(), 1e-300);
  const double target = std::max<double>(1.0, static_cast<double>(pts.size()) / 4.0);
  cell_ = std::sqrt(area / target);
  const double extent = std::max(box_.width(), box_.height());
  if (!(cell_ > 0.0)) cell_ = extent > 0.0 ? extent / target : 1.0;
  // Guard against strongly elongated sets.
  cell_ = std::max(cell_, extent / 4096.0);
  if (!(cell_ > 0.0)) cell_ = 1.0;
  nx_ = static_cast<std::size_t>(box_.width() / cell_) + 1;
  ny_ = static_cast<std::size_t>(box_.height() / cell_) + 1;
  std::vector<std::size_t> cell_of(pts.size());
  start_.assign(nx_ * ny_ + 1, 0);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto cx = std::min(nx_ - 1, static_cast<std::size_t>((pts[k].x - box_.umin) / cell_));
    const auto cy = std::min(ny_ - 1, static_cast<std::size_t>((pts[k].y - box_.vmin) / cell_));
    cell_of[k] = cy * nx_ + cx;
    ++start_[cell_of[k] + 1];
  }
  for (std::size_t c = 0; c < nx_ * ny_; ++c) start_[c + 1] += start_[c];
  order_.resize(pts.size());
  auto fill = start_;
  for (std::size_t k = 0; k < pts.size(); ++k) order_[fill[cell_of[k]]++] = k;
}

double NeighbourGrid::idw(double x, double y, int k) const {
  if (pts_.empty()) return 0.0;
  k = std::max(1, k);
  const auto clamp_cell = [](double t, std::size_t n) {
    if (!(t > 0.0)) return std::size_t{0};
    return std::min(n - 1, static_cast<std::size_t>(t));
  };
  const std::size_t cx = clamp_cell((x - box_.umin) / cell_, nx_);
  const std::size_t cy = clamp_cell((y - box_.vmin) / cell_, ny_);
  const double dx_out = std::max({0.0, box_.umin - x, x - box_.umax});
  const double dy_out = std::max({0.0, box_.vmin - y, y - box_.vmax});
  const double outside = std::hypot(dx_out, dy_out);

  // Max-heap of (squared distance, index) holding the k best candidates.
  std::priority_queue<std::pair<double, std::size_t>> best;
  const std::size_t max_ring = std::max(nx_, ny_);
  for (std::size_t r = 0; r <= max_ring; ++r) {
    const long x0 = static_cast<long>(cx) - static_cast<long>(r);
    const long x1 = static_cast<long>(cx) + static_cast<long>(r);
    const long y0 = static_cast<long>(cy) - static_cast<long>(r);
    const long y1 = static_cast<long>(cy) + static_cast<long>(r);
    for (long j = y0; j <= y1; ++j) {
      if (j < 0 || j >= static_cast<long>(ny_)) continue;
      for (long i = x0; i <= x1; ++i) {
        if (i < 0 || i >= static_cast<long>(nx_)) continue;
        if (j != y0 && j != y1 && i != x0 && i != x1) continue;
        const std::size_t c = static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(i);
        for (std::size_t q = start_[c]; q < start_[c + 1]; ++q) {
          const auto& p = pts_[order_[q]];
          const double d2 = (p.x - x) * (p.x - x) + (p.y - y) * (p.y - y);
          if (static_cast<int>(best.size()) < k) {
            best.emplace(d2, order_[q]);
          } else if (d2 < best.top().first) {
            best.pop();
            best.emplace(d2, order_[q]);
          }
        }
      }
    }
    if (static_cast<int>(best.size()) == k) {
      const double reach = static_cast<double>(r) * cell_ - outside;
      if (reach > 0.0 && reach * reach >= best.top().first) break;
    }
  }
  double num = 0.0;
  double den = 0.0;
  while (!best.empty()) {
    const auto [d2, i] = best.top();
    best.pop();
    if (d2 == 0.0) return pts_[i].z;
    num += pts_[i].z / d2;
    den += 1.0 / d2;
  }
  return num / den;
}

}  // namespace lrb
