#include "lrbathy/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "lrbathy/error.hpp"
#include "lrbathy/io.hpp"
#include "lrbathy/mba.hpp"

namespace lrb {

namespace {

// Knot span of t to split for a B-spline: the span containing the support
// midpoint. On a tie with a knot the longer neighbour wins, then the lower one.
std::pair<double, double> span_to_split(const std::vector<double>& t) {
  const double mid = 0.5 * (t.front() + t.back());
  std::vector<std::pair<double, double>> spans;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) {
    if (t[j] < t[j + 1]) spans.emplace_back(t[j], t[j + 1]);
  }
  for (std::size_t j = 0; j < spans.size(); ++j) {
    const auto [a, b] = spans[j];
    if (a < mid && mid < b) return spans[j];
    if (mid == b && j + 1 < spans.size()) {
      const auto& next = spans[j + 1];
      return (next.second - next.first) > (b - a) ? next : spans[j];
    }
  }
  return spans.front();
}

double element_width_ratio(const Topology& topo) {
  double lo = INFINITY;
  double hi = 0.0;
  for (const auto& e : topo.elements) {
    const double w = std::min(e.box.width(), e.box.height());
    lo = std::min(lo, w);
    hi = std::max(hi, std::max(e.box.width(), e.box.height()));
  }
  return lo > 0.0 ? hi / lo : INFINITY;
}

}  // namespace

std::string to_string(Approximation a) { return a == Approximation::LeastSquares ? "ls" : "mba"; }

void check_fit_input(std::span<const Point3> pts) {
  if (pts.empty()) throw InputError("no points to approximate");
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  const double tr = sxx + syy;
  if (!(tr > 0.0) || sxx * syy - sxy * sxy <= 1e-12 * tr * tr) {
    throw InputError("the x,y coordinates of the points are collinear; the domain is degenerate");
  }
}

IterationReport make_report(int iteration, const LRSurface& s, const DistanceField& f) {
  IterationReport r;
  r.iteration = iteration;
  r.file_size = binary_size(s);
  r.coefficients = s.size();
  r.max_distance = f.max_abs();
  r.average_distance = f.mean_abs();
  r.out_of_tolerance = f.out_of_tolerance();
  return r;
}

RefineResult plan_refinement(const LRSurface& s, const DistanceField& field, const FitConfig& cfg) {
  RefineResult res;
  auto topo = s.topology();
  const auto acc = element_accuracy(field);
  const Box& dom = s.domain();
  const double floor_u = dom.width() / std::ldexp(1.0, cfg.min_width_exponent);
  const double floor_v = dom.height() / std::ldexp(1.0, cfg.min_width_exponent);

  std::set<std::tuple<int, double, double, double>> requested;
  std::vector<char> frozen(topo->elements.size(), 0);

  for (std::size_t b = 0; b < s.size(); ++b) {
    std::size_t out = 0;
    for (std::size_t e : topo->bspline_elements[b]) out += acc[e].out_count;
    if (out == 0) continue;

    const auto& bs = s.bsplines()[b];
    const Box sup = bs.support();
    const double w = sup.width();
    const double h = sup.height();
    std::vector<Direction> dirs;
    if (std::max(w, h) < cfg.aspect_threshold * std::min(w, h)) {
      dirs = {Direction::ConstU, Direction::ConstV};
    } else {
      dirs = {w > h ? Direction::ConstU : Direction::ConstV};
    }

    auto try_split = [&](Direction d) {
      const auto [a, c] = span_to_split(bs.knots(d));
      const double floor = d == Direction::ConstU ? floor_u : floor_v;
      if (c - a < 2.0 * floor) return false;
      const auto& o = bs.knots(orthogonal(d));
      requested.emplace(static_cast<int>(d), 0.5 * (a + c), o.front(), o.back());
      return true;
    };

    bool any = false;
    for (Direction d : dirs) any |= try_split(d);
    if (!any && dirs.size() == 1) any = try_split(orthogonal(dirs[0]));
    if (!any) {
      for (std::size_t e : topo->bspline_elements[b]) {
        if (acc[e].out_count > 0) frozen[e] = 1;
      }
    }
  }

  for (const auto& [d, value, lo, hi] : requested) {
    res.segments.push_back({static_cast<Direction>(d), value, lo, hi, 1});
  }
  res.frozen_elements = static_cast<std::size_t>(std::count(frozen.begin(), frozen.end(), 1));
  return res;
}

RefineResult refine_step(LRSurface& s, const DistanceField& field, const FitConfig& cfg) {
  RefineResult res = plan_refinement(s, field, cfg);
  if (!res.segments.empty()) s.insert_segments(res.segments);
  return res;
}

FitResult fit(std::span<const Point3> pts, const FitConfig& cfg) {
  check_fit_input(pts);
  if (!(cfg.tolerance > 0.0)) throw InputError("tolerance must be positive");
  if (cfg.max_iterations < 0) throw InputError("max_iterations must be nonnegative");
  const Box domain = cfg.domain.value_or(bounding_box(pts));
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0)) throw InputError("fit domain is degenerate");

  FitResult out;
  out.surface = LRSurface::tensor_product(domain, cfg.degree_u, cfg.degree_v, cfg.initial_coefficients_u,
                                          cfg.initial_coefficients_v, 0.0);
  LRSurface& s = out.surface;
  const auto min_points = static_cast<std::size_t>((cfg.degree_u + 1) * (cfg.degree_v + 1));
  if (pts.size() < min_points) {
    out.warnings.push_back("only " + std::to_string(pts.size()) + " points; at least " + std::to_string(min_points) +
                           " are recommended, the fit is dominated by smoothing and ghost points");
  }

  fit_least_squares(s, pts, cfg.least_squares, GhostSource::InverseDistance);
  DistanceField f = distance_field(s, pts, cfg.tolerance);
  out.outside_points = f.outside;
  out.reports.push_back(make_report(0, s, f));
  out.methods.push_back(Approximation::LeastSquares);

  bool use_mba = false;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (f.out_of_tolerance() == 0) break;
    const RefineResult r = refine_step(s, f, cfg);
    out.frozen_elements = r.frozen_elements;
    if (r.segments.empty()) break;

    if (it >= cfg.ls_iterations) use_mba = true;
    if (cfg.auto_switch && element_width_ratio(*s.topology()) > cfg.auto_switch_ratio) use_mba = true;

    if (use_mba) {
      const auto field = distance_field(s, pts, cfg.tolerance);
      mba_update(s, pts, field, cfg.tolerance);
      out.methods.push_back(Approximation::Mba);
    } else {
      fit_least_squares(s, pts, cfg.least_squares, GhostSource::CurrentSurface);
      out.methods.push_back(Approximation::LeastSquares);
    }
    f = distance_field(s, pts, cfg.tolerance);
    out.reports.push_back(make_report(it, s, f));
  }
  if (f.out_of_tolerance() > 0) out.frozen_elements = plan_refinement(s, f, cfg).frozen_elements;
  return out;
}

}  // namespace lrb
