#include "lrbathy/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "lrbathy/error.hpp"
#include "lrbathy/evaluate.hpp"
#include "lrbathy/parallel.hpp"

namespace lrb {

std::size_t TileGrid::core_tile(double x, double y) const {
  auto cell = [](const std::vector<double>& edges, double t) {
    const int n = static_cast<int>(edges.size()) - 1;
    const double step = (edges.back() - edges.front()) / n;
    int i = std::clamp(static_cast<int>(std::floor((t - edges.front()) / step)), 0, n - 1);
    while (i + 1 < n && t >= edges[i + 1]) ++i;
    while (i > 0 && t < edges[i]) --i;
    return i;
  };
  return index(cell(xs, x), cell(ys, y));
}

std::vector<std::size_t> TileGrid::expanded_tiles(double x, double y) const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    if (tiles[t].expanded.contains(x, y)) out.push_back(t);
  }
  return out;
}

TileGrid make_tiles(const Box& box, int nx, int ny, double overlap) {
  if (nx < 1 || ny < 1) throw InputError("tile counts must be at least 1");
  if (!(overlap >= 0.0)) throw InputError("tile overlap must be nonnegative");
  if (!(box.area() > 0.0)) throw InputError("tiling box is degenerate");
  TileGrid g;
  g.box = box;
  g.nx = nx;
  g.ny = ny;
  g.overlap = overlap;
  for (int i = 0; i <= nx; ++i) g.xs.push_back(i == nx ? box.umax : box.umin + box.width() * i / nx);
  for (int j = 0; j <= ny; ++j) g.ys.push_back(j == ny ? box.vmax : box.vmin + box.height() * j / ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      Tile t;
      t.ix = ix;
      t.iy = iy;
      t.core = {g.xs[ix], g.xs[ix + 1], g.ys[iy], g.ys[iy + 1]};
      t.expanded = intersect(t.core.expanded(overlap * t.core.width(), overlap * t.core.height()), box);
      g.tiles.push_back(t);
    }
  }
  return g;
}

TileSet fit_tiles(std::span<const Point3> pts, const TileGrid& grid, const FitConfig& cfg) {
  TileSet set;
  set.grid = grid;
  set.fits.resize(grid.tiles.size());
  std::vector<std::vector<Point3>> subsets(grid.tiles.size());
  for (const auto& p : pts) {
    for (std::size_t t : grid.expanded_tiles(p.x, p.y)) subsets[t].push_back(p);
  }
  parallel_chunks(
      grid.tiles.size(),
      [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
          TileFit& tf = set.fits[t];
          tf.points = subsets[t].size();
          FitConfig c = cfg;
          c.domain = grid.tiles[t].expanded;
          try {
            FitResult r = fit(subsets[t], c);
            r.surface.restrict_to(grid.tiles[t].core);
            tf.surface = std::move(r.surface);
            tf.reports = std::move(r.reports);
            tf.frozen_elements = r.frozen_elements;
          } catch (const InputError& err) {
            tf.note = std::string("hole: ") + err.what();
          }
        }
      },
      1);
  return set;
}

std::vector<TileEdge> tile_edges(const TileSet& set) {
  const TileGrid& g = set.grid;
  std::vector<TileEdge> out;
  auto usable = [&](std::size_t t) { return set.fits[t].surface.has_value(); };
  for (int iy = 0; iy < g.ny; ++iy) {
    for (int ix = 0; ix + 1 < g.nx; ++ix) {
      const std::size_t a = g.index(ix, iy);
      const std::size_t b = g.index(ix + 1, iy);
      if (usable(a) && usable(b)) out.push_back({a, b, true, g.xs[ix + 1], g.ys[iy], g.ys[iy + 1]});
    }
  }
  for (int iy = 0; iy + 1 < g.ny; ++iy) {
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t a = g.index(ix, iy);
      const std::size_t b = g.index(ix, iy + 1);
      if (usable(a) && usable(b)) out.push_back({a, b, false, g.ys[iy + 1], g.xs[ix], g.xs[ix + 1]});
    }
  }
  return out;
}

namespace {

// One side of an edge: the surface and where its boundary line lies.
struct Side {
  LRSurface* surface;
  Direction dir;  // direction of the boundary line
  bool low;       // the boundary is the surface's max edge
  double boundary;
  double along_lo;
  double along_hi;

  // Coordinate `k` strip steps into the surface from the boundary.
  double inward(double k, double h) const { return low ? boundary - k * h : boundary + k * h; }
};

Side make_side(TileSet& set, const TileEdge& e, bool low) {
  LRSurface& s = *set.fits[low ? e.low : e.high].surface;
  const Box& d = s.domain();
  Side side{&s, e.vertical ? Direction::ConstU : Direction::ConstV, low, 0.0, 0.0, 0.0};
  if (e.vertical) {
    side.boundary = low ? d.umax : d.umin;
    side.along_lo = d.vmin;
    side.along_hi = d.vmax;
  } else {
    side.boundary = low ? d.vmax : d.vmin;
    side.along_lo = d.umin;
    side.along_hi = d.umax;
  }
  return side;
}

double nearest_line_gap(const Side& s) {
  double gap = INFINITY;
  const double eps = 1e-12 * std::max(1.0, std::abs(s.boundary));
  for (double c : s.surface->mesh().coordinates(s.dir)) {
    const double g = std::abs(c - s.boundary);
    if (g > eps) gap = std::min(gap, g);
  }
  return gap;
}

// Lines across the boundary strip, with their largest multiplicity there.
void strip_crossings(const Side& s, double width, std::map<double, int>& out) {
  const double lo = s.low ? s.boundary - width : s.boundary;
  const double hi = s.low ? s.boundary : s.boundary + width;
  for (const auto& [value, profile] : s.surface->mesh().lines(orthogonal(s.dir))) {
    if (value <= s.along_lo || value >= s.along_hi) continue;
    for (const auto& part : profile.parts()) {
      if (part.start < hi && part.stop > lo) {
        int& m = out[value];
        m = std::max(m, part.multiplicity);
      }
    }
  }
}

// Boundary rows: 0 carries the boundary knot degree+1 times, 1 carries it degree times.
struct RowEntry {
  std::size_t index;
  double inner;  // nearest knot off the boundary
};

std::map<std::vector<double>, RowEntry> boundary_row(const Side& s, int row) {
  std::map<std::vector<double>, RowEntry> out;
  const int deg = s.surface->degree(s.dir);
  const auto& bs = s.surface->bsplines();
  for (std::size_t i = 0; i < bs.size(); ++i) {
    const auto& t = bs[i].knots(s.dir);
    const long count = std::count(t.begin(), t.end(), s.boundary);
    if (count != deg + 1 - row) continue;
    const bool at_end = s.low ? t.back() == s.boundary : t.front() == s.boundary;
    if (!at_end) continue;
    const double inner = s.low ? t[static_cast<std::size_t>(row)] : t[t.size() - 1 - static_cast<std::size_t>(row)];
    out.emplace(bs[i].knots(orthogonal(s.dir)), RowEntry{i, inner});
  }
  return out;
}

std::vector<double> support_weights(const LRSurface& s, std::span<const Point3> pts) {
  std::vector<double> w(s.size(), 1.0);
  if (pts.empty()) return w;
  const auto topo = s.topology();
  const Box& d = s.domain();
  for (const auto& p : pts) {
    if (!d.contains(p.x, p.y)) continue;
    const std::size_t e = topo->locate(p.x, p.y);
    if (e == kNoElement) continue;
    for (std::size_t b : topo->elements[e].resident) w[b] += 1.0;
  }
  return w;
}

struct Term {
  std::size_t var;
  double coef;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

StitchReport stitch(TileSet& set, Continuity c, std::span<const Point3> pts) {
  StitchReport rep;
  const auto edges = tile_edges(set);
  if (edges.empty()) return rep;
  for (const auto& e : edges) {
    const LRSurface& a = *set.fits[e.low].surface;
    const LRSurface& b = *set.fits[e.high].surface;
    if (a.degree_u() != b.degree_u() || a.degree_v() != b.degree_v()) {
      throw InputError("cannot stitch tiles with different polynomial degrees");
    }
  }
  const int rows = c == Continuity::C1 ? 2 : 1;

  double gap = INFINITY;
  for (const auto& e : edges) {
    gap = std::min(gap, nearest_line_gap(make_side(set, e, true)));
    gap = std::min(gap, nearest_line_gap(make_side(set, e, false)));
  }
  if (!std::isfinite(gap)) throw SolverError("no knot lines next to the tile boundaries");
  const double h = gap / 3.0;
  rep.strip_width = h;

  // Full lines parallel to each boundary give every side a strip of `rows`
  // knot spans of width h.
  for (const auto& e : edges) {
    for (bool low : {true, false}) {
      const Side s = make_side(set, e, low);
      std::vector<Segment> lines;
      for (int k = 1; k <= rows; ++k) lines.push_back({s.dir, s.inward(k, h), s.along_lo, s.along_hi, 1});
      s.surface->insert_segments(lines);
    }
  }

  // Extend every line crossing a strip over the strips on both sides until
  // the boundary knot vectors agree.
  for (bool changed = true; changed;) {
    if (++rep.unification_passes > 32) throw SolverError("boundary knot unification did not converge");
    changed = false;
    for (const auto& e : edges) {
      const Side sa = make_side(set, e, true);
      const Side sb = make_side(set, e, false);
      std::map<double, int> cross;
      strip_crossings(sa, rows * h, cross);
      strip_crossings(sb, rows * h, cross);
      for (const Side& s : {sa, sb}) {
        std::vector<Segment> segs;
        const double lo = std::min(s.boundary, s.inward(rows, h));
        const double hi = std::max(s.boundary, s.inward(rows, h));
        for (const auto& [value, mult] : cross) segs.push_back({orthogonal(s.dir), value, lo, hi, mult});
        changed |= s.surface->insert_segments(segs).mesh_changed;
      }
    }
  }

  // Constraints on the scaled coefficients c = s * P of the boundary rows.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> var_of;
  std::vector<std::pair<std::size_t, std::size_t>> vars;
  auto var = [&](std::size_t tile, std::size_t b) {
    auto [it, inserted] = var_of.emplace(std::make_pair(tile, b), vars.size());
    if (inserted) vars.emplace_back(tile, b);
    return it->second;
  };
  std::vector<std::vector<Term>> constraints;
  for (const auto& e : edges) {
    const Side sa = make_side(set, e, true);
    const Side sb = make_side(set, e, false);
    const auto a0 = boundary_row(sa, 0);
    const auto b0 = boundary_row(sb, 0);
    if (a0.size() != b0.size()) throw SolverError("boundary knot vectors of neighbouring tiles do not match");
    const auto a1 = rows > 1 ? boundary_row(sa, 1) : decltype(a0){};
    const auto b1 = rows > 1 ? boundary_row(sb, 1) : decltype(b0){};
    for (const auto& [key, ra] : a0) {
      const auto it = b0.find(key);
      if (it == b0.end()) throw SolverError("boundary knot vectors of neighbouring tiles do not match");
      const RowEntry& rb = it->second;
      const std::size_t va0 = var(e.low, ra.index);
      const std::size_t vb0 = var(e.high, rb.index);
      constraints.push_back({{va0, 1.0}, {vb0, -1.0}});
      if (rows < 2) continue;
      const auto ia = a1.find(key);
      const auto ib = b1.find(key);
      if (ia == a1.end() || ib == b1.end() || ia->second.inner != ra.inner || ib->second.inner != rb.inner) {
        throw SolverError("no local tensor-product strip along a tile boundary");
      }
      const double ga = 1.0 / (sa.boundary - ra.inner);
      const double gb = 1.0 / (rb.inner - sb.boundary);
      const std::size_t va1 = var(e.low, ia->second.index);
      const std::size_t vb1 = var(e.high, ib->second.index);
      // (c0a - c1a) / (X - qa) = (c1b - c0b) / (qb - X)
      constraints.push_back({{va0, ga}, {va1, -ga}, {vb1, -gb}, {vb0, gb}});
    }
  }
  rep.constraints = constraints.size();

  std::vector<std::vector<double>> weights(set.fits.size());
  std::vector<double> w(vars.size()), c0(vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto [t, b] = vars[i];
    if (weights[t].empty()) weights[t] = support_weights(*set.fits[t].surface, pts);
    const auto& bs = set.fits[t].surface->bsplines()[b];
    w[i] = weights[t][b];
    c0[i] = bs.scaling * bs.coefficient;
  }

  std::vector<std::size_t> parent(vars.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& row : constraints) {
    for (const auto& term : row) parent[find_root(parent, term.var)] = find_root(parent, row.front().var);
  }
  std::map<std::size_t, std::vector<std::size_t>> comp_rows;
  for (std::size_t r = 0; r < constraints.size(); ++r) comp_rows[find_root(parent, constraints[r].front().var)].push_back(r);

  std::vector<double> result = c0;
  std::vector<std::size_t> local(vars.size());
  for (const auto& [root, rows_of] : comp_rows) {
    std::vector<std::size_t> members;
    for (std::size_t r : rows_of) {
      for (const auto& term : constraints[r]) members.push_back(term.var);
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (std::size_t k = 0; k < members.size(); ++k) local[members[k]] = k;

    const auto m = static_cast<Eigen::Index>(members.size());
    const auto nr = static_cast<Eigen::Index>(rows_of.size());
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nr, m);
    for (Eigen::Index r = 0; r < nr; ++r) {
      for (const auto& term : constraints[rows_of[static_cast<std::size_t>(r)]]) {
        C(r, static_cast<Eigen::Index>(local[term.var])) += term.coef;
      }
    }
    Eigen::VectorXd x0(m), winv(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      x0(k) = c0[members[static_cast<std::size_t>(k)]];
      winv(k) = 1.0 / w[members[static_cast<std::size_t>(k)]];
    }
    // Least weighted change: x = x0 - W^-1 C^T (C W^-1 C^T)^+ C x0.
    const Eigen::MatrixXd CW = C * winv.asDiagonal();
    const Eigen::MatrixXd M = CW * C.transpose();
    const Eigen::VectorXd lambda = M.completeOrthogonalDecomposition().solve(C * x0);
    const Eigen::VectorXd x = x0 - CW.transpose() * lambda;
    for (Eigen::Index k = 0; k < m; ++k) result[members[static_cast<std::size_t>(k)]] = x(k);
  }

  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (result[i] == c0[i]) continue;
    ++rep.adjusted_coefficients;
    set.fits[vars[i].first].surface->set_scaled_coefficient(vars[i].second, result[i]);
  }
  return rep;
}

EdgeJump measure_edge(const TileSet& set, const TileEdge& e, int samples) {
  if (samples < 2) throw InputError("edge sampling needs at least two samples");
  const LRSurface& a = *set.fits[e.low].surface;
  const LRSurface& b = *set.fits[e.high].surface;
  const double xa = e.vertical ? a.domain().umax : a.domain().vmax;
  const double xb = e.vertical ? b.domain().umin : b.domain().vmin;
  EdgeJump j;
  for (int k = 0; k < samples; ++k) {
    const double s = k + 1 == samples ? e.stop : e.start + (e.stop - e.start) * k / (samples - 1);
    const Partials pa = e.vertical ? evaluate(a, xa, s, 1) : evaluate(a, s, xa, 1);
    const Partials pb = e.vertical ? evaluate(b, xb, s, 1) : evaluate(b, s, xb, 1);
    const double da = e.vertical ? pa(1, 0) : pa(0, 1);
    const double db = e.vertical ? pb(1, 0) : pb(0, 1);
    j.value = std::max(j.value, std::abs(pa.value() - pb.value()));
    j.derivative = std::max(j.derivative, std::abs(da - db));
    j.derivative_scale = std::max({j.derivative_scale, std::abs(da), std::abs(db)});
  }
  return j;
}

}  // namespace lrb
