#include "lrbathy/lr_surface.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "lrbathy/error.hpp"

namespace lrb {

namespace {

// Splits `b` by inserting knot k into its knot vector of direction d. The
// parent equals alpha1 * N[first d+2 knots] + alpha2 * N[last d+2 knots].
std::pair<ScaledBSpline, ScaledBSpline> split_bspline(const ScaledBSpline& b, Direction dir, double k) {
  const auto& t = b.knots(dir);
  const int d = static_cast<int>(t.size()) - 2;
  std::vector<double> tt(t);
  tt.insert(std::upper_bound(tt.begin(), tt.end(), k), k);

  const double a1 = k < t[d] ? (k - t[0]) / (t[d] - t[0]) : 1.0;
  const double a2 = k > t[1] ? (t[d + 1] - k) / (t[d + 1] - t[1]) : 1.0;

  ScaledBSpline c1 = b;
  ScaledBSpline c2 = b;
  std::vector<double> k1(tt.begin(), tt.begin() + d + 2);
  std::vector<double> k2(tt.begin() + 1, tt.end());
  if (dir == Direction::ConstU) {
    c1.knots_u = std::move(k1);
    c2.knots_u = std::move(k2);
  } else {
    c1.knots_v = std::move(k1);
    c2.knots_v = std::move(k2);
  }
  c1.scaling = b.scaling * a1;
  c2.scaling = b.scaling * a2;
  return {std::move(c1), std::move(c2)};
}

std::vector<double> open_knots(double lo, double hi, int degree, std::span<const double> interior) {
  std::vector<double> k(degree + 1, lo);
  k.insert(k.end(), interior.begin(), interior.end());
  k.insert(k.end(), degree + 1, hi);
  return k;
}

}  // namespace

// ---------------------------------------------------------------------------
// Topology

std::shared_ptr<const Topology> Topology::build(const BoxMesh& mesh,
                                                const std::vector<ScaledBSpline>& bsplines) {
  auto t = std::make_shared<Topology>();
  t->domain_ = mesh.domain();
  const auto& boxes = mesh.elements();
  t->elements.resize(boxes.size());
  for (std::size_t i = 0; i < boxes.size(); ++i) t->elements[i].box = boxes[i];

  auto& cols = t->columns_;
  cols.reserve(2 * boxes.size());
  for (const auto& b : boxes) {
    cols.push_back(b.umin);
    cols.push_back(b.umax);
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());

  auto col_index = [&cols](double u) {
    return static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), u) - cols.begin());
  };

  t->by_column_.assign(cols.size() > 0 ? cols.size() - 1 : 0, {});
  for (std::size_t e = 0; e < boxes.size(); ++e) {
    const std::size_t c0 = col_index(boxes[e].umin);
    const std::size_t c1 = col_index(boxes[e].umax);
    for (std::size_t c = c0; c < c1; ++c) t->by_column_[c].push_back(static_cast<std::uint32_t>(e));
  }
  for (auto& col : t->by_column_) {
    std::sort(col.begin(), col.end(),
              [&boxes](std::uint32_t a, std::uint32_t b) { return boxes[a].vmin < boxes[b].vmin; });
  }

  t->bspline_elements.resize(bsplines.size());
  std::vector<std::size_t> stamp(boxes.size(), kNoElement);
  for (std::size_t bi = 0; bi < bsplines.size(); ++bi) {
    const Box s = bsplines[bi].support();
    const std::size_t c0 = col_index(s.umin);
    const std::size_t c1 = col_index(s.umax);
    auto& list = t->bspline_elements[bi];
    for (std::size_t c = c0; c < c1 && c < t->by_column_.size(); ++c) {
      const auto& col = t->by_column_[c];
      auto it = std::partition_point(col.begin(), col.end(),
                                     [&](std::uint32_t e) { return boxes[e].vmin < s.vmin; });
      for (; it != col.end() && boxes[*it].vmax <= s.vmax; ++it) {
        if (stamp[*it] != bi) {
          stamp[*it] = bi;
          list.push_back(*it);
        }
      }
    }
    std::sort(list.begin(), list.end());
    for (std::size_t e : list) t->elements[e].resident.push_back(bi);
  }
  return t;
}

std::size_t Topology::locate(double u, double v) const {
  if (!domain_.contains(u, v) || by_column_.empty()) return kNoElement;
  auto it = std::lower_bound(columns_.begin(), columns_.end(), u);
  std::size_t c = static_cast<std::size_t>(it - columns_.begin());
  c = c == 0 ? 0 : c - 1;
  c = std::min(c, by_column_.size() - 1);
  const auto& col = by_column_[c];
  auto e = std::partition_point(col.begin(), col.end(),
                                [&](std::uint32_t i) { return elements[i].box.vmax < v; });
  if (e == col.end()) return kNoElement;
  return *e;
}

// ---------------------------------------------------------------------------
// LRSurface

LRSurface::LRSurface(const LRSurface& o)
    : mesh_(o.mesh_), bsplines_(o.bsplines_), index_(o.index_), units_(o.units_) {
  std::lock_guard lock(o.cache_mutex_);
  topology_ = o.topology_;
}

LRSurface& LRSurface::operator=(const LRSurface& o) {
  if (this == &o) return *this;
  mesh_ = o.mesh_;
  bsplines_ = o.bsplines_;
  index_ = o.index_;
  units_ = o.units_;
  std::scoped_lock lock(cache_mutex_, o.cache_mutex_);
  topology_ = o.topology_;
  return *this;
}

LRSurface::LRSurface(LRSurface&& o) noexcept
    : mesh_(std::move(o.mesh_)),
      bsplines_(std::move(o.bsplines_)),
      index_(std::move(o.index_)),
      units_(std::move(o.units_)),
      topology_(std::move(o.topology_)) {}

LRSurface& LRSurface::operator=(LRSurface&& o) noexcept {
  mesh_ = std::move(o.mesh_);
  bsplines_ = std::move(o.bsplines_);
  index_ = std::move(o.index_);
  units_ = std::move(o.units_);
  topology_ = std::move(o.topology_);
  return *this;
}

LRSurface::~LRSurface() = default;

LRSurface LRSurface::tensor_product(const Box& domain, int degree_u, int degree_v, int n_coef_u,
                                    int n_coef_v, double value) {
  if (n_coef_u < degree_u + 1 || n_coef_v < degree_v + 1) {
    throw InputError("tensor grid needs at least degree+1 coefficients per direction");
  }
  std::vector<double> iu;
  std::vector<double> iv;
  const int nu = n_coef_u - degree_u - 1;
  const int nv = n_coef_v - degree_v - 1;
  for (int k = 1; k <= nu; ++k) iu.push_back(domain.umin + domain.width() * k / (nu + 1));
  for (int k = 1; k <= nv; ++k) iv.push_back(domain.vmin + domain.height() * k / (nv + 1));
  return tensor_product(domain, degree_u, degree_v, iu, iv, value);
}

LRSurface LRSurface::tensor_product(const Box& domain, int degree_u, int degree_v,
                                    std::span<const double> interior_u,
                                    std::span<const double> interior_v, double value) {
  if (degree_u < 1 || degree_v < 1 || degree_u > 5 || degree_v > 5) {
    throw InputError("degrees must lie in [1, 5]");
  }
  LRSurface s;
  s.mesh_ = BoxMesh(domain, degree_u, degree_v);
  for (double u : interior_u) {
    s.mesh_.insert(s.mesh_.normalize({Direction::ConstU, u, domain.vmin, domain.vmax, 1}));
  }
  for (double v : interior_v) {
    s.mesh_.insert(s.mesh_.normalize({Direction::ConstV, v, domain.umin, domain.umax, 1}));
  }
  const auto ku = open_knots(domain.umin, domain.umax, degree_u, interior_u);
  const auto kv = open_knots(domain.vmin, domain.vmax, degree_v, interior_v);
  const std::size_t nu = ku.size() - degree_u - 1;
  const std::size_t nv = kv.size() - degree_v - 1;
  for (std::size_t j = 0; j < nv; ++j) {
    for (std::size_t i = 0; i < nu; ++i) {
      ScaledBSpline b;
      b.knots_u.assign(ku.begin() + i, ku.begin() + i + degree_u + 2);
      b.knots_v.assign(kv.begin() + j, kv.begin() + j + degree_v + 2);
      b.coefficient = value;
      b.scaling = 1.0;
      s.bsplines_.push_back(std::move(b));
    }
  }
  s.rebuild_index();
  return s;
}

LRSurface LRSurface::from_parts(BoxMesh mesh, std::vector<ScaledBSpline> bsplines, UnitTags units) {
  LRSurface s;
  s.mesh_ = std::move(mesh);
  s.bsplines_ = std::move(bsplines);
  s.units_ = std::move(units);
  for (const auto& b : s.bsplines_) {
    if (static_cast<int>(b.knots_u.size()) != s.degree_u() + 2 ||
        static_cast<int>(b.knots_v.size()) != s.degree_v() + 2) {
      throw InputError("B-spline knot vector length does not match the degree");
    }
  }
  s.rebuild_index();
  return s;
}

std::vector<double> LRSurface::coefficients() const {
  std::vector<double> p(bsplines_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = bsplines_[i].coefficient;
  return p;
}

void LRSurface::set_coefficients(std::span<const double> p) {
  if (p.size() != bsplines_.size()) throw InputError("coefficient count mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) bsplines_[i].coefficient = p[i];
}

void LRSurface::set_scaled_coefficient(std::size_t i, double c) {
  bsplines_[i].coefficient = c / bsplines_[i].scaling;
}

void LRSurface::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < bsplines_.size(); ++i) {
    // Duplicates are kept out of the index; validate() reports them.
    index_.emplace(Key{bsplines_[i].knots_u, bsplines_[i].knots_v}, i);
  }
  invalidate();
}

void LRSurface::invalidate() {
  std::lock_guard lock(cache_mutex_);
  topology_.reset();
}

std::shared_ptr<const Topology> LRSurface::topology() const {
  std::lock_guard lock(cache_mutex_);
  if (!topology_) topology_ = Topology::build(mesh_, bsplines_);
  return topology_;
}

std::size_t LRSurface::find(const std::vector<double>& ku, const std::vector<double>& kv) const {
  auto it = index_.find(Key{ku, kv});
  return it == index_.end() ? static_cast<std::size_t>(-1) : it->second;
}

bool LRSurface::needs_split(const ScaledBSpline& b, Direction& dir, double& at) const {
  for (Direction d : {Direction::ConstU, Direction::ConstV}) {
    const auto& t = b.knots(d);
    const auto& o = b.knots(orthogonal(d));
    const auto& lines = mesh_.lines(d);
    for (auto it = lines.upper_bound(t.front()); it != lines.end() && it->first < t.back(); ++it) {
      const int m = it->second.coverage(o.front(), o.back());
      if (m == 0) continue;
      const auto cnt = std::count(t.begin(), t.end(), it->first);
      if (m > cnt) {
        dir = d;
        at = it->first;
        return true;
      }
    }
  }
  return false;
}

InsertStats LRSurface::split_closure() {
  InsertStats st;
  std::deque<std::size_t> work;
  for (std::size_t i = 0; i < bsplines_.size(); ++i) work.push_back(i);
  std::vector<char> dead(bsplines_.size(), 0);

  while (!work.empty()) {
    const std::size_t i = work.front();
    work.pop_front();
    if (dead[i]) continue;
    Direction dir{};
    double at = 0.0;
    if (!needs_split(bsplines_[i], dir, at)) continue;

    const ScaledBSpline parent = bsplines_[i];
    dead[i] = 1;
    index_.erase(Key{parent.knots_u, parent.knots_v});
    auto [c1, c2] = split_bspline(parent, dir, at);
    ++st.splits;
    for (ScaledBSpline* c : {&c1, &c2}) {
      Key k{c->knots_u, c->knots_v};
      auto it = index_.find(k);
      if (it != index_.end()) {
        ScaledBSpline& e = bsplines_[it->second];
        const double s = e.scaling + c->scaling;
        e.coefficient = (e.scaling * e.coefficient + c->scaling * c->coefficient) / s;
        e.scaling = s;
        ++st.merges;
      } else {
        const std::size_t ni = bsplines_.size();
        bsplines_.push_back(std::move(*c));
        dead.push_back(0);
        index_.emplace(std::move(k), ni);
        work.push_back(ni);
      }
    }
  }

  if (st.splits > 0) {
    std::vector<ScaledBSpline> kept;
    kept.reserve(bsplines_.size());
    for (std::size_t i = 0; i < bsplines_.size(); ++i) {
      if (!dead[i]) kept.push_back(std::move(bsplines_[i]));
    }
    bsplines_ = std::move(kept);
    rebuild_index();
  }
  return st;
}

InsertStats LRSurface::insert_segment(const Segment& s) {
  const Segment n = mesh_.normalize(s);
  if (mesh_.contains(n)) return {};
  BoxMesh backup = mesh_;
  mesh_.insert(n);
  InsertStats st = split_closure();
  if (st.splits == 0) {
    mesh_ = std::move(backup);
    std::ostringstream msg;
    msg << "segment " << (n.dir == Direction::ConstU ? "u=" : "v=") << n.value << " [" << n.start
        << ", " << n.stop << "] spans no B-spline support";
    throw RefinementError(msg.str());
  }
  st.mesh_changed = true;
  invalidate();
  return st;
}

InsertStats LRSurface::insert_segments(std::span<const Segment> segs) {
  bool changed = false;
  for (const auto& s : segs) {
    const Segment n = mesh_.normalize(s);
    if (mesh_.contains(n)) continue;
    changed |= mesh_.insert(n);
  }
  if (!changed) return {};
  InsertStats st = split_closure();
  st.mesh_changed = true;
  invalidate();
  return st;
}

void LRSurface::restrict_to(const Box& box) {
  const Box& dom = domain();
  if (!dom.contains(box) || !(box.area() > 0.0)) {
    throw InputError("restriction box must lie inside the surface domain");
  }
  std::vector<Segment> cuts;
  if (box.umin > dom.umin) cuts.push_back({Direction::ConstU, box.umin, dom.vmin, dom.vmax, degree_u() + 1});
  if (box.umax < dom.umax) cuts.push_back({Direction::ConstU, box.umax, dom.vmin, dom.vmax, degree_u() + 1});
  if (box.vmin > dom.vmin) cuts.push_back({Direction::ConstV, box.vmin, dom.umin, dom.umax, degree_v() + 1});
  if (box.vmax < dom.vmax) cuts.push_back({Direction::ConstV, box.vmax, dom.umin, dom.umax, degree_v() + 1});
  insert_segments(cuts);

  const Box snapped{mesh_.snap(Direction::ConstU, box.umin), mesh_.snap(Direction::ConstU, box.umax),
                    mesh_.snap(Direction::ConstV, box.vmin), mesh_.snap(Direction::ConstV, box.vmax)};
  std::vector<ScaledBSpline> kept;
  for (auto& b : bsplines_) {
    if (snapped.contains(b.support())) kept.push_back(std::move(b));
  }
  bsplines_ = std::move(kept);
  mesh_.restrict_to(snapped);
  rebuild_index();
}

std::string LRSurface::validate() const {
  std::ostringstream err;
  if (index_.size() != bsplines_.size()) err << "duplicate B-splines present; ";
  for (std::size_t i = 0; i < bsplines_.size(); ++i) {
    const auto& b = bsplines_[i];
    if (!(b.scaling > 0.0)) err << "B-spline " << i << " has non-positive scaling; ";
    if (!(b.support().area() > 0.0)) err << "B-spline " << i << " has empty support; ";
    for (Direction d : {Direction::ConstU, Direction::ConstV}) {
      const auto& t = b.knots(d);
      const auto& o = b.knots(orthogonal(d));
      if (!std::is_sorted(t.begin(), t.end())) err << "B-spline " << i << " knots unsorted; ";
      for (double k : t) {
        const bool interior = k > t.front() && k < t.back();
        const long need = interior ? std::count(t.begin(), t.end(), k) : 1;
        if (mesh_.traversal_multiplicity(d, k, o.front(), o.back()) < need) {
          err << "B-spline " << i << " knot " << k << " not carried by a traversing line; ";
          break;
        }
      }
    }
    Direction dd{};
    double at = 0.0;
    if (needs_split(b, dd, at)) err << "B-spline " << i << " is traversed by an unsplit line at " << at << "; ";
  }
  return err.str();
}

}  // namespace lrb
