#include "lrbathy/mesh.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>

#include "lrbathy/error.hpp"

namespace lrb {

// ---------------------------------------------------------------------------
// LineProfile

bool LineProfile::insert(double start, double stop, int mult) {
  if (!(start < stop) || mult <= 0) return false;

  std::vector<double> cuts{start, stop};
  for (const auto& p : parts_) {
    cuts.push_back(p.start);
    cuts.push_back(p.stop);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<LinePart> next;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    int m = 0;
    for (const auto& p : parts_) {
      if (p.start <= a && b <= p.stop) {
        m = p.multiplicity;
        break;
      }
    }
    if (start <= a && b <= stop) m = std::max(m, mult);
    if (m == 0) continue;
    if (!next.empty() && next.back().stop == a && next.back().multiplicity == m) {
      next.back().stop = b;
    } else {
      next.push_back({a, b, m});
    }
  }

  const bool changed =
      next.size() != parts_.size() ||
      !std::equal(next.begin(), next.end(), parts_.begin(), [](const LinePart& x, const LinePart& y) {
        return x.start == y.start && x.stop == y.stop && x.multiplicity == y.multiplicity;
      });
  parts_ = std::move(next);
  return changed;
}

int LineProfile::coverage(double lo, double hi) const {
  if (lo == hi) return multiplicity_at(lo);
  double cur = lo;
  int m = INT_MAX;
  for (const auto& p : parts_) {
    if (p.stop <= cur) continue;
    if (p.start > cur) return 0;
    m = std::min(m, p.multiplicity);
    cur = p.stop;
    if (cur >= hi) break;
  }
  return cur >= hi ? m : 0;
}

int LineProfile::multiplicity_at(double s) const {
  int m = 0;
  for (const auto& p : parts_) {
    if (p.start <= s && s <= p.stop) m = std::max(m, p.multiplicity);
  }
  return m;
}

void LineProfile::clip(double lo, double hi) {
  std::vector<LinePart> next;
  for (auto p : parts_) {
    p.start = std::max(p.start, lo);
    p.stop = std::min(p.stop, hi);
    if (p.start < p.stop) next.push_back(p);
  }
  parts_ = std::move(next);
}

// ---------------------------------------------------------------------------
// BoxMesh

BoxMesh::BoxMesh(const Box& domain, int degree_u, int degree_v)
    : domain_(domain), degree_u_(degree_u), degree_v_(degree_v) {
  if (!(domain.umin < domain.umax) || !(domain.vmin < domain.vmax)) {
    throw InputError("mesh domain must have positive extent in both directions");
  }
  u_lines_[domain.umin].insert(domain.vmin, domain.vmax, degree_u + 1);
  u_lines_[domain.umax].insert(domain.vmin, domain.vmax, degree_u + 1);
  v_lines_[domain.vmin].insert(domain.umin, domain.umax, degree_v + 1);
  v_lines_[domain.vmax].insert(domain.umin, domain.umax, degree_v + 1);
  elements_.push_back(domain);
}

double BoxMesh::snap(Direction d, double x) const {
  const auto& lines = this->lines(d);
  const double extent = d == Direction::ConstU ? domain_.width() : domain_.height();
  const double eps = 1e-12 * std::max(1.0, std::abs(extent));
  auto it = lines.lower_bound(x);
  if (it != lines.end() && std::abs(it->first - x) <= eps) return it->first;
  if (it != lines.begin()) {
    --it;
    if (std::abs(it->first - x) <= eps) return it->first;
  }
  return x;
}

Segment BoxMesh::normalize(const Segment& s) const {
  const Direction o = orthogonal(s.dir);
  const int deg = degree(s.dir);
  auto fail = [&](const std::string& why) {
    std::ostringstream msg;
    msg << "illegal segment " << (s.dir == Direction::ConstU ? "u=" : "v=") << s.value << " ["
        << s.start << ", " << s.stop << "] mult " << s.multiplicity << ": " << why;
    throw RefinementError(msg.str());
  };
  if (s.multiplicity < 1 || s.multiplicity > deg + 1) fail("multiplicity out of range");

  Segment n = s;
  n.value = snap(s.dir, s.value);
  n.start = snap(o, s.start);
  n.stop = snap(o, s.stop);
  if (n.start > n.stop) std::swap(n.start, n.stop);
  if (!(n.start < n.stop)) fail("zero length");

  const double lo = s.dir == Direction::ConstU ? domain_.umin : domain_.vmin;
  const double hi = s.dir == Direction::ConstU ? domain_.umax : domain_.vmax;
  const double olo = s.dir == Direction::ConstU ? domain_.vmin : domain_.umin;
  const double ohi = s.dir == Direction::ConstU ? domain_.vmax : domain_.umax;
  if (!(n.value >= lo && n.value <= hi) || n.start < olo || n.stop > ohi) fail("outside the domain");

  // Endpoints must land on orthogonal lines so that no element is cut partially.
  const auto& ortho = lines(o);
  for (double end : {n.start, n.stop}) {
    auto it = ortho.find(end);
    if (it == ortho.end() || it->second.multiplicity_at(n.value) == 0) {
      fail("endpoint does not lie on an orthogonal knot line");
    }
  }
  return n;
}

bool BoxMesh::contains(const Segment& s) const {
  const auto& l = lines(s.dir);
  auto it = l.find(s.value);
  if (it == l.end()) return false;
  return it->second.coverage(s.start, s.stop) >= s.multiplicity;
}

bool BoxMesh::insert(const Segment& s) {
  const bool changed = lines_mut(s.dir)[s.value].insert(s.start, s.stop, s.multiplicity);
  if (changed) split_elements(s);
  return changed;
}

void BoxMesh::split_elements(const Segment& s) {
  const std::size_t n = elements_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Box e = elements_[i];
    if (s.dir == Direction::ConstU) {
      if (!(e.umin < s.value && s.value < e.umax && e.vmin < s.stop && e.vmax > s.start)) continue;
      if (e.vmin < s.start || e.vmax > s.stop) {
        throw RefinementError("segment ends inside an element");
      }
      elements_[i] = Box{e.umin, s.value, e.vmin, e.vmax};
      elements_.push_back(Box{s.value, e.umax, e.vmin, e.vmax});
    } else {
      if (!(e.vmin < s.value && s.value < e.vmax && e.umin < s.stop && e.umax > s.start)) continue;
      if (e.umin < s.start || e.umax > s.stop) {
        throw RefinementError("segment ends inside an element");
      }
      elements_[i] = Box{e.umin, e.umax, e.vmin, s.value};
      elements_.push_back(Box{e.umin, e.umax, s.value, e.vmax});
    }
  }
}

int BoxMesh::traversal_multiplicity(Direction d, double value, double lo, double hi) const {
  const auto& l = lines(d);
  auto it = l.find(value);
  if (it == l.end()) return 0;
  return it->second.coverage(lo, hi);
}

std::vector<Segment> BoxMesh::segments() const {
  std::vector<Segment> out;
  for (Direction d : {Direction::ConstU, Direction::ConstV}) {
    for (const auto& [value, profile] : lines(d)) {
      for (const auto& p : profile.parts()) out.push_back({d, value, p.start, p.stop, p.multiplicity});
    }
  }
  return out;
}

std::vector<double> BoxMesh::coordinates(Direction d) const {
  std::vector<double> out;
  out.reserve(lines(d).size());
  for (const auto& kv : lines(d)) out.push_back(kv.first);
  return out;
}

BoxMesh BoxMesh::from_parts(const Box& domain, int degree_u, int degree_v,
                            const std::vector<Segment>& segments, std::vector<Box> elements) {
  BoxMesh m;
  m.domain_ = domain;
  m.degree_u_ = degree_u;
  m.degree_v_ = degree_v;
  for (const auto& s : segments) m.lines_mut(s.dir)[s.value].insert(s.start, s.stop, s.multiplicity);
  double area = 0.0;
  for (const auto& e : elements) {
    if (!domain.contains(e) || !(e.area() > 0.0)) throw InputError("element outside domain or empty");
    area += e.area();
  }
  if (std::abs(area - domain.area()) > 1e-9 * domain.area()) {
    throw InputError("elements do not tile the domain");
  }
  m.elements_ = std::move(elements);
  return m;
}

void BoxMesh::restrict_to(const Box& box) {
  auto restrict_lines = [](std::map<double, LineProfile>& lines, double lo, double hi, double olo,
                           double ohi) {
    for (auto it = lines.begin(); it != lines.end();) {
      if (it->first < lo || it->first > hi) {
        it = lines.erase(it);
        continue;
      }
      it->second.clip(olo, ohi);
      if (it->second.empty()) {
        it = lines.erase(it);
      } else {
        ++it;
      }
    }
  };
  restrict_lines(u_lines_, box.umin, box.umax, box.vmin, box.vmax);
  restrict_lines(v_lines_, box.vmin, box.vmax, box.umin, box.umax);
  std::vector<Box> kept;
  for (const auto& e : elements_) {
    if (box.contains(e)) kept.push_back(e);
  }
  elements_ = std::move(kept);
  domain_ = box;
}

}  // namespace lrb
