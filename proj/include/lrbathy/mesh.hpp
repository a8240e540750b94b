#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "lrbathy/geometry.hpp"

namespace lrb {

/// Orientation of a knot-line segment. A ConstU segment is the line u = value
/// running along v; it carries knots of the u direction.
enum class Direction : std::uint8_t { ConstU = 0, ConstV = 1 };

inline Direction orthogonal(Direction d) {
  return d == Direction::ConstU ? Direction::ConstV : Direction::ConstU;
}

/// Axis-parallel knot-line segment.
struct Segment {
  Direction dir = Direction::ConstU;
  double value = 0.0;  ///< constant coordinate
  double start = 0.0;  ///< extent along the line
  double stop = 0.0;
  int multiplicity = 1;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct LinePart {
  double start;
  double stop;
  int multiplicity;
};

/// Piecewise-constant multiplicity along one knot line. Parts are sorted,
/// have disjoint interiors, and touching parts of equal multiplicity are merged.
class LineProfile {
 public:
  /// Raises the multiplicity on [start, stop] to at least `mult`. Returns true on change.
  bool insert(double start, double stop, int mult);

  /// Minimum multiplicity over [lo, hi]; 0 if any part of the interval is uncovered.
  int coverage(double lo, double hi) const;

  /// Largest multiplicity of the parts whose closure contains s.
  int multiplicity_at(double s) const;

  const std::vector<LinePart>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  /// Restricts the profile to [lo, hi].
  void clip(double lo, double hi);

 private:
  std::vector<LinePart> parts_;
};

/// Box partition of a rectangular domain by knot-line segments. Boundary lines
/// carry multiplicity degree+1. The element list is kept consistent with the
/// segments on every insertion.
class BoxMesh {
 public:
  BoxMesh() = default;
  BoxMesh(const Box& domain, int degree_u, int degree_v);

  const Box& domain() const { return domain_; }
  int degree(Direction d) const { return d == Direction::ConstU ? degree_u_ : degree_v_; }

  const std::map<double, LineProfile>& lines(Direction d) const {
    return d == Direction::ConstU ? u_lines_ : v_lines_;
  }

  /// Snaps a coordinate to an existing line coordinate of the given direction
  /// when it lies within a relative tolerance of one.
  double snap(Direction d, double x) const;

  /// Validates and snaps a segment without inserting it. Throws RefinementError.
  Segment normalize(const Segment& s) const;

  /// Inserts a (normalized) segment, splitting crossed elements. Returns true when
  /// the mesh changed.
  bool insert(const Segment& s);

  /// True when the segment is already fully present with at least its multiplicity.
  bool contains(const Segment& s) const;

  /// Minimum multiplicity of the line `value` of direction d over [lo, hi].
  int traversal_multiplicity(Direction d, double value, double lo, double hi) const;

  const std::vector<Box>& elements() const { return elements_; }

  /// All segments as maximal constant-multiplicity parts, ordered by direction and value.
  std::vector<Segment> segments() const;

  /// Sorted coordinates of all lines of a direction.
  std::vector<double> coordinates(Direction d) const;

  /// Rebuilds a mesh from stored parts; elements are taken as given and checked
  /// to tile the domain.
  static BoxMesh from_parts(const Box& domain, int degree_u, int degree_v,
                            const std::vector<Segment>& segments, std::vector<Box> elements);

  /// Restricts the mesh to a sub-box whose edges are full lines of multiplicity
  /// degree+1. Elements outside are dropped.
  void restrict_to(const Box& box);

 private:
  std::map<double, LineProfile>& lines_mut(Direction d) {
    return d == Direction::ConstU ? u_lines_ : v_lines_;
  }
  void split_elements(const Segment& s);

  Box domain_{};
  int degree_u_ = 2;
  int degree_v_ = 2;
  std::map<double, LineProfile> u_lines_;
  std::map<double, LineProfile> v_lines_;
  std::vector<Box> elements_;
};

}  // namespace lrb
