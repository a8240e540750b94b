#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "lrbathy/geometry.hpp"
#include "lrbathy/mesh.hpp"

namespace lrb {

/// Tensor-product B-spline with a positive scaling factor and an elevation coefficient.
/// Its contribution to the surface is scaling * coefficient * N(u) * N(v).
struct ScaledBSpline {
  std::vector<double> knots_u;  ///< degree_u + 2 nondecreasing values
  std::vector<double> knots_v;  ///< degree_v + 2 nondecreasing values
  double coefficient = 0.0;
  double scaling = 1.0;

  const std::vector<double>& knots(Direction d) const {
    return d == Direction::ConstU ? knots_u : knots_v;
  }
  Box support() const { return {knots_u.front(), knots_u.back(), knots_v.front(), knots_v.back()}; }
};

/// Polynomial patch of the box partition with the B-splines whose support contains it.
struct Element {
  Box box;
  std::vector<std::size_t> resident;
};

inline constexpr std::size_t kNoElement = std::numeric_limits<std::size_t>::max();

/// Derived, immutable element/B-spline incidence and point-location index.
class Topology {
 public:
  std::vector<Element> elements;
  /// For each B-spline, the elements inside its support.
  std::vector<std::vector<std::size_t>> bspline_elements;

  /// Element containing (u,v). Points on an interior knot line belong to the
  /// element on the lesser side. Returns kNoElement outside the domain.
  std::size_t locate(double u, double v) const;

  static std::shared_ptr<const Topology> build(const BoxMesh& mesh,
                                               const std::vector<ScaledBSpline>& bsplines);

 private:
  Box domain_{};
  std::vector<double> columns_;                      // sorted element u-boundaries
  std::vector<std::vector<std::uint32_t>> by_column_;  // per column, sorted by vmin
};

struct UnitTags {
  std::string horizontal = "m";
  std::string vertical = "m";
  friend bool operator==(const UnitTags&, const UnitTags&) = default;
};

struct InsertStats {
  bool mesh_changed = false;
  std::size_t splits = 0;
  std::size_t merges = 0;
};

/// LR B-spline height surface F(u,v) = sum_i s_i P_i N_i(u,v) on a box partition.
///
/// Refinement inserts knot-line segments; every B-spline whose support is fully
/// traversed by a line it does not yet carry is split by knot insertion, and
/// the split cascades until no line traverses a B-spline it lacks. Identical
/// B-splines produced by splitting are merged by summing s*P and s.
///
/// The surface is safe for concurrent read-only use. Refinement requires
/// exclusive access.
class LRSurface {
 public:
  LRSurface() = default;
  LRSurface(const LRSurface& o);
  LRSurface& operator=(const LRSurface& o);
  LRSurface(LRSurface&&) noexcept;
  LRSurface& operator=(LRSurface&&) noexcept;
  ~LRSurface();

  /// Uniform tensor-product space with n_coef_u x n_coef_v B-splines and
  /// open knot vectors; all coefficients set to `value`.
  static LRSurface tensor_product(const Box& domain, int degree_u, int degree_v, int n_coef_u,
                                  int n_coef_v, double value = 0.0);

  /// Tensor-product space with the given interior knots (each multiplicity 1).
  static LRSurface tensor_product(const Box& domain, int degree_u, int degree_v,
                                  std::span<const double> interior_u,
                                  std::span<const double> interior_v, double value = 0.0);

  /// Assembles a surface from stored parts without re-deriving the basis.
  static LRSurface from_parts(BoxMesh mesh, std::vector<ScaledBSpline> bsplines,
                              UnitTags units = {});

  int degree_u() const { return mesh_.degree(Direction::ConstU); }
  int degree_v() const { return mesh_.degree(Direction::ConstV); }
  int degree(Direction d) const { return mesh_.degree(d); }
  const Box& domain() const { return mesh_.domain(); }
  const BoxMesh& mesh() const { return mesh_; }
  const std::vector<ScaledBSpline>& bsplines() const { return bsplines_; }
  std::size_t size() const { return bsplines_.size(); }

  const UnitTags& units() const { return units_; }
  void set_units(UnitTags u) { units_ = std::move(u); }

  void set_coefficient(std::size_t i, double p) { bsplines_[i].coefficient = p; }
  void add_to_coefficient(std::size_t i, double dp) { bsplines_[i].coefficient += dp; }
  std::vector<double> coefficients() const;
  void set_coefficients(std::span<const double> p);
  /// Sets s_i * P_i directly (the coefficient multiplying the unscaled B-spline).
  void set_scaled_coefficient(std::size_t i, double c);

  /// Inserts one segment. Throws RefinementError when it lies outside the domain,
  /// dangles inside an element, or splits no B-spline. Re-inserting an existing
  /// segment is a no-op.
  InsertStats insert_segment(const Segment& s);

  /// Inserts a batch of segments; segments that are already present or split
  /// nothing are accepted silently. Geometry is preserved.
  InsertStats insert_segments(std::span<const Segment> segs);

  /// Inserts a line of multiplicity degree+1 across the whole domain and drops
  /// every B-spline and element outside `box`. Box edges must be inside the domain.
  void restrict_to(const Box& box);

  std::shared_ptr<const Topology> topology() const;

  /// Index of the B-spline with exactly these knot vectors, or npos.
  std::size_t find(const std::vector<double>& ku, const std::vector<double>& kv) const;

  /// Checks structural invariants (positive scalings, every knot carried by a
  /// traversing line, no duplicates). Returns an empty string when valid.
  std::string validate() const;

 private:
  using Key = std::pair<std::vector<double>, std::vector<double>>;

  void rebuild_index();
  void invalidate();
  InsertStats split_closure();
  bool needs_split(const ScaledBSpline& b, Direction& dir, double& at) const;

  BoxMesh mesh_;
  std::vector<ScaledBSpline> bsplines_;
  std::map<Key, std::size_t> index_;
  UnitTags units_;

  mutable std::mutex cache_mutex_;
  mutable std::shared_ptr<const Topology> topology_;
};

}  // namespace lrb
