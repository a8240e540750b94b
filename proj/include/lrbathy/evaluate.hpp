#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lrbathy/geometry.hpp"
#include "lrbathy/lr_surface.hpp"

namespace lrb {

inline constexpr int kMaxDerivative = 3;

/// Partial derivatives of F up to a given total order. Entry (i, j) is
/// d^(i+j) F / du^i dv^j.
struct Partials {
  int order = 0;
  std::array<double, 10> d{};

  static constexpr std::size_t slot(int i, int j) {
    const int k = i + j;
    return static_cast<std::size_t>(k * (k + 1) / 2 + j);
  }
  double operator()(int i, int j) const { return d[slot(i, j)]; }
  double value() const { return d[0]; }
};

/// F(u,v). Throws DomainError outside the domain.
double evaluate(const LRSurface& s, double u, double v);

/// F and its partials up to `order` (at most min(kMaxDerivative, degree)
/// is meaningful; higher orders come out as zero).
Partials evaluate(const LRSurface& s, double u, double v, int order);

/// Same as above with an already located element; used by hot loops.
Partials evaluate_in_element(const LRSurface& s, const Element& e, double u, double v, int order);

/// Values s_i N_i(u,v) for the resident B-splines of `e`, in resident order.
void element_basis(const LRSurface& s, const Element& e, double u, double v, std::vector<double>& out);

/// Scaled basis partials for the residents of `e`: out[r * 10 + Partials::slot(i,j)].
void element_basis_partials(const LRSurface& s, const Element& e, double u, double v, int order,
                            std::vector<double>& out);

enum class PointClass : std::uint8_t { Within, Above, Below, Outside };

std::string_view to_string(PointClass c);

/// Signed vertical residuals z - F(x,y) of a point cloud with a tolerance
/// classification and per-element point lists.
struct DistanceField {
  double tolerance = 0.0;
  std::vector<double> residual;           ///< NaN for points outside the domain
  std::vector<std::size_t> element;       ///< kNoElement for points outside the domain
  std::vector<PointClass> classification;
  std::vector<std::vector<std::size_t>> element_points;
  std::size_t outside = 0;

  std::size_t size() const { return residual.size(); }
  std::size_t inside() const { return size() - outside; }
  std::size_t out_of_tolerance() const;
  double max_abs() const;
  double mean_abs() const;
};

DistanceField distance_field(const LRSurface& s, std::span<const Point3> pts, double tolerance);

struct ElementAccuracy {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::size_t count = 0;
  std::size_t out_count = 0;
};

std::vector<ElementAccuracy> element_accuracy(const DistanceField& f);

}  // namespace lrb
