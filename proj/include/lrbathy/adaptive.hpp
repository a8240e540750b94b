#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrbathy/evaluate.hpp"
#include "lrbathy/geometry.hpp"
#include "lrbathy/least_squares.hpp"
#include "lrbathy/lr_surface.hpp"

namespace lrb {

enum class Approximation { LeastSquares, Mba };

struct FitConfig {
  double tolerance = 0.5;
  int max_iterations = 7;
  int degree_u = 2;
  int degree_v = 2;
  int initial_coefficients_u = 7;
  int initial_coefficients_v = 7;
  int ls_iterations = 3;           ///< iterations 0 .. ls_iterations-1 use least squares
  bool auto_switch = false;        ///< switch to MBA early when element sizes vary a lot
  double auto_switch_ratio = 16.0; ///< largest / smallest element width
  double aspect_threshold = 1.5;   ///< split both directions below this support aspect ratio
  int min_width_exponent = 14;     ///< spans narrower than extent / 2^k are not split
  std::optional<Box> domain;       ///< defaults to the bounding box of the points
  LeastSquaresOptions least_squares;
};

/// One row of the iteration table: iteration, serialized size, coefficient
/// count, maximum and average absolute distance, and out-of-tolerance count.
struct IterationReport {
  int iteration = 0;
  std::size_t file_size = 0;
  std::size_t coefficients = 0;
  double max_distance = 0.0;
  double average_distance = 0.0;
  std::size_t out_of_tolerance = 0;

  friend bool operator==(const IterationReport&, const IterationReport&) = default;
};

struct RefineResult {
  std::vector<Segment> segments;   ///< requested insertions (before normalization)
  std::size_t frozen_elements = 0; ///< elements with out-of-tolerance points that cannot be refined
};

struct FitResult {
  LRSurface surface;
  std::vector<IterationReport> reports;
  std::vector<Approximation> methods;  ///< approximation used in each iteration
  std::size_t frozen_elements = 0;     ///< after the last iteration
  std::size_t outside_points = 0;
  std::vector<std::string> warnings;
};

/// Refines every B-spline that has out-of-tolerance points in its support by
/// a midpoint line across the support in one or both directions.
RefineResult refine_step(LRSurface& s, const DistanceField& field, const FitConfig& cfg);

/// The segments refine_step would insert, without modifying the surface.
RefineResult plan_refinement(const LRSurface& s, const DistanceField& field, const FitConfig& cfg);

/// Adaptive approximation loop: a least squares fit on a coarse tensor grid,
/// then repeated refinement and approximation until every point is within
/// tolerance or the iteration cap is reached.
FitResult fit(std::span<const Point3> pts, const FitConfig& cfg);

IterationReport make_report(int iteration, const LRSurface& s, const DistanceField& f);

/// Throws InputError for empty input or points whose x,y are collinear.
void check_fit_input(std::span<const Point3> pts);

std::string to_string(Approximation a);

}  // namespace lrb
