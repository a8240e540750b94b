#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "lrbathy/geometry.hpp"
#include "lrbathy/lr_surface.hpp"

namespace lrb {

/// Blend between the smoothing functional and the data term, and the
/// weights of the first, second and third radial derivatives in the
/// smoothing functional.
struct SmoothingWeights {
  double alpha_smooth = 1e-6;
  double alpha_data = 1.0 - 1e-6;
  double w1 = 0.0;
  double w2 = 1.0;
  double w3 = 0.0;

  static SmoothingWeights with_smoothing(double a) { return {a, 1.0 - a, 0.0, 1.0, 0.0}; }
};

/// Where ghost heights for sparsely covered B-splines come from.
enum class GhostSource { InverseDistance, CurrentSurface };

struct LeastSquaresOptions {
  SmoothingWeights weights;
  bool stabilize = true;
  double ghost_weight = 1e-3;         ///< relative to the weight of a data point
  int idw_neighbours = 8;
  std::size_t direct_solver_limit = 60000;  ///< unknowns; above this CG is used
  double tolerance = 1e-10;
};

struct LeastSquaresResult {
  std::size_t ghost_points = 0;
  double relative_residual = 0.0;
  bool iterative = false;
};

/// Sparse symmetric matrix M with c^T M c = J(F) for F = sum_i c_i s_i N_i,
/// where J integrates the squared radial derivatives over all directions and
/// the whole domain.
Eigen::SparseMatrix<double> smoothing_matrix(const LRSurface& s, const SmoothingWeights& w);

/// J(F) of the current surface.
double smoothing_functional(const LRSurface& s, const SmoothingWeights& w);

/// alpha_smooth * J(F) + alpha_data * sum_k (F(x_k, y_k) - z_k)^2 over in-domain points.
double penalty(const LRSurface& s, std::span<const Point3> pts, const SmoothingWeights& w);

/// Number of in-domain points inside the support of each B-spline.
std::vector<std::size_t> support_point_counts(const LRSurface& s, std::span<const Point3> pts);

/// Synthetic samples at element centres for B-splines with fewer than
/// (d1+1)(d2+1) points in their support.
std::vector<Point3> ghost_points(const LRSurface& s, std::span<const Point3> pts, GhostSource source,
                                 int idw_neighbours = 8);

/// Replaces the coefficients by the minimiser of the penalised least squares
/// problem in the current spline space. Throws SolverError when the system
/// cannot be solved to tolerance.
LeastSquaresResult fit_least_squares(LRSurface& s, std::span<const Point3> pts,
                                     const LeastSquaresOptions& opt, GhostSource source);

/// Inverse distance weighted height from the k nearest points, backed by a
/// uniform grid.
class NeighbourGrid {
 public:
  explicit NeighbourGrid(std::span<const Point3> pts);
  double idw(double x, double y, int k) const;

 private:
  std::span<const Point3> pts_;
  Box box_{};
  double cell_ = 1.0;
  std::size_t nx_ = 1;
  std::size_t ny_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

}  // namespace lrb
