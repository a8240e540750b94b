#pragma once

#include <cstddef>
#include <span>

#include "lrbathy/evaluate.hpp"
#include "lrbathy/geometry.hpp"
#include "lrbathy/lr_surface.hpp"

namespace lrb {

struct MbaResult {
  std::size_t updated = 0;  ///< B-splines that received a nonzero correction
};

/// One locally refined multilevel B-spline correction step. For every point c
/// with residual r_c and basis values w_l = s_l N_l(x_c, y_c):
///   phi_ic = w_i r_c / sum_l w_l^2,
///   dP_i   = sum_c w_ic^2 phi_ic / sum_c w_ic^2,
/// summed over the points in the support of B-spline i. B-splines without
/// points, or whose points are all within `tolerance`, are left unchanged.
/// `field` must be the distance field of `pts` against `s`.
MbaResult mba_update(LRSurface& s, std::span<const Point3> pts, const DistanceField& field, double tolerance);

/// Recomputes the distance field and applies mba_update.
MbaResult mba_step(LRSurface& s, std::span<const Point3> pts, double tolerance);

}  // namespace lrb
