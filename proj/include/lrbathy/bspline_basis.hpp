#pragma once

#include <span>

namespace lrb {

/// Maximum supported polynomial degree per parameter direction.
inline constexpr int kMaxDegree = 5;

/// Evaluates one univariate B-spline given by its local knot vector
/// (degree = knots.size() - 2) and its derivatives 0..max_deriv at x.
///
/// The polynomial piece is selected by the knot interval that contains
/// [piece_lo, piece_hi] rather than by x itself, so evaluation on element
/// boundaries returns the limit from inside the element. [piece_lo, piece_hi]
/// must lie between two consecutive distinct knots or outside the support.
void bspline_piece(std::span<const double> knots, double piece_lo, double piece_hi, double x,
                   int max_deriv, std::span<double> out);

/// Value at x using the half-open convention [t_j, t_j+1); `closed_right`
/// makes the last knot of the support inclusive.
double bspline_value(std::span<const double> knots, double x, bool closed_right = false);

}  // namespace lrb
