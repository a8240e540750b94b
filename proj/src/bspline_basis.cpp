#include "lrbathy/bspline_basis.hpp"

#include <array>
#include <cassert>

namespace lrb {

namespace {

// N[p][j]: degree-p B-spline on knots[j .. j+p+1].
using Table = std::array<std::array<double, kMaxDegree + 2>, kMaxDegree + 1>;

void fill_table(std::span<const double> t, int d, double lo, double hi, double x, Table& n) {
  for (int j = 0; j <= d; ++j) {
    n[0][j] = (t[j] < t[j + 1] && t[j] <= lo && hi <= t[j + 1]) ? 1.0 : 0.0;
  }
  for (int p = 1; p <= d; ++p) {
    for (int j = 0; j + p <= d; ++j) {
      double acc = 0.0;
      const double d1 = t[j + p] - t[j];
      const double d2 = t[j + p + 1] - t[j + 1];
      if (d1 > 0.0 && n[p - 1][j] != 0.0) acc += (x - t[j]) / d1 * n[p - 1][j];
      if (d2 > 0.0 && n[p - 1][j + 1] != 0.0) acc += (t[j + p + 1] - x) / d2 * n[p - 1][j + 1];
      n[p][j] = acc;
    }
  }
}

}  // namespace

void bspline_piece(std::span<const double> t, double lo, double hi, double x, int max_deriv,
                   std::span<double> out) {
  const int d = static_cast<int>(t.size()) - 2;
  assert(d >= 0 && d <= kMaxDegree);
  assert(static_cast<int>(out.size()) > max_deriv);

  Table n{};
  fill_table(t, d, lo, hi, x, n);
  out[0] = n[d][0];

  // D^r N_{0,d} = sum_j a[j] N_{j,d-r}, built by repeated application of the
  // derivative recurrence.
  std::array<double, kMaxDegree + 2> a{};
  std::array<double, kMaxDegree + 2> next{};
  a[0] = 1.0;
  for (int r = 1; r <= max_deriv; ++r) {
    if (r > d) {
      out[r] = 0.0;
      continue;
    }
    const int p = d - r + 1;  // degree being differentiated
    next.fill(0.0);
    for (int j = 0; j < r; ++j) {
      if (a[j] == 0.0) continue;
      const double d1 = t[j + p] - t[j];
      const double d2 = t[j + p + 1] - t[j + 1];
      if (d1 > 0.0) next[j] += a[j] * p / d1;
      if (d2 > 0.0) next[j + 1] -= a[j] * p / d2;
    }
    a = next;
    double v = 0.0;
    for (int j = 0; j <= r; ++j) v += a[j] * n[d - r][j];
    out[r] = v;
  }
}

double bspline_value(std::span<const double> t, double x, bool closed_right) {
  const int d = static_cast<int>(t.size()) - 2;
  const double last = t[d + 1];
  if (x < t[0] || x > last) return 0.0;
  if (x == last) {
    if (!closed_right) return 0.0;
    // Evaluate the last non-empty piece at its right end.
    int j = d;
    while (j >= 0 && !(t[j] < t[j + 1])) --j;
    if (j < 0) return 0.0;
    double out[1];
    bspline_piece(t, t[j], t[j + 1], x, 0, out);
    return out[0];
  }
  double out[1];
  // Locate the half-open interval containing x and evaluate on it.
  for (int j = 0; j <= d; ++j) {
    if (t[j] <= x && x < t[j + 1]) {
      bspline_piece(t, t[j], t[j + 1], x, 0, out);
      return out[0];
    }
  }
  return 0.0;
}

}  // namespace lrb
