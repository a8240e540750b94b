#include "lrbathy/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "lrbathy/error.hpp"

namespace lrb {

namespace {

// Continued fraction for the incomplete beta function, evaluated with the
// modified Lentz method.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

// P(T > t) for t >= 0.
double upper_tail(double t, double df) {
  if (std::isinf(df)) return 0.5 * std::erfc(t / std::sqrt(2.0));
  const double t2 = t * t;
  // Near zero the complementary form keeps the small argument exact.
  if (t2 < df) return 0.5 - 0.5 * incomplete_beta(0.5, 0.5 * df, t2 / (df + t2));
  return 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t2));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InputError("incomplete beta needs positive parameters");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InputError("degrees of freedom must be positive");
  const double tail = upper_tail(std::abs(t), df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_critical(double alpha, double df) {
  if (!(df > 0.0)) throw InputError("degrees of freedom must be positive");
  if (alpha >= 1.0) return 0.0;
  if (alpha <= 0.0) return INFINITY;
  const double target = 0.5 * alpha;
  double lo = 0.0;
  double hi = 1.0;
  while (upper_tail(hi, df) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return INFINITY;
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (upper_tail(mid, df) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SampleStats sample_stats(std::span<const double> r, std::span<const Point3> pos) {
  SampleStats s;
  s.n = r.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  s.min = r[0];
  s.max = r[0];
  for (double x : r) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(s.n);
  if (s.n >= 2) {
    double ss = 0.0;
    for (double x : r) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  s.bbox = bounding_box(pos);
  return s;
}

double combined_stddev(const SampleStats& a, const SampleStats& b) {
  const double n = static_cast<double>(a.n + b.n);
  if (n < 2.0) return 0.0;
  const double mean = (static_cast<double>(a.n) * a.mean + static_cast<double>(b.n) * b.mean) / n;
  auto spread = [mean](const SampleStats& s) {
    const double var = s.stddev ? *s.stddev * *s.stddev : 0.0;
    const double dm = s.mean - mean;
    return (static_cast<double>(s.n) - 1.0) * var + static_cast<double>(s.n) * dm * dm;
  };
  const double ss = (a.n > 0 ? spread(a) : 0.0) + (b.n > 0 ? spread(b) : 0.0);
  return std::sqrt(std::max(0.0, ss) / (n - 1.0));
}

std::optional<Interval> confidence_interval(const SampleStats& s, double alpha, double df) {
  if (s.n < 2 || !s.stddev) return std::nullopt;
  const double half = student_t_critical(alpha, df) * *s.stddev / std::sqrt(static_cast<double>(s.n));
  return Interval{s.mean - half, s.mean + half};
}

std::optional<TTest> two_sample_t(const SampleStats& a, const SampleStats& b, double alpha, DfMethod method) {
  if (a.n < 2 || b.n < 2 || !a.stddev || !b.stddev) return std::nullopt;
  const double va = *a.stddev * *a.stddev / static_cast<double>(a.n);
  const double vb = *b.stddev * *b.stddev / static_cast<double>(b.n);
  if (!(va + vb > 0.0)) return std::nullopt;
  TTest r;
  r.t = (a.mean - b.mean) / std::sqrt(va + vb);
  if (method == DfMethod::Pooled) {
    r.df = static_cast<double>(a.n + b.n) - 1.0;
  } else {
    const double den = va * va / static_cast<double>(a.n - 1) + vb * vb / static_cast<double>(b.n - 1);
    r.df = den > 0.0 ? (va + vb) * (va + vb) / den : kInfiniteDf;
  }
  r.critical = student_t_critical(alpha, r.df);
  r.rejects_equal_means = std::abs(r.t) > r.critical;
  return r;
}

}  // namespace lrb
