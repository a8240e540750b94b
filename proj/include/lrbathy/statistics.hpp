#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>

#include "lrbathy/geometry.hpp"

namespace lrb {

inline constexpr double kInfiniteDf = std::numeric_limits<double>::infinity();

/// Summary of the signed residuals of one sample (a survey restricted to a
/// region). The standard deviation uses the n-1 denominator and is undefined
/// for n < 2.
struct SampleStats {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> stddev;
  double min = 0.0;
  double max = 0.0;
  Box bbox{};

  double bbox_area() const { return bbox.area(); }
};

SampleStats sample_stats(std::span<const double> residuals, std::span<const Point3> positions);

/// Standard deviation of the union of two samples from their summaries. An
/// undefined standard deviation (n = 1) contributes no spread.
double combined_stddev(const SampleStats& a, const SampleStats& b);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with df degrees of freedom; df = infinity gives
/// the standard normal distribution.
double student_t_cdf(double t, double df);

/// Two-sided critical value z such that P(|T| > z) = alpha.
double student_t_critical(double alpha, double df);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// mean -/+ z S / sqrt(n) with z = student_t_critical(alpha, df). df defaults
/// to infinity (normal limit). Empty for n < 2.
std::optional<Interval> confidence_interval(const SampleStats& s, double alpha = 0.05, double df = kInfiniteDf);

enum class DfMethod { Welch, Pooled };

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double critical = 0.0;  ///< two-sided limit at the requested alpha
  bool rejects_equal_means = false;
};

/// T = (mean1 - mean2) / sqrt(s1^2/n1 + s2^2/n2). Pooled uses df = n1 + n2 - 1,
/// Welch the Satterthwaite approximation. Empty when a sample has n < 2 or
/// both spreads are zero.
std::optional<TTest> two_sample_t(const SampleStats& a, const SampleStats& b, double alpha = 0.05,
                                  DfMethod method = DfMethod::Welch);

}  // namespace lrb
