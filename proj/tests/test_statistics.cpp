#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "doctest.h"
#include "lrbathy/error.hpp"
#include "lrbathy/statistics.hpp"

using namespace lrb;

namespace {

SampleStats summary(std::size_t n, double mean, std::optional<double> sd) {
  SampleStats s;
  s.n = n;
  s.mean = mean;
  s.stddev = sd;
  s.min = mean;
  s.max = mean;
  return s;
}

double boost_critical(double alpha, double df) {
  if (std::isinf(df)) return boost::math::quantile(boost::math::complement(boost::math::normal(), alpha / 2));
  return boost::math::quantile(boost::math::complement(boost::math::students_t(df), alpha / 2));
}

}  // namespace

TEST_CASE("t cdf agrees with boost") {
  for (double df : {1.0, 2.5, 7.0, 30.0, 400.0}) {
    const boost::math::students_t dist(df);
    for (double t : {-6.0, -1.3, -0.2, 0.0, 0.7, 2.1, 9.0}) {
      CHECK(student_t_cdf(t, df) == doctest::Approx(boost::math::cdf(dist, t)).epsilon(1e-12));
    }
  }
  CHECK(student_t_cdf(1.5, kInfiniteDf) == doctest::Approx(boost::math::cdf(boost::math::normal(), 1.5)));
}

TEST_CASE("critical values agree with boost") {
  CHECK(student_t_critical(0.05, 10) == doctest::Approx(2.228).epsilon(5e-4));
  CHECK(student_t_critical(0.05, kInfiniteDf) == doctest::Approx(1.959964).epsilon(1e-6));
  for (double df : {1.0, 3.0, 12.5, 85.0, kInfiniteDf}) {
    for (double alpha : {0.001, 0.01, 0.05, 0.2, 0.7}) {
      CHECK(student_t_critical(alpha, df) == doctest::Approx(boost_critical(alpha, df)).epsilon(1e-10));
    }
  }
}

TEST_CASE("critical value limits and monotonicity") {
  CHECK(student_t_critical(1.0, 5) == 0.0);
  CHECK(student_t_critical(1.0 - 1e-9, 5) == doctest::Approx(boost_critical(1.0 - 1e-9, 5)).epsilon(1e-6));
  double prev = INFINITY;
  for (double df : {1.0, 2.0, 5.0, 20.0, 100.0, 1e4}) {
    const double z = student_t_critical(0.05, df);
    CHECK(z < prev);
    prev = z;
  }
  CHECK(prev > student_t_critical(0.05, kInfiniteDf));
}

TEST_CASE("incomplete beta rejects invalid parameters") {
  CHECK_THROWS_AS(incomplete_beta(0.0, 1.0, 0.5), InputError);
  CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1, 1) = x and I_x(a, 1) = x^a.
  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3));
  CHECK(incomplete_beta(3.0, 1.0, 0.6) == doctest::Approx(0.216));
}

TEST_CASE("confidence intervals") {
  const auto zero = confidence_interval(summary(10, 1.5, 0.0));
  REQUIRE(zero);
  CHECK(zero->lo == 1.5);
  CHECK(zero->hi == 1.5);

  const auto unit = confidence_interval(summary(100, 0.0, 1.0));
  REQUIRE(unit);
  CHECK(unit->lo == doctest::Approx(-0.196).epsilon(1e-3));
  CHECK(unit->hi == doctest::Approx(0.196).epsilon(1e-3));

  const auto table = confidence_interval(summary(152, -0.021, 0.0088));
  REQUIRE(table);
  const double half = 0.5 * (table->hi - table->lo);
  CHECK(half == doctest::Approx(boost_critical(0.05, kInfiniteDf) * 0.0088 / std::sqrt(152.0)));
  CHECK(half == doctest::Approx(0.0014).epsilon(0.01));

  CHECK_FALSE(confidence_interval(summary(1, 0.2, std::nullopt)));
}

TEST_CASE("two sample t") {
  const auto a = summary(152, -0.021, 0.0088);
  const auto b = summary(86, -0.003, 0.0046);
  const auto t = two_sample_t(a, b);
  REQUIRE(t);
  CHECK(std::abs(t->t) == doctest::Approx(20.5).epsilon(0.02));
  CHECK(t->rejects_equal_means);

  const auto same = two_sample_t(a, a);
  REQUIRE(same);
  CHECK(same->t == 0.0);

  const auto pooled = two_sample_t(a, b, 0.05, DfMethod::Pooled);
  REQUIRE(pooled);
  CHECK(pooled->df == 237.0);
  CHECK(pooled->t == t->t);

  CHECK_FALSE(two_sample_t(a, summary(1, 0.0, std::nullopt)));
  CHECK_FALSE(two_sample_t(summary(5, 0.0, 0.0), summary(5, 1.0, 0.0)));
}

TEST_CASE("two sample t is antisymmetric") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> m(-1, 1), s(0.01, 2);
  std::uniform_int_distribution<std::size_t> n(2, 300);
  for (int k = 0; k < 100; ++k) {
    const auto a = summary(n(rng), m(rng), s(rng));
    const auto b = summary(n(rng), m(rng), s(rng));
    const auto ab = two_sample_t(a, b);
    const auto ba = two_sample_t(b, a);
    REQUIRE(ab);
    REQUIRE(ba);
    CHECK(ab->t == -ba->t);
    CHECK(ab->df == ba->df);
  }
}

TEST_CASE("sample and combined statistics match the pooled sample") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.3, 0.2), h(-0.1, 0.05);
  std::vector<double> ra(40), rb(25), all;
  std::vector<Point3> pa(40), pb(25);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ra[i] = g(rng);
    pa[i] = {static_cast<double>(i), 2.0 * static_cast<double>(i), 0};
  }
  for (auto& x : rb) x = h(rng);
  all = ra;
  all.insert(all.end(), rb.begin(), rb.end());

  const auto sa = sample_stats(ra, pa);
  CHECK(sa.bbox == Box{0, 39, 0, 78});
  CHECK(sa.min <= sa.mean);
  CHECK(sa.mean <= sa.max);
  const auto sb = sample_stats(rb, pb);
  const auto sall = sample_stats(all, {});
  REQUIRE(sall.stddev);
  CHECK(combined_stddev(sa, sb) == doctest::Approx(*sall.stddev).epsilon(1e-12));

  const auto one = sample_stats(std::vector<double>{0.27}, {});
  CHECK(one.n == 1);
  CHECK_FALSE(one.stddev);
}
