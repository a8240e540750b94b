#include "lrbathy/synthetic.hpp"

#include <array>
#include <cmath>
#include <random>

namespace lrb {

namespace {

struct Bump {
  double cx, cy, amplitude, sigma;  // centre and width as fractions of the extent
};

constexpr std::array<Bump, 5> kBumps{{
    {0.25, 0.30, 12.0, 0.040},
    {0.70, 0.25, -8.0, 0.060},
    {0.55, 0.65, 15.0, 0.025},
    {0.20, 0.78, -6.0, 0.080},
    {0.82, 0.80, 9.0, 0.015},
}};

double shared_surface(double x, double y, double extent) {
  const double dx = x / extent - 0.45;
  const double dy = y / extent - 0.55;
  return -30.0 + 0.005 * x - 0.002 * y + 8.0 * std::exp(-(dx * dx + dy * dy) / (2.0 * 0.2 * 0.2));
}

}  // namespace

double benchmark_height(double x, double y, double extent) {
  const double u = x / extent;
  const double v = y / extent;
  double z = -40.0 + 10.0 * u + 5.0 * v;
  for (const auto& b : kBumps) {
    const double du = u - b.cx;
    const double dv = v - b.cy;
    z += b.amplitude * std::exp(-(du * du + dv * dv) / (2.0 * b.sigma * b.sigma));
  }
  return z;
}

double benchmark_tolerance(double extent) {
  // Range from a dense grid scan of the noise-free surface.
  double lo = INFINITY;
  double hi = -INFINITY;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const double z = benchmark_height(extent * i / n, extent * j / n, extent);
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
  }
  return 0.005 * (hi - lo);
}

std::vector<Point3> synthetic_benchmark(const BenchmarkSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> pos(0.0, spec.extent);
  std::normal_distribution<double> noise(0.0, spec.noise_fraction * benchmark_tolerance(spec.extent));
  std::vector<Point3> pts(spec.points);
  for (auto& p : pts) {
    p.x = pos(rng);
    p.y = pos(rng);
    p.z = benchmark_height(p.x, p.y, spec.extent) + noise(rng);
  }
  return pts;
}

std::vector<Survey> synthetic_survey_pair(const SurveyPairSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  const double width = spec.extent / (2.0 - spec.overlap_fraction);
  const double overlap = spec.overlap_fraction * width;
  std::normal_distribution<double> noise(0.0, spec.noise > 0.0 ? spec.noise : 1.0);  // unused when noise is 0
  std::uniform_real_distribution<double> ypos(0.0, spec.extent);

  std::vector<Survey> out(2);
  out[0].id = "A";
  out[0].meta.score = 0.8;
  out[0].meta.method = "mbes";
  out[1].id = "B";
  out[1].meta.score = 0.6;
  out[1].meta.method = "sbes";
  const double x0[2] = {0.0, width - overlap};
  for (int s = 0; s < 2; ++s) {
    std::uniform_real_distribution<double> xpos(x0[s], x0[s] + width);
    out[s].points.resize(spec.points_per_survey);
    for (auto& p : out[s].points) {
      p.x = xpos(rng);
      p.y = ypos(rng);
      p.z = shared_surface(p.x, p.y, spec.extent);
      if (spec.noise > 0.0) p.z += noise(rng);
      if (s == 1 && p.x <= width) p.z += spec.offset;
    }
  }
  return out;
}

double survey_pair_tolerance(const SurveyPairSpec& spec) {
  SurveyPairSpec clean = spec;
  clean.offset = 0.0;
  clean.noise = 0.0;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto& s : synthetic_survey_pair(clean)) {
    for (const auto& p : s.points) {
      lo = std::min(lo, p.z);
      hi = std::max(hi, p.z);
    }
  }
  return 0.005 * (hi - lo);
}

}  // namespace lrb
