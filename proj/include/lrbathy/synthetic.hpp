#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lrbathy/geometry.hpp"
#include "lrbathy/survey.hpp"

namespace lrb {

/// Seed-pinned synthetic seabed: a tilted plane with five Gaussian features
/// on a square region, sampled at uniformly random positions with small
/// Gaussian noise.
struct BenchmarkSpec {
  std::size_t points = 100000;
  std::uint64_t seed = 20240611;
  double extent = 1000.0;       ///< side length of the square region (m)
  double noise_fraction = 0.1;  ///< noise standard deviation relative to the tolerance
};

/// Noise-free benchmark height at (x, y).
double benchmark_height(double x, double y, double extent = 1000.0);

std::vector<Point3> synthetic_benchmark(const BenchmarkSpec& spec = {});

/// 0.5% of the elevation range of the noise-free benchmark surface.
double benchmark_tolerance(double extent = 1000.0);

/// Two or more surveys over a common surface for deconfliction experiments.
struct SurveyPairSpec {
  std::size_t points_per_survey = 20000;
  std::uint64_t seed = 7;
  double extent = 1000.0;
  double overlap_fraction = 0.3;  ///< share of each survey's width that overlaps the other
  double offset = 0.0;            ///< vertical offset of the second survey's overlap points
  double noise = 0.0;             ///< noise standard deviation
};

/// Survey "A" (higher score) covers the left part, survey "B" the right part;
/// their x-ranges overlap by overlap_fraction of a survey width. The offset is
/// applied to B's points inside the overlap.
std::vector<Survey> synthetic_survey_pair(const SurveyPairSpec& spec);

/// 0.5% of the elevation range of the pair's points without offset or noise.
double survey_pair_tolerance(const SurveyPairSpec& spec);

}  // namespace lrb
