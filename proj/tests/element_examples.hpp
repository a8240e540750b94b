// Published residual summaries of two elements of a real survey set, used as
// fixed inputs. Only areas are given for the bounding boxes, so the boxes
// here are squares (or points for single-point samples) with those areas,
// placed to match the stated overlap situation.
#pragma once

#include <cmath>
#include <optional>

#include "lrbathy/deconflict.hpp"

namespace examples {

inline lrb::SampleStats stats(std::size_t n, double min, double max, double mean, std::optional<double> sd,
                              lrb::Box bbox) {
  lrb::SampleStats s;
  s.n = n;
  s.min = min;
  s.max = max;
  s.mean = mean;
  s.stddev = sd;
  s.bbox = bbox;
  return s;
}

// Square of the given area with its lower left corner at (u, v).
inline lrb::Box square(double u, double v, double area) {
  const double a = std::sqrt(area);
  return {u, u + a, v, v + a};
}

inline lrb::Box point(double u, double v) { return {u, u, v, v}; }

// Two nearly coincident surveys; overlap 1802.3, combined std 0.007.
inline lrb::PairStats example1() {
  lrb::PairStats p;
  p.high = stats(152, -0.232, 0.250, -0.021, 0.0088, square(0, 0, 1863.9));
  p.candidate = stats(86, -0.155, 0.172, -0.003, 0.0046, square(0.4, 0.4, 1823.0));
  p.overlap_area = 1802.3;
  p.combined_stddev = 0.007;
  p.high_score = 0.657;
  p.candidate_score = 0.650;
  return p;
}

inline lrb::PairStats example2_pair(lrb::SampleStats high, lrb::SampleStats candidate,
                                    std::optional<double> combined = std::nullopt) {
  lrb::PairStats p;
  p.high = high;
  p.candidate = candidate;
  p.combined_stddev = combined;
  p.high_score = 0.640;
  p.candidate_score = 0.576;
  return p;
}

// Scan-line survey against a sparse survey, with the sub-domains of the
// retest. Sub-domains 1 and 2 have disjoint samples, 3 is narrowed to 3b
// around the single candidate point, and 4 has no high priority points.
inline lrb::StatsNode example2() {
  using lrb::StatsNode;
  StatsNode root{"element", example2_pair(stats(172, -1.05, 0.625, -0.191, 0.177, square(0, 0, 3045.3)),
                                          stats(7, -0.64, 1.19, -0.028, 0.326, square(5, 5, 2435.9))),
                 {}};
  StatsNode sub1{"1", example2_pair(stats(12, -0.96, -0.56, -0.65, 0.015, square(0, 0, 13.1)),
                                    stats(2, -0.64, -0.24, -0.44, 0.040, square(10, 0, 44.8)), 4.75),
                 {}};
  StatsNode sub2{"2", example2_pair(stats(87, -1.05, 0.10, -0.48, 0.062, square(27, 0, 698.4)),
                                    stats(2, -0.54, -0.15, -0.35, 0.039, square(10, 20, 35.9)), 0.537),
                 {}};
  StatsNode sub3b{"3b", example2_pair(stats(22, 0.18, 0.37, 0.30, 0.004, square(2, 30, 35.8)),
                                      stats(1, 0.27, 0.27, 0.27, std::nullopt, point(5, 33)), 0.003),
                  {}};
  StatsNode sub3{"3", example2_pair(stats(73, -0.26, 0.62, 0.22, 0.035, square(0, 28, 597.1)),
                                    stats(1, 0.27, 0.27, 0.27, std::nullopt, point(5, 33)), 0.85),
                 {sub3b}};
  // The two remaining candidate points; their summary is not published.
  StatsNode sub4{"4", example2_pair(lrb::SampleStats{}, stats(2, -0.1, 0.4, 0.15, 0.35, square(30, 30, 40.0))), {}};
  root.children = {sub1, sub2, sub3, sub4};
  return root;
}

}  // namespace examples
