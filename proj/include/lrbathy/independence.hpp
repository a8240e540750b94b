#pragma once

#include <cstddef>
#include <vector>

#include "lrbathy/lr_surface.hpp"

namespace lrb {

/// Collocation rank of a group of B-splines sampled on a group of elements.
struct RankCluster {
  std::vector<std::size_t> elements;
  std::vector<std::size_t> bsplines;
  std::size_t rank = 0;
  bool full_rank() const { return rank == bsplines.size(); }
};

struct IndependenceReport {
  bool global = false;  ///< one cluster covering the whole surface
  std::vector<RankCluster> clusters;
  std::vector<std::size_t> suspects;  ///< B-splines in rank-deficient clusters, sorted

  bool independent() const { return suspects.empty(); }
};

/// Sampling diagnostic for linear dependence of the scaled B-splines. Each
/// element contributes samples_per_element^2 interior points. Small surfaces
/// are checked as a whole; larger ones per cluster, a cluster being the
/// residents of one element sampled over the union of their supports. A
/// deficient cluster proves dependence; full rank everywhere is evidence,
/// not proof, of independence for large surfaces. In cluster mode only the
/// deficient clusters are listed.
IndependenceReport check_local_independence(const LRSurface& s, int samples_per_element = 4,
                                            std::size_t global_limit = 400);

}  // namespace lrb
