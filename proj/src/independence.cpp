#include "lrbathy/independence.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <Eigen/Dense>

#include "lrbathy/error.hpp"
#include "lrbathy/evaluate.hpp"

namespace lrb {

namespace {

// Rank of the collocation matrix of `columns` on the samples of `elements`,
// plus the columns left outside the numerical rank.
RankCluster collocation_rank(const LRSurface& s, const Topology& topo, std::vector<std::size_t> elements,
                             std::vector<std::size_t> columns, int n, std::vector<std::size_t>& deficient) {
  std::map<std::size_t, Eigen::Index> col_of;
  for (std::size_t k = 0; k < columns.size(); ++k) col_of[columns[k]] = static_cast<Eigen::Index>(k);
  const auto rows = static_cast<Eigen::Index>(elements.size() * static_cast<std::size_t>(n * n));
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(columns.size()));
  std::vector<double> basis;
  Eigen::Index r = 0;
  for (std::size_t e : elements) {
    const Element& el = topo.elements[e];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j, ++r) {
        const double u = el.box.umin + el.box.width() * (i + 0.5) / n;
        const double v = el.box.vmin + el.box.height() * (j + 0.5) / n;
        element_basis(s, el, u, v, basis);
        for (std::size_t k = 0; k < el.resident.size(); ++k) {
          const auto it = col_of.find(el.resident[k]);
          if (it != col_of.end()) A(r, it->second) = basis[k];
        }
      }
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  RankCluster c;
  c.rank = static_cast<std::size_t>(qr.rank());
  if (c.rank < columns.size()) {
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = static_cast<Eigen::Index>(c.rank); k < perm.size(); ++k) {
      deficient.push_back(columns[static_cast<std::size_t>(perm(k))]);
    }
  }
  c.elements = std::move(elements);
  c.bsplines = std::move(columns);
  return c;
}

}  // namespace

IndependenceReport check_local_independence(const LRSurface& s, int samples_per_element, std::size_t global_limit) {
  if (samples_per_element < 1) throw InputError("samples per element must be positive");
  IndependenceReport rep;
  const auto topo = s.topology();
  std::vector<std::size_t> deficient;

  if (s.size() <= global_limit) {
    rep.global = true;
    std::vector<std::size_t> elements(topo->elements.size()), columns(s.size());
    for (std::size_t e = 0; e < elements.size(); ++e) elements[e] = e;
    for (std::size_t b = 0; b < columns.size(); ++b) columns[b] = b;
    rep.clusters.push_back(collocation_rank(s, *topo, elements, columns, samples_per_element, deficient));
  } else {
    std::set<std::vector<std::size_t>> seen;
    for (std::size_t e = 0; e < topo->elements.size(); ++e) {
      std::vector<std::size_t> columns = topo->elements[e].resident;
      std::sort(columns.begin(), columns.end());
      if (!seen.insert(columns).second) continue;
      std::set<std::size_t> region;
      for (std::size_t b : columns) region.insert(topo->bspline_elements[b].begin(), topo->bspline_elements[b].end());
      RankCluster c = collocation_rank(s, *topo, {region.begin(), region.end()}, columns, samples_per_element,
                                       deficient);
      if (!c.full_rank()) rep.clusters.push_back(std::move(c));
    }
  }
  std::sort(deficient.begin(), deficient.end());
  deficient.erase(std::unique(deficient.begin(), deficient.end()), deficient.end());
  rep.suspects = std::move(deficient);
  return rep;
}

}  // namespace lrb
