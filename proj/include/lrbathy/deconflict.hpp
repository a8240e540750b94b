#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrbathy/adaptive.hpp"
#include "lrbathy/geometry.hpp"
#include "lrbathy/lr_surface.hpp"
#include "lrbathy/statistics.hpp"
#include "lrbathy/survey.hpp"

namespace lrb {

enum class Verdict : std::uint8_t { Consistent, NotConsistent, Indeterminate };
std::string_view to_string(Verdict v);

/// Thresholds of the pairwise consistency test. Every length is a multiple
/// of the tolerance, so scaling heights and tolerance together leaves all
/// verdicts unchanged.
struct CriteriaConfig {
  double tolerance = 0.5;
  double mean_factor = 1.0;           ///< |mean difference| <= mean_factor * tol
  double range_allowance = 0.5;       ///< candidate range may exceed the high range by this * tol per side
  double within_fraction = 0.9;       ///< share of candidate residuals that must lie in the widened high range
  double within_allowance = 0.25;     ///< widening of the high range for the share test, * tol
  double spread_factor = 1.25;        ///< combined std <= spread_factor * largest individual std
  double significant_overlap = 0.2;   ///< bbox overlap / smaller bbox area
  double large_stddev = 0.5;          ///< an individual std above this * tol is inconclusive
  double equal_score_epsilon = 1e-6;
  double equal_score_overlap = 0.05;
  double far_gap_elements = 2.0;      ///< disjoint points this many element widths away are kept
  double contained_fraction = 0.9;    ///< candidate bbox share inside the high bbox for direct removal
  double neighbourhood_fraction = 0.125;  ///< half-size of the shrunken region relative to its parent
  double alpha = 0.05;
  DfMethod df_method = DfMethod::Welch;
  int max_depth = 3;
};

/// Residual summaries of the higher-priority ("high") and the tested
/// ("candidate") sample in one region.
struct PairStats {
  SampleStats high;
  SampleStats candidate;
  std::vector<double> candidate_residuals;  ///< empty: the share test falls back to the range
  std::optional<double> combined_stddev;    ///< computed from the summaries when absent
  std::optional<double> overlap_area;       ///< computed from the bboxes when absent
  double high_score = 0.0;
  double candidate_score = 0.0;
};

struct Evidence {
  double mean_difference = 0.0;
  double range_excess = 0.0;  ///< largest amount the candidate range extends past the high range
  std::optional<double> within_share;
  double combined_stddev = 0.0;
  std::optional<double> max_stddev;  ///< over the defined individual stds
  double overlap_area = 0.0;
  double overlap_fraction = 0.0;
  std::optional<TTest> t_test;
  bool means_close = false;
  bool range_ok = false;
  bool mostly_within = false;
  std::optional<bool> spread_ok;  ///< empty when no individual std is defined
  bool equal_score = false;
};

struct ConsistencyVerdict {
  Verdict verdict = Verdict::Indeterminate;
  Evidence evidence;
};

ConsistencyVerdict element_consistency(const PairStats& p, const CriteriaConfig& cfg);

/// For samples whose regions do not overlap: consistent when the residual
/// ranges overlap or nearly touch and the means are close.
bool disjoint_stats_consistent(const PairStats& p, const CriteriaConfig& cfg);

/// A region and its retested sub-regions, for summary-only workflows.
struct StatsNode {
  std::string label;
  PairStats stats;
  std::vector<StatsNode> children;
};

struct TrailEntry {
  std::string label;
  int depth = 0;
  Verdict verdict = Verdict::Indeterminate;
  std::string rule;
};

struct StatsResolution {
  Verdict verdict = Verdict::Indeterminate;
  std::vector<TrailEntry> trail;
};

/// Classifies the root and, while inconclusive, its children. A node whose
/// candidate is empty is accepted, a node with disjoint bboxes uses the
/// disjoint rule.
StatsResolution subdivide_and_retest(const StatsNode& root, const CriteriaConfig& cfg);

enum class Reason : std::uint8_t {
  Highest,            ///< survey with the highest score in the element
  NoHigherData,       ///< no accepted points of other surveys in the element
  Consistent,
  DisjointFar,
  NearestPair,
  Majority,
  OutsideReference,
  RemovedInconsistent,
  RemovedNearestPair,
  RemovedMajority,
};
std::string_view to_string(Reason r);
inline bool is_removal(Reason r) { return r >= Reason::RemovedInconsistent; }

/// One classification in the element-wise test.
struct VerdictRecord {
  std::size_t element = 0;
  std::string high_id;
  std::string candidate_id;
  int depth = 0;
  Box region{};
  Verdict verdict = Verdict::Indeterminate;
  std::string action;
  PairStats stats;  ///< residual vector dropped
  Evidence evidence;
};

struct SurveyDecision {
  std::string id;
  double score = 0.0;
  std::vector<char> kept;
  std::vector<Reason> reason;
  std::vector<std::size_t> element;  ///< kNoElement outside the reference domain
  std::size_t removed() const;
};

struct DeconflictResult {
  std::vector<SurveyDecision> decisions;  ///< in input order
  std::vector<std::size_t> order;         ///< input indices by descending score, then id
  std::vector<VerdictRecord> log;
  std::vector<std::string> notes;

  std::vector<Survey> cleaned(std::span<const Survey> surveys) const;
  std::size_t removed() const;
};

/// Blend of recency, acquisition method and density in [0, 1]; missing
/// components count as 0.5.
double default_score(const SurveyMetadata& meta);

/// The supplied score if present, the default score otherwise.
double survey_score(const Survey& s);

/// Coarse fit of all survey points with `level` refinement iterations.
LRSurface build_reference(std::span<const Survey> surveys, FitConfig cfg, int level = 3);

/// Element-wise, score-ordered consistency test of every survey against the
/// surveys accepted before it. Residuals are taken against `reference`.
DeconflictResult deconflict(std::span<const Survey> surveys, const LRSurface& reference,
                            const CriteriaConfig& cfg);

}  // namespace lrb
