#include <algorithm>
#include <random>

#include "doctest.h"
#include "element_examples.hpp"
#include "lrbathy/deconflict.hpp"
#include "lrbathy/error.hpp"
#include "lrbathy/synthetic.hpp"

using namespace lrb;

namespace {

PairStats scaled(PairStats p, double k) {
  for (SampleStats* s : {&p.high, &p.candidate}) {
    s->mean *= k;
    s->min *= k;
    s->max *= k;
    if (s->stddev) *s->stddev *= k;
  }
  for (auto& r : p.candidate_residuals) r *= k;
  if (p.combined_stddev) *p.combined_stddev *= k;
  return p;
}

StatsNode scaled(StatsNode n, double k) {
  n.stats = scaled(n.stats, k);
  for (auto& c : n.children) c = scaled(c, k);
  return n;
}

struct PairRun {
  std::vector<Survey> surveys;
  double tolerance = 0.0;
  DeconflictResult result;
};

PairRun run_pair(double offset_in_tolerances, double noise_in_tolerances) {
  SurveyPairSpec spec;
  PairRun run;
  run.tolerance = survey_pair_tolerance(spec);
  spec.offset = offset_in_tolerances * run.tolerance;
  spec.noise = noise_in_tolerances * run.tolerance;
  run.surveys = synthetic_survey_pair(spec);
  FitConfig fc;
  fc.tolerance = run.tolerance;
  const LRSurface ref = build_reference(run.surveys, fc);
  CriteriaConfig cc;
  cc.tolerance = run.tolerance;
  run.result = deconflict(run.surveys, ref, cc);
  return run;
}

double overlap_right_edge(const SurveyPairSpec& spec) { return spec.extent / (2.0 - spec.overlap_fraction); }

}  // namespace

TEST_CASE("nearly coincident surveys are consistent despite a large t value") {
  const CriteriaConfig cfg;
  const auto v = element_consistency(examples::example1(), cfg);
  CHECK(v.verdict == Verdict::Consistent);
  CHECK(v.evidence.means_close);
  CHECK(v.evidence.range_ok);
  CHECK(v.evidence.mostly_within);
  REQUIRE(v.evidence.spread_ok);
  CHECK(*v.evidence.spread_ok);
  REQUIRE(v.evidence.t_test);
  CHECK(v.evidence.t_test->rejects_equal_means);
  CHECK(v.evidence.overlap_area == 1802.3);
}

TEST_CASE("spread-out element is retested on sub-domains and accepted") {
  const CriteriaConfig cfg;
  const auto root = examples::example2();
  const auto top = element_consistency(root.stats, cfg);
  CHECK(top.verdict == Verdict::Indeterminate);
  CHECK_FALSE(top.evidence.range_ok);

  const auto res = subdivide_and_retest(root, cfg);
  CHECK(res.verdict == Verdict::Consistent);
  auto find = [&](const std::string& label) {
    auto it = std::find_if(res.trail.begin(), res.trail.end(), [&](const TrailEntry& t) { return t.label == label; });
    REQUIRE(it != res.trail.end());
    return *it;
  };
  CHECK(find("element").verdict == Verdict::Indeterminate);
  CHECK(find("1").verdict == Verdict::Consistent);
  CHECK(find("2").verdict == Verdict::Consistent);
  CHECK(find("3").verdict == Verdict::Indeterminate);
  CHECK(find("3b").verdict == Verdict::Consistent);
  CHECK(find("4").verdict == Verdict::Consistent);
  CHECK(find("3b").depth == 2);
}

TEST_CASE("verdicts are invariant under a common scaling of heights and tolerance") {
  for (double k : {0.1, 3.0, 40.0}) {
    CriteriaConfig cfg;
    cfg.tolerance *= k;
    CHECK(element_consistency(scaled(examples::example1(), k), cfg).verdict == Verdict::Consistent);
    const auto res = subdivide_and_retest(scaled(examples::example2(), k), cfg);
    CHECK(res.verdict == Verdict::Consistent);
    CHECK(res.trail.size() == subdivide_and_retest(examples::example2(), CriteriaConfig{}).trail.size());
  }
}

TEST_CASE("clearly offset samples are not consistent") {
  CriteriaConfig cfg;
  PairStats p = examples::example1();
  p.candidate.mean += 4 * cfg.tolerance;
  p.candidate.min += 4 * cfg.tolerance;
  p.candidate.max += 4 * cfg.tolerance;
  p.combined_stddev.reset();
  CHECK(element_consistency(p, cfg).verdict == Verdict::NotConsistent);
}

TEST_CASE("equal scores with little overlap short-circuit to consistent") {
  CriteriaConfig cfg;
  PairStats p = examples::example1();
  p.candidate.mean += 4 * cfg.tolerance;
  p.candidate.min += 4 * cfg.tolerance;
  p.candidate.max += 4 * cfg.tolerance;
  p.candidate_score = p.high_score;
  p.overlap_area = 0.01 * p.candidate.bbox_area();
  const auto v = element_consistency(p, cfg);
  CHECK(v.evidence.equal_score);
  CHECK(v.verdict == Verdict::Consistent);
}

TEST_CASE("single-point candidate uses the range criteria only") {
  CriteriaConfig cfg;
  PairStats p;
  p.high = examples::stats(20, -0.2, 0.2, 0.0, 0.1, examples::square(0, 0, 100));
  p.candidate = examples::stats(1, 0.1, 0.1, 0.1, std::nullopt, examples::point(5, 5));
  p.combined_stddev = 0.1;
  const auto v = element_consistency(p, cfg);
  CHECK_FALSE(v.evidence.t_test);
  CHECK(v.verdict == Verdict::Consistent);
}

TEST_CASE("default score") {
  SurveyMetadata none;
  CHECK(default_score(none) == doctest::Approx(0.5));

  SurveyMetadata a;
  a.date = "2000-01-01";
  a.method = "lidar";
  a.density = 3.0;
  CHECK(default_score(a) == doctest::Approx(0.5 * 0.5 + 0.3 * 0.9 + 0.2 * 0.75));

  SurveyMetadata newer = a;
  newer.date = "2015-06-01";
  CHECK(default_score(newer) > default_score(a));
  CHECK(default_score(a) == default_score(SurveyMetadata(a)));

  Survey s;
  s.meta = a;
  s.meta.score = 0.12;
  CHECK(survey_score(s) == 0.12);
}

TEST_CASE("single survey passes through") {
  SurveyPairSpec spec;
  spec.points_per_survey = 3000;
  auto surveys = synthetic_survey_pair(spec);
  surveys.resize(1);
  FitConfig fc;
  fc.tolerance = survey_pair_tolerance(spec);
  const auto ref = build_reference(surveys, fc);
  CriteriaConfig cc;
  cc.tolerance = fc.tolerance;
  const auto r = deconflict(surveys, ref, cc);
  CHECK(r.removed() == 0);
  REQUIRE(r.notes.size() >= 1);
  const auto cleaned = r.cleaned(surveys);
  REQUIRE(cleaned.size() == 1);
  CHECK(cleaned[0].points.size() == surveys[0].points.size());
}

TEST_CASE("invalid survey sets are rejected") {
  SurveyPairSpec spec;
  spec.points_per_survey = 2000;
  auto surveys = synthetic_survey_pair(spec);
  FitConfig fc;
  fc.tolerance = survey_pair_tolerance(spec);
  const auto ref = build_reference(surveys, fc, 1);
  CriteriaConfig cc;
  cc.tolerance = fc.tolerance;
  auto dup = surveys;
  dup[1].id = dup[0].id;
  CHECK_THROWS_AS(deconflict(dup, ref, cc), InputError);
  auto bad = surveys;
  bad[0].meta.score = 1.5;
  CHECK_THROWS_AS(deconflict(bad, ref, cc), InputError);
}

TEST_CASE("offset overlap points of the lower score survey are removed") {
  const auto run = run_pair(4.0, 0.0);
  const double edge = overlap_right_edge(SurveyPairSpec{});
  const auto& a = run.result.decisions[0];
  const auto& b = run.result.decisions[1];
  CHECK(a.removed() == 0);
  std::size_t overlap = 0, removed = 0, other_lost = 0;
  for (std::size_t i = 0; i < run.surveys[1].points.size(); ++i) {
    if (run.surveys[1].points[i].x <= edge) {
      ++overlap;
      removed += b.kept[i] ? 0 : 1;
    } else {
      other_lost += b.kept[i] ? 0 : 1;
    }
  }
  CHECK(overlap > 0);
  CHECK(static_cast<double>(removed) >= 0.99 * static_cast<double>(overlap));
  CHECK(static_cast<double>(other_lost) <= 0.01 * static_cast<double>(run.surveys[1].points.size() - overlap));
  for (std::size_t i = 0; i < b.kept.size(); ++i) CHECK(is_removal(b.reason[i]) == !b.kept[i]);
  CHECK_FALSE(run.result.log.empty());
}

TEST_CASE("consistent surveys keep their points") {
  const auto run = run_pair(0.0, 1.0 / 20.0);
  std::size_t total = 0;
  for (const auto& s : run.surveys) total += s.points.size();
  CHECK(static_cast<double>(run.result.removed()) <= 0.01 * static_cast<double>(total));
}

TEST_CASE("acceptance depends on score order, not input order") {
  SurveyPairSpec spec;
  spec.points_per_survey = 6000;
  const double tol = survey_pair_tolerance(spec);
  spec.offset = 4 * tol;
  auto surveys = synthetic_survey_pair(spec);
  FitConfig fc;
  fc.tolerance = tol;
  const auto ref = build_reference(surveys, fc);
  CriteriaConfig cc;
  cc.tolerance = tol;
  const auto forward = deconflict(surveys, ref, cc);
  std::vector<Survey> reversed{surveys[1], surveys[0]};
  const auto backward = deconflict(reversed, ref, cc);
  CHECK(forward.decisions[0].kept == backward.decisions[1].kept);
  CHECK(forward.decisions[1].kept == backward.decisions[0].kept);
  CHECK(forward.order == std::vector<std::size_t>{0, 1});
  CHECK(backward.order == std::vector<std::size_t>{1, 0});
}
