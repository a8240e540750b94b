#include "lrbathy/deconflict.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "lrbathy/error.hpp"
#include "lrbathy/evaluate.hpp"
#include "lrbathy/parallel.hpp"

namespace lrb {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::NotConsistent: return "not-consistent";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

std::string_view to_string(Reason r) {
  switch (r) {
    case Reason::Highest: return "highest";
    case Reason::NoHigherData: return "no-higher-data";
    case Reason::Consistent: return "consistent";
    case Reason::DisjointFar: return "disjoint-far";
    case Reason::NearestPair: return "nearest-pair";
    case Reason::Majority: return "majority";
    case Reason::OutsideReference: return "outside-reference";
    case Reason::RemovedInconsistent: return "removed-inconsistent";
    case Reason::RemovedNearestPair: return "removed-nearest-pair";
    case Reason::RemovedMajority: return "removed-majority";
  }
  return "?";
}

ConsistencyVerdict element_consistency(const PairStats& p, const CriteriaConfig& cfg) {
  ConsistencyVerdict out;
  Evidence& e = out.evidence;
  const SampleStats& h = p.high;
  const SampleStats& c = p.candidate;
  const double tol = cfg.tolerance;

  if (h.n == 0 || c.n == 0) {
    out.verdict = Verdict::Consistent;
    return out;
  }

  e.mean_difference = std::abs(h.mean - c.mean);
  e.range_excess = std::max(h.min - c.min, c.max - h.max);
  e.combined_stddev = p.combined_stddev.value_or(combined_stddev(h, c));
  if (h.stddev || c.stddev) e.max_stddev = std::max(h.stddev.value_or(0.0), c.stddev.value_or(0.0));
  e.overlap_area = p.overlap_area.value_or(boxes_intersect(h.bbox, c.bbox) ? intersect(h.bbox, c.bbox).area() : 0.0);
  const double smaller = std::min(h.bbox_area(), c.bbox_area());
  e.overlap_fraction = smaller > 0.0 ? std::clamp(e.overlap_area / smaller, 0.0, 1.0) : 0.0;
  e.t_test = two_sample_t(h, c, cfg.alpha, cfg.df_method);

  e.means_close = e.mean_difference <= cfg.mean_factor * tol;
  e.range_ok = e.range_excess <= cfg.range_allowance * tol;
  const double lo = h.min - cfg.within_allowance * tol;
  const double hi = h.max + cfg.within_allowance * tol;
  if (!p.candidate_residuals.empty()) {
    const auto inside = std::count_if(p.candidate_residuals.begin(), p.candidate_residuals.end(),
                                      [&](double r) { return r >= lo && r <= hi; });
    e.within_share = static_cast<double>(inside) / static_cast<double>(p.candidate_residuals.size());
    e.mostly_within = *e.within_share >= cfg.within_fraction;
  } else {
    e.mostly_within = c.min >= lo && c.max <= hi;
  }
  if (e.max_stddev) e.spread_ok = e.combined_stddev <= cfg.spread_factor * *e.max_stddev;
  e.equal_score = std::abs(p.high_score - p.candidate_score) < cfg.equal_score_epsilon &&
                  e.overlap_fraction < cfg.equal_score_overlap;

  if (e.equal_score || (e.means_close && e.range_ok && e.mostly_within && e.spread_ok.value_or(true))) {
    out.verdict = Verdict::Consistent;
  } else if (e.overlap_fraction < cfg.significant_overlap) {
    out.verdict = Verdict::Indeterminate;
  } else if (e.max_stddev && *e.max_stddev > cfg.large_stddev * tol) {
    out.verdict = Verdict::Indeterminate;
  } else {
    out.verdict = Verdict::NotConsistent;
  }
  return out;
}

bool disjoint_stats_consistent(const PairStats& p, const CriteriaConfig& cfg) {
  const SampleStats& h = p.high;
  const SampleStats& c = p.candidate;
  const double gap = std::max(c.min - h.max, h.min - c.max);
  return gap <= cfg.range_allowance * cfg.tolerance && std::abs(h.mean - c.mean) <= cfg.mean_factor * cfg.tolerance;
}

namespace {

Verdict resolve_node(const StatsNode& node, int depth, const CriteriaConfig& cfg, std::vector<TrailEntry>& trail) {
  const PairStats& p = node.stats;
  auto record = [&](Verdict v, std::string rule) {
    trail.push_back({node.label, depth, v, std::move(rule)});
    return v;
  };
  if (p.candidate.n == 0) return record(Verdict::Consistent, "no candidate data");
  if (p.high.n == 0) return record(Verdict::Consistent, "no higher-priority data");

  const Verdict v = element_consistency(p, cfg).verdict;
  if (v == Verdict::Consistent) return record(v, "criteria");
  if (!boxes_intersect(p.high.bbox, p.candidate.bbox)) {
    return record(disjoint_stats_consistent(p, cfg) ? Verdict::Consistent : Verdict::NotConsistent, "disjoint");
  }
  record(v, "criteria");
  if (v != Verdict::Indeterminate || node.children.empty() || depth >= cfg.max_depth) return v;

  Verdict combined = Verdict::Consistent;
  for (const auto& child : node.children) {
    const Verdict cv = resolve_node(child, depth + 1, cfg, trail);
    if (cv == Verdict::NotConsistent) {
      combined = Verdict::NotConsistent;
    } else if (cv == Verdict::Indeterminate && combined == Verdict::Consistent) {
      combined = Verdict::Indeterminate;
    }
  }
  trail.push_back({node.label, depth, combined, "sub-regions"});
  return combined;
}

}  // namespace

StatsResolution subdivide_and_retest(const StatsNode& root, const CriteriaConfig& cfg) {
  StatsResolution r;
  r.verdict = resolve_node(root, 0, cfg, r.trail);
  return r;
}

// ---------------------------------------------------------------------------
// Point-based deconfliction

std::size_t SurveyDecision::removed() const {
  return static_cast<std::size_t>(std::count(kept.begin(), kept.end(), 0));
}

std::size_t DeconflictResult::removed() const {
  std::size_t n = 0;
  for (const auto& d : decisions) n += d.removed();
  return n;
}

std::vector<Survey> DeconflictResult::cleaned(std::span<const Survey> surveys) const {
  if (surveys.size() != decisions.size()) throw InputError("survey list does not match the deconfliction result");
  std::vector<Survey> out;
  out.reserve(surveys.size());
  for (std::size_t s = 0; s < surveys.size(); ++s) {
    Survey c;
    c.id = surveys[s].id;
    c.meta = surveys[s].meta;
    for (std::size_t i = 0; i < surveys[s].points.size(); ++i) {
      if (decisions[s].kept[i]) c.points.push_back(surveys[s].points[i]);
    }
    out.push_back(std::move(c));
  }
  return out;
}

double default_score(const SurveyMetadata& meta) {
  double recency = 0.5;
  int y = 0, m = 1, d = 1;
  if (!meta.date.empty() && std::sscanf(meta.date.c_str(), "%d-%d-%d", &y, &m, &d) >= 1) {
    const double t = y + (std::clamp(m, 1, 12) - 1) / 12.0 + (std::clamp(d, 1, 31) - 1) / 365.0;
    recency = std::clamp((t - 1970.0) / 60.0, 0.0, 1.0);
  }
  double method = 0.5;
  std::string tag = meta.method;
  std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (tag == "mbes") {
    method = 1.0;
  } else if (tag == "lidar") {
    method = 0.9;
  } else if (tag == "sbes") {
    method = 0.6;
  }
  double density = 0.5;
  if (meta.density && *meta.density >= 0.0) density = *meta.density / (*meta.density + 1.0);
  return 0.5 * recency + 0.3 * method + 0.2 * density;
}

double survey_score(const Survey& s) { return s.meta.score.value_or(default_score(s.meta)); }

LRSurface build_reference(std::span<const Survey> surveys, FitConfig cfg, int level) {
  std::vector<Point3> all;
  for (const auto& s : surveys) all.insert(all.end(), s.points.begin(), s.points.end());
  cfg.max_iterations = level;
  return fit(all, cfg).surface;
}

namespace {

enum class Outcome : std::uint8_t { Keep, Remove, Pending };

struct PairResult {
  Outcome outcome = Outcome::Keep;
  Reason reason = Reason::Consistent;
  bool tie_keep = true;
};

// The data of one survey inside one element.
struct LocalSample {
  std::vector<Point3> pos;
  std::vector<double> residual;
};

struct PairContext {
  const CriteriaConfig& cfg;
  const LocalSample& high;
  const LocalSample& cand;
  std::size_t element;
  double element_width;
  const std::string& high_id;
  const std::string& cand_id;
  double high_score;
  double cand_score;
  std::vector<VerdictRecord>& log;
  std::vector<PairResult>& result;  // per candidate point
};

using Indices = std::vector<std::size_t>;

SampleStats subset_stats(const LocalSample& s, const Indices& idx, std::vector<double>* residuals = nullptr) {
  std::vector<double> r;
  std::vector<Point3> p;
  r.reserve(idx.size());
  p.reserve(idx.size());
  for (std::size_t i : idx) {
    r.push_back(s.residual[i]);
    p.push_back(s.pos[i]);
  }
  SampleStats st = sample_stats(r, p);
  if (residuals) *residuals = std::move(r);
  return st;
}

// Nearest higher-priority point of the element; far points are kept, near ones
// must agree within the tolerance plus a slope allowance growing with distance.
PairResult nearest_pair(const PairContext& ctx, std::size_t c) {
  const Point3& q = ctx.cand.pos[c];
  double best = INFINITY;
  std::size_t nn = 0;
  for (std::size_t i = 0; i < ctx.high.pos.size(); ++i) {
    const double dx = ctx.high.pos[i].x - q.x;
    const double dy = ctx.high.pos[i].y - q.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best) {
      best = d2;
      nn = i;
    }
  }
  const double tol = ctx.cfg.tolerance;
  const double w = ctx.element_width;
  const double d = std::sqrt(best);
  if (!std::isfinite(d) || d >= ctx.cfg.far_gap_elements * w) return {Outcome::Keep, Reason::DisjointFar, true};
  const bool ok = std::abs(ctx.cand.residual[c] - ctx.high.residual[nn]) <= tol + (tol / w) * d;
  return ok ? PairResult{Outcome::Keep, Reason::NearestPair, true}
            : PairResult{Outcome::Remove, Reason::RemovedNearestPair, false};
}

void apply_nearest(const PairContext& ctx, const Indices& cand) {
  for (std::size_t c : cand) ctx.result[c] = nearest_pair(ctx, c);
}

void resolve(const PairContext& ctx, const Indices& high, const Indices& cand, const Box& region, int depth) {
  if (cand.empty()) return;
  if (high.empty()) {
    apply_nearest(ctx, cand);
    return;
  }
  const CriteriaConfig& cfg = ctx.cfg;
  PairStats ps;
  ps.high = subset_stats(ctx.high, high);
  ps.candidate = subset_stats(ctx.cand, cand, &ps.candidate_residuals);
  ps.high_score = ctx.high_score;
  ps.candidate_score = ctx.cand_score;
  const ConsistencyVerdict cv = element_consistency(ps, cfg);

  VerdictRecord rec;
  rec.element = ctx.element;
  rec.high_id = ctx.high_id;
  rec.candidate_id = ctx.cand_id;
  rec.depth = depth;
  rec.region = region;
  rec.verdict = cv.verdict;
  rec.evidence = cv.evidence;
  rec.stats = ps;
  rec.stats.candidate_residuals.clear();
  auto log = [&](std::string action) {
    rec.action = std::move(action);
    ctx.log.push_back(rec);
  };

  const Box& hb = ps.high.bbox;
  const Box& cb = ps.candidate.bbox;
  auto inside_high = [&](std::size_t c) { return hb.contains(ctx.cand.pos[c].x, ctx.cand.pos[c].y); };
  auto remove_inside = [&] {
    for (std::size_t c : cand) {
      ctx.result[c] = inside_high(c) ? PairResult{Outcome::Remove, Reason::RemovedInconsistent, false}
                                     : nearest_pair(ctx, c);
    }
  };

  if (cv.verdict == Verdict::Consistent) {
    log("accept");
    for (std::size_t c : cand) ctx.result[c] = {Outcome::Keep, Reason::Consistent, true};
    return;
  }
  if (!boxes_intersect(hb, cb)) {
    log("nearest-pair");
    apply_nearest(ctx, cand);
    return;
  }
  if (depth >= cfg.max_depth) {
    if (cv.verdict == Verdict::NotConsistent) {
      log("remove-inside");
      remove_inside();
    } else {
      log("pending");
      for (std::size_t c : cand) {
        const PairResult tie = nearest_pair(ctx, c);
        ctx.result[c] = {Outcome::Pending, tie.reason, tie.outcome == Outcome::Keep};
      }
    }
    return;
  }

  const double nu = cfg.neighbourhood_fraction * region.width();
  const double nv = cfg.neighbourhood_fraction * region.height();
  if (cv.verdict == Verdict::Indeterminate && cv.evidence.overlap_fraction < cfg.significant_overlap &&
      cb.width() <= 2.0 * nu && cb.height() <= 2.0 * nv) {
    const Box nb = intersect(cb.expanded(nu, nv), region);
    if (nb.area() < region.area()) {
      log("shrink");
      Indices sub;
      for (std::size_t i : high) {
        if (nb.contains(ctx.high.pos[i].x, ctx.high.pos[i].y)) sub.push_back(i);
      }
      resolve(ctx, sub, cand, nb, depth + 1);
      return;
    }
  }
  if (cv.verdict == Verdict::NotConsistent) {
    const double ca = cb.area();
    const double inside = ca > 0.0 ? intersect(cb, hb).area() / ca : (hb.contains(cb) ? 1.0 : 0.0);
    if (inside >= cfg.contained_fraction) {
      log("remove-inside");
      remove_inside();
      return;
    }
  }

  log("split");
  const double mu = region.center_u();
  const double mv = region.center_v();
  const Box quads[4] = {{region.umin, mu, region.vmin, mv},
                        {mu, region.umax, region.vmin, mv},
                        {region.umin, mu, mv, region.vmax},
                        {mu, region.umax, mv, region.vmax}};
  auto quadrant = [&](const Point3& p) { return (p.x < mu ? 0 : 1) + (p.y < mv ? 0 : 2); };
  Indices hq[4], cq[4];
  for (std::size_t i : high) hq[quadrant(ctx.high.pos[i])].push_back(i);
  for (std::size_t c : cand) cq[quadrant(ctx.cand.pos[c])].push_back(c);
  for (int q = 0; q < 4; ++q) resolve(ctx, hq[q], cq[q], quads[q], depth + 1);
}

// Per point state while combining the comparisons with every accepted survey.
struct PointState {
  Reason reason = Reason::NoHigherData;
  bool removed = false;
  bool decided = false;
  std::vector<std::pair<std::size_t, bool>> pending;  // (high survey, tie-break keep)
};

struct ElementOutcome {
  std::vector<VerdictRecord> log;
  std::vector<std::vector<PointState>> states;  // by order position, then element-local point
};

}  // namespace

DeconflictResult deconflict(std::span<const Survey> surveys, const LRSurface& reference, const CriteriaConfig& cfg) {
  if (!(cfg.tolerance > 0.0)) throw InputError("deconfliction tolerance must be positive");
  if (reference.size() == 0) throw InputError("reference surface is empty");
  DeconflictResult out;
  const std::size_t ns = surveys.size();

  std::vector<double> score(ns);
  std::set<std::string> ids;
  for (std::size_t s = 0; s < ns; ++s) {
    if (!ids.insert(surveys[s].id).second) throw InputError("duplicate survey id '" + surveys[s].id + "'");
    score[s] = survey_score(surveys[s]);
    if (!(score[s] >= 0.0 && score[s] <= 1.0)) {
      throw InputError("score of survey '" + surveys[s].id + "' is outside [0, 1]");
    }
  }
  out.order.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) out.order[s] = s;
  std::sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return surveys[a].id < surveys[b].id;
  });

  std::vector<DistanceField> fields;
  fields.reserve(ns);
  for (const auto& s : surveys) fields.push_back(distance_field(reference, s.points, cfg.tolerance));

  const auto topo = reference.topology();
  const std::size_t ne = topo->elements.size();
  std::vector<ElementOutcome> per_element(ne);

  parallel_chunks(
      ne,
      [&](std::size_t eb, std::size_t ee) {
        for (std::size_t e = eb; e < ee; ++e) {
          ElementOutcome& eo = per_element[e];
          eo.states.resize(ns);
          const Box& box = topo->elements[e].box;
          const double width = std::max(box.width(), box.height());
          std::vector<LocalSample> local(ns);
          std::vector<std::size_t> accepted;  // order positions with points in this element
          for (std::size_t k = 0; k < ns; ++k) {
            const std::size_t s = out.order[k];
            const auto& idx = fields[s].element_points[e];
            if (idx.empty()) continue;
            LocalSample& ls = local[k];
            for (std::size_t i : idx) {
              ls.pos.push_back(surveys[s].points[i]);
              ls.residual.push_back(fields[s].residual[i]);
            }
            auto& states = eo.states[k];
            states.assign(idx.size(), PointState{});
            if (accepted.empty()) {
              for (auto& st : states) st = {Reason::Highest, false, true, {}};
              accepted.push_back(k);
              continue;
            }
            for (std::size_t a : accepted) {
              // Accepted points of an earlier survey: those not removed in this element.
              LocalSample high;
              for (std::size_t i = 0; i < local[a].pos.size(); ++i) {
                if (eo.states[a][i].removed) continue;
                high.pos.push_back(local[a].pos[i]);
                high.residual.push_back(local[a].residual[i]);
              }
              if (high.pos.empty()) continue;
              std::vector<PairResult> result(idx.size());
              const std::size_t sa = out.order[a];
              PairContext ctx{cfg,      high,           ls,       e,        width, surveys[sa].id, surveys[s].id,
                              score[sa], score[s], eo.log, result};
              Indices hall(high.pos.size()), call(idx.size());
              for (std::size_t i = 0; i < hall.size(); ++i) hall[i] = i;
              for (std::size_t i = 0; i < call.size(); ++i) call[i] = i;
              resolve(ctx, hall, call, box, 0);
              for (std::size_t i = 0; i < idx.size(); ++i) {
                PointState& st = states[i];
                if (st.removed) continue;
                const PairResult& r = result[i];
                if (r.outcome == Outcome::Remove) {
                  st.removed = true;
                  st.reason = r.reason;
                } else if (r.outcome == Outcome::Pending) {
                  st.pending.emplace_back(sa, r.tie_keep);
                } else if (!st.decided) {
                  st.reason = r.reason;
                  st.decided = true;
                }
              }
            }
            accepted.push_back(k);
          }
        }
      },
      8);

  // Sequential reduction: verdict log in element order, then the majority of
  // each survey pair's conclusive verdicts settles pending points.
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> tally;  // (consistent, not consistent)
  bool any_pair = false;
  for (auto& eo : per_element) {
    for (auto& rec : eo.log) {
      any_pair = true;
      auto& t = tally[{rec.high_id, rec.candidate_id}];
      if (rec.verdict == Verdict::Consistent) ++t.first;
      if (rec.verdict == Verdict::NotConsistent) ++t.second;
      out.log.push_back(std::move(rec));
    }
    eo.log.clear();
  }

  out.decisions.resize(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    auto& d = out.decisions[s];
    d.id = surveys[s].id;
    d.score = score[s];
    d.kept.assign(surveys[s].points.size(), 1);
    d.reason.assign(surveys[s].points.size(), Reason::OutsideReference);
    d.element = fields[s].element;
  }
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t k = 0; k < ns; ++k) {
      const std::size_t s = out.order[k];
      const auto& idx = fields[s].element_points[e];
      const auto& states = per_element[e].states[k];
      for (std::size_t j = 0; j < states.size(); ++j) {
        const PointState& st = states[j];
        bool removed = st.removed;
        Reason reason = st.reason;
        if (!removed) {
          for (const auto& [sa, tie_keep] : st.pending) {
            const auto& t = tally[{surveys[sa].id, surveys[s].id}];
            bool keep = tie_keep;
            Reason r = tie_keep ? Reason::NearestPair : Reason::RemovedNearestPair;
            if (t.first != t.second) {
              keep = t.first > t.second;
              r = keep ? Reason::Majority : Reason::RemovedMajority;
            }
            if (!keep) {
              removed = true;
              reason = r;
              break;
            }
            if (!st.decided) reason = r;
          }
        }
        out.decisions[s].kept[idx[j]] = removed ? 0 : 1;
        out.decisions[s].reason[idx[j]] = reason;
      }
    }
  }
  if (!any_pair) out.notes.push_back("no overlapping surveys; all points passed through unchanged");
  for (std::size_t s = 0; s < ns; ++s) {
    if (fields[s].outside > 0) {
      out.notes.push_back(std::to_string(fields[s].outside) + " points of survey '" + surveys[s].id +
                          "' lie outside the reference surface and were kept untested");
    }
  }
  return out;
}

}  // namespace lrb
