#include "lrbathy/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lrbathy/error.hpp"
#include "lrbathy/io.hpp"

namespace lrb {

namespace {

std::string opt(const std::optional<double>& x) { return x ? format_exact(*x) : std::string(); }

std::string flag(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_iteration_report(std::ostream& out, std::span<const IterationReport> reports,
                            std::span<const Approximation> methods) {
  out << "iteration,method,file_size,coefficients,max_distance,average_distance,out_of_tolerance\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << r.iteration << ',' << (i < methods.size() ? to_string(methods[i]) : "") << ',' << r.file_size << ','
        << r.coefficients << ',' << format_exact(r.max_distance) << ',' << format_exact(r.average_distance) << ','
        << r.out_of_tolerance << '\n';
  }
}

void print_iteration_table(std::ostream& out, std::span<const IterationReport> reports,
                           std::span<const Approximation> methods) {
  char line[160];
  std::snprintf(line, sizeof line, "%4s %6s %12s %12s %12s %12s %12s\n", "iter", "method", "size(B)", "coefs",
                "max dist", "avg dist", "out");
  out << line;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const std::string m = i < methods.size() ? to_string(methods[i]) : "";
    std::snprintf(line, sizeof line, "%4d %6s %12zu %12zu %12.4f %12.5f %12zu\n", r.iteration, m.c_str(), r.file_size,
                  r.coefficients, r.max_distance, r.average_distance, r.out_of_tolerance);
    out << line;
  }
}

void write_distance_field(std::ostream& out, std::span<const Point3> pts, const DistanceField& f) {
  if (pts.size() != f.size()) throw InputError("distance field does not match the point set");
  out << "x,y,z,residual,element,class\n";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& p = pts[k];
    out << format_exact(p.x) << ',' << format_exact(p.y) << ',' << format_exact(p.z) << ',';
    if (f.element[k] != kNoElement) out << format_exact(f.residual[k]) << ',' << f.element[k];
    else out << ',';
    out << ',' << to_string(f.classification[k]) << '\n';
  }
}

void write_removal_report(std::ostream& out, std::span<const Survey> surveys, const DeconflictResult& r) {
  if (surveys.size() != r.decisions.size()) throw InputError("survey list does not match the deconfliction result");
  out << "survey,x,y,z,status,element,reason\n";
  for (std::size_t s = 0; s < surveys.size(); ++s) {
    const auto& d = r.decisions[s];
    for (std::size_t i = 0; i < surveys[s].points.size(); ++i) {
      const auto& p = surveys[s].points[i];
      out << surveys[s].id << ',' << format_exact(p.x) << ',' << format_exact(p.y) << ',' << format_exact(p.z) << ','
          << (d.kept[i] ? "kept" : "removed") << ',';
      if (d.element[i] != kNoElement) out << d.element[i];
      out << ',' << to_string(d.reason[i]) << '\n';
    }
  }
}

void write_verdict_log(std::ostream& out, std::span<const VerdictRecord> log) {
  out << "element,high,candidate,depth,umin,umax,vmin,vmax,verdict,action,"
         "n_high,n_candidate,mean_high,mean_candidate,std_high,std_candidate,"
         "min_high,max_high,min_candidate,max_candidate,mean_difference,range_excess,within_share,"
         "combined_std,overlap_area,overlap_fraction,t,df,t_critical,"
         "means_close,range_ok,mostly_within,spread_ok,equal_score\n";
  for (const auto& r : log) {
    const auto& h = r.stats.high;
    const auto& c = r.stats.candidate;
    const auto& e = r.evidence;
    out << r.element << ',' << r.high_id << ',' << r.candidate_id << ',' << r.depth << ','
        << format_exact(r.region.umin) << ',' << format_exact(r.region.umax) << ',' << format_exact(r.region.vmin)
        << ',' << format_exact(r.region.vmax) << ',' << to_string(r.verdict) << ',' << r.action << ',' << h.n << ','
        << c.n << ',' << format_exact(h.mean) << ',' << format_exact(c.mean) << ',' << opt(h.stddev) << ','
        << opt(c.stddev) << ',' << format_exact(h.min) << ',' << format_exact(h.max) << ',' << format_exact(c.min)
        << ',' << format_exact(c.max) << ',' << format_exact(e.mean_difference) << ','
        << format_exact(e.range_excess) << ',' << opt(e.within_share) << ',' << format_exact(e.combined_stddev)
        << ',' << format_exact(e.overlap_area) << ',' << format_exact(e.overlap_fraction) << ',';
    if (e.t_test) {
      out << format_exact(e.t_test->t) << ',' << format_exact(e.t_test->df) << ',' << format_exact(e.t_test->critical);
    } else {
      out << ",,";
    }
    out << ',' << flag(e.means_close) << ',' << flag(e.range_ok) << ',' << flag(e.mostly_within) << ','
        << (e.spread_ok ? flag(*e.spread_ok) : std::string()) << ',' << flag(e.equal_score) << '\n';
  }
}

std::vector<SurveyAccuracy> accuracy_table(std::span<const Survey> surveys, const LRSurface& s, double tolerance) {
  std::vector<SurveyAccuracy> rows;
  for (const auto& sv : surveys) {
    SurveyAccuracy a;
    a.id = sv.id;
    a.points = sv.points.size();
    const DistanceField f = distance_field(s, sv.points, tolerance);
    a.outside = f.outside;
    a.out_of_tolerance = f.out_of_tolerance();
    a.average = f.mean_abs();
    bool first = true;
    for (std::size_t k = 0; k < sv.points.size(); ++k) {
      const double z = sv.points[k].z;
      a.z_min = first ? z : std::min(a.z_min, z);
      a.z_max = first ? z : std::max(a.z_max, z);
      first = false;
      if (f.element[k] == kNoElement) continue;
      a.max_below = std::min(a.max_below, f.residual[k]);
      a.max_above = std::max(a.max_above, f.residual[k]);
    }
    rows.push_back(a);
  }
  return rows;
}

void write_accuracy_table(std::ostream& out, std::span<const SurveyAccuracy> rows) {
  out << "survey,points,outside,max_below,max_above,average,z_min,z_max,out_of_tolerance\n";
  for (const auto& a : rows) {
    out << a.id << ',' << a.points << ',' << a.outside << ',' << format_exact(a.max_below) << ','
        << format_exact(a.max_above) << ',' << format_exact(a.average) << ',' << format_exact(a.z_min) << ','
        << format_exact(a.z_max) << ',' << a.out_of_tolerance << '\n';
  }
}

}  // namespace lrb
