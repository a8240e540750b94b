#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lrbathy/adaptive.hpp"
#include "lrbathy/deconflict.hpp"
#include "lrbathy/evaluate.hpp"
#include "lrbathy/survey.hpp"

// Delimited-text exports. All numbers are written with 17 significant digits
// so that a report can be re-derived bit for bit from the exported files.

namespace lrb {

/// iteration,method,file_size,coefficients,max_distance,average_distance,out_of_tolerance
void write_iteration_report(std::ostream& out, std::span<const IterationReport> reports,
                            std::span<const Approximation> methods);

/// Fixed-width table of the same columns for terminals.
void print_iteration_table(std::ostream& out, std::span<const IterationReport> reports,
                           std::span<const Approximation> methods);

/// x,y,z,residual,element,class (residual and element empty outside the domain)
void write_distance_field(std::ostream& out, std::span<const Point3> pts, const DistanceField& f);

/// survey,x,y,z,status,element,reason
void write_removal_report(std::ostream& out, std::span<const Survey> surveys, const DeconflictResult& r);

/// One row per classification with every criterion value.
void write_verdict_log(std::ostream& out, std::span<const VerdictRecord> log);

/// Accuracy of one survey against a surface.
struct SurveyAccuracy {
  std::string id;
  std::size_t points = 0;
  std::size_t outside = 0;
  double max_below = 0.0;  ///< most negative residual
  double max_above = 0.0;  ///< most positive residual
  double average = 0.0;    ///< mean absolute residual
  double z_min = 0.0;
  double z_max = 0.0;
  std::size_t out_of_tolerance = 0;
};

std::vector<SurveyAccuracy> accuracy_table(std::span<const Survey> surveys, const LRSurface& s, double tolerance);

/// survey,points,outside,max_below,max_above,average,z_min,z_max,out_of_tolerance
void write_accuracy_table(std::ostream& out, std::span<const SurveyAccuracy> rows);

}  // namespace lrb
