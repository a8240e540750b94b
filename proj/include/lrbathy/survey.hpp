#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lrbathy/geometry.hpp"

namespace lrb {

/// Acquisition metadata of a survey. Every field is optional; missing values
/// are neutral for the default scorer.
struct SurveyMetadata {
  std::optional<double> score;   ///< user-supplied priority in [0, 1]
  std::string method;            ///< e.g. "mbes", "sbes", "lidar"
  std::string date;              ///< ISO 8601, YYYY-MM-DD
  std::optional<double> density; ///< points per square unit
  std::string provenance;
  std::string horizontal_units;  ///< empty when not declared
  std::string vertical_units;
};

struct Survey {
  std::string id;
  std::vector<Point3> points;
  SurveyMetadata meta;
};

}  // namespace lrb
