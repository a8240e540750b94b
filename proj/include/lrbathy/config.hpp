#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lrbathy/adaptive.hpp"
#include "lrbathy/deconflict.hpp"
#include "lrbathy/tiling.hpp"

namespace lrb {

enum class StitchMode { None, C0, C1 };

/// Every tunable threshold in one place. The JSON form has the sections
/// "fit", "least_squares", "deconflict" and "tiling" plus "threads"; missing
/// keys keep their defaults and unknown keys are rejected.
struct AppConfig {
  FitConfig fit;
  CriteriaConfig criteria;  ///< criteria.tolerance follows fit.tolerance
  int deconflict_level = 3;
  int tiles_x = 1;
  int tiles_y = 1;
  double tile_overlap = 0.05;
  StitchMode stitch = StitchMode::C1;
  unsigned threads = 0;
};

AppConfig parse_config(std::string_view json_text);
AppConfig load_config(const std::filesystem::path& p);
std::string dump_config(const AppConfig& c);

/// Throws InputError when a value is out of range.
void check_config(const AppConfig& c);

}  // namespace lrb
