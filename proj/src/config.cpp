#include "lrbathy/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lrbathy/error.hpp"

namespace lrb {

namespace {

using nlohmann::json;

// Reads optional keys of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InputError("config section '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& target) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      target = it->template get<T>();
    } catch (const json::exception&) {
      throw InputError("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  template <class E>
  void get_enum(const char* key, E& target, std::initializer_list<std::pair<const char*, E>> names) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    for (const auto& [n, v] : names) {
      if (s == n) {
        target = v;
        return;
      }
    }
    throw InputError("config key '" + name_ + "." + key + "' has unknown value '" + s + "'");
  }

  void mark(const char* key) { seen_.insert(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw InputError("unknown config key '" + name_ + "." + k + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

const std::initializer_list<std::pair<const char*, DfMethod>> kDfNames{{"welch", DfMethod::Welch},
                                                                        {"pooled", DfMethod::Pooled}};
const std::initializer_list<std::pair<const char*, StitchMode>> kStitchNames{
    {"none", StitchMode::None}, {"c0", StitchMode::C0}, {"c1", StitchMode::C1}};

template <class E>
std::string enum_name(E v, std::initializer_list<std::pair<const char*, E>> names) {
  for (const auto& [n, x] : names) {
    if (x == v) return n;
  }
  return "";
}

}  // namespace

AppConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  AppConfig c;
  Section top(root, "config");
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& {
    top.mark(name);
    const auto it = root.find(name);
    return it == root.end() ? empty : *it;
  };

  {
    Section s(section("fit"), "fit");
    FitConfig& f = c.fit;
    s.get("tolerance", f.tolerance);
    s.get("max_iterations", f.max_iterations);
    s.get("degree_u", f.degree_u);
    s.get("degree_v", f.degree_v);
    s.get("initial_coefficients_u", f.initial_coefficients_u);
    s.get("initial_coefficients_v", f.initial_coefficients_v);
    s.get("ls_iterations", f.ls_iterations);
    s.get("auto_switch", f.auto_switch);
    s.get("auto_switch_ratio", f.auto_switch_ratio);
    s.get("aspect_threshold", f.aspect_threshold);
    s.get("min_width_exponent", f.min_width_exponent);
    s.finish();
  }
  {
    Section s(section("least_squares"), "least_squares");
    LeastSquaresOptions& o = c.fit.least_squares;
    double alpha = o.weights.alpha_smooth;
    s.get("alpha_smooth", alpha);
    o.weights.alpha_smooth = alpha;
    o.weights.alpha_data = 1.0 - alpha;
    s.get("w1", o.weights.w1);
    s.get("w2", o.weights.w2);
    s.get("w3", o.weights.w3);
    s.get("stabilize", o.stabilize);
    s.get("ghost_weight", o.ghost_weight);
    s.get("idw_neighbours", o.idw_neighbours);
    s.get("direct_solver_limit", o.direct_solver_limit);
    s.get("solver_tolerance", o.tolerance);
    s.finish();
  }
  {
    Section s(section("deconflict"), "deconflict");
    CriteriaConfig& k = c.criteria;
    s.get("level", c.deconflict_level);
    s.get("mean_factor", k.mean_factor);
    s.get("range_allowance", k.range_allowance);
    s.get("within_fraction", k.within_fraction);
    s.get("within_allowance", k.within_allowance);
    s.get("spread_factor", k.spread_factor);
    s.get("significant_overlap", k.significant_overlap);
    s.get("large_stddev", k.large_stddev);
    s.get("equal_score_epsilon", k.equal_score_epsilon);
    s.get("equal_score_overlap", k.equal_score_overlap);
    s.get("far_gap_elements", k.far_gap_elements);
    s.get("contained_fraction", k.contained_fraction);
    s.get("neighbourhood_fraction", k.neighbourhood_fraction);
    s.get("alpha", k.alpha);
    s.get_enum("df_method", k.df_method, kDfNames);
    s.get("max_depth", k.max_depth);
    s.finish();
  }
  {
    Section s(section("tiling"), "tiling");
    s.get("nx", c.tiles_x);
    s.get("ny", c.tiles_y);
    s.get("overlap", c.tile_overlap);
    s.get_enum("continuity", c.stitch, kStitchNames);
    s.finish();
  }
  top.get("threads", c.threads);
  top.finish();
  c.criteria.tolerance = c.fit.tolerance;
  check_config(c);
  return c;
}

AppConfig load_config(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InputError("cannot open config file " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const AppConfig& c) {
  const FitConfig& f = c.fit;
  const LeastSquaresOptions& o = f.least_squares;
  const CriteriaConfig& k = c.criteria;
  json j;
  j["fit"] = {{"tolerance", f.tolerance},
              {"max_iterations", f.max_iterations},
              {"degree_u", f.degree_u},
              {"degree_v", f.degree_v},
              {"initial_coefficients_u", f.initial_coefficients_u},
              {"initial_coefficients_v", f.initial_coefficients_v},
              {"ls_iterations", f.ls_iterations},
              {"auto_switch", f.auto_switch},
              {"auto_switch_ratio", f.auto_switch_ratio},
              {"aspect_threshold", f.aspect_threshold},
              {"min_width_exponent", f.min_width_exponent}};
  j["least_squares"] = {{"alpha_smooth", o.weights.alpha_smooth},
                        {"w1", o.weights.w1},
                        {"w2", o.weights.w2},
                        {"w3", o.weights.w3},
                        {"stabilize", o.stabilize},
                        {"ghost_weight", o.ghost_weight},
                        {"idw_neighbours", o.idw_neighbours},
                        {"direct_solver_limit", o.direct_solver_limit},
                        {"solver_tolerance", o.tolerance}};
  j["deconflict"] = {{"level", c.deconflict_level},
                     {"mean_factor", k.mean_factor},
                     {"range_allowance", k.range_allowance},
                     {"within_fraction", k.within_fraction},
                     {"within_allowance", k.within_allowance},
                     {"spread_factor", k.spread_factor},
                     {"significant_overlap", k.significant_overlap},
                     {"large_stddev", k.large_stddev},
                     {"equal_score_epsilon", k.equal_score_epsilon},
                     {"equal_score_overlap", k.equal_score_overlap},
                     {"far_gap_elements", k.far_gap_elements},
                     {"contained_fraction", k.contained_fraction},
                     {"neighbourhood_fraction", k.neighbourhood_fraction},
                     {"alpha", k.alpha},
                     {"df_method", enum_name(k.df_method, kDfNames)},
                     {"max_depth", k.max_depth}};
  j["tiling"] = {{"nx", c.tiles_x},
                 {"ny", c.tiles_y},
                 {"overlap", c.tile_overlap},
                 {"continuity", enum_name(c.stitch, kStitchNames)}};
  j["threads"] = c.threads;
  return j.dump(2) + "\n";
}

void check_config(const AppConfig& c) {
  const FitConfig& f = c.fit;
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InputError(what);
  };
  require(f.tolerance > 0.0, "fit.tolerance must be positive");
  require(f.max_iterations >= 0, "fit.max_iterations must be nonnegative");
  require(f.degree_u >= 1 && f.degree_u <= kMaxDerivative && f.degree_v >= 1 && f.degree_v <= kMaxDerivative,
          "fit degrees must be between 1 and 3");
  require(f.initial_coefficients_u > f.degree_u && f.initial_coefficients_v > f.degree_v,
          "initial coefficient counts must exceed the degree");
  require(f.ls_iterations >= 0, "fit.ls_iterations must be nonnegative");
  require(f.aspect_threshold >= 1.0, "fit.aspect_threshold must be at least 1");
  require(f.min_width_exponent >= 1 && f.min_width_exponent <= 40, "fit.min_width_exponent must be in [1, 40]");
  const auto& w = f.least_squares.weights;
  require(w.alpha_smooth >= 0.0 && w.alpha_smooth < 1.0, "least_squares.alpha_smooth must be in [0, 1)");
  require(w.w1 >= 0.0 && w.w2 >= 0.0 && w.w3 >= 0.0, "smoothing weights must be nonnegative");
  require(f.least_squares.ghost_weight >= 0.0, "least_squares.ghost_weight must be nonnegative");
  require(f.least_squares.idw_neighbours >= 1, "least_squares.idw_neighbours must be positive");
  const CriteriaConfig& k = c.criteria;
  require(k.alpha > 0.0 && k.alpha < 1.0, "deconflict.alpha must be in (0, 1)");
  require(k.within_fraction >= 0.0 && k.within_fraction <= 1.0, "deconflict.within_fraction must be in [0, 1]");
  require(k.max_depth >= 0, "deconflict.max_depth must be nonnegative");
  require(c.deconflict_level >= 0, "deconflict.level must be nonnegative");
  require(c.tiles_x >= 1 && c.tiles_y >= 1, "tile counts must be at least 1");
  require(c.tile_overlap >= 0.0 && c.tile_overlap < 0.5, "tiling.overlap must be in [0, 0.5)");
}

}  // namespace lrb
