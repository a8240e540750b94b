// lrbathy: command line front end for fitting, deconflicting, stitching and
// evaluating LR B-spline bathymetry surfaces.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrbathy/adaptive.hpp"
#include "lrbathy/config.hpp"
#include "lrbathy/deconflict.hpp"
#include "lrbathy/error.hpp"
#include "lrbathy/io.hpp"
#include "lrbathy/parallel.hpp"
#include "lrbathy/report.hpp"
#include "lrbathy/synthetic.hpp"
#include "lrbathy/tiling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lrb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;
constexpr int kExitFrozen = 3;

void make_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream open_out(const fs::path& p) {
  make_parent(p);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  return out;
}

// Shared flags that override config file values.
struct Overrides {
  std::string config;
  std::optional<double> tolerance;
  std::optional<int> max_iter;
  std::optional<int> degree;
  std::optional<int> level;
  std::optional<unsigned> threads;
  std::optional<double> smoothing;
  std::optional<int> ls_iterations;
  std::string tile;
  std::string stitch;
};

AppConfig resolve_config(const Overrides& o) {
  AppConfig c = o.config.empty() ? AppConfig{} : load_config(o.config);
  if (o.tolerance) c.fit.tolerance = *o.tolerance;
  if (o.max_iter) c.fit.max_iterations = *o.max_iter;
  if (o.degree) c.fit.degree_u = c.fit.degree_v = *o.degree;
  if (o.level) c.deconflict_level = *o.level;
  if (o.threads) c.threads = *o.threads;
  if (o.smoothing) {
    c.fit.least_squares.weights.alpha_smooth = *o.smoothing;
    c.fit.least_squares.weights.alpha_data = 1.0 - *o.smoothing;
  }
  if (o.ls_iterations) c.fit.ls_iterations = *o.ls_iterations;
  if (!o.tile.empty()) {
    int nx = 0, ny = 0;
    char extra = 0;
    if (std::sscanf(o.tile.c_str(), "%dx%d%c", &nx, &ny, &extra) != 2) {
      throw InputError("--tile expects MxN, for example 2x2");
    }
    c.tiles_x = nx;
    c.tiles_y = ny;
  }
  if (!o.stitch.empty()) {
    if (o.stitch == "none") c.stitch = StitchMode::None;
    else if (o.stitch == "c0") c.stitch = StitchMode::C0;
    else if (o.stitch == "c1") c.stitch = StitchMode::C1;
    else throw InputError("--stitch expects none, c0 or c1");
  }
  c.criteria.tolerance = c.fit.tolerance;
  check_config(c);
  set_thread_count(c.threads);
  return c;
}

// Units declared by the surveys; all declared units must agree.
UnitTags common_units(std::span<const Survey> surveys) {
  std::optional<UnitTags> u;
  for (const auto& s : surveys) {
    if (s.meta.horizontal_units.empty()) continue;
    UnitTags t{s.meta.horizontal_units, s.meta.vertical_units};
    if (u && !(*u == t)) {
      throw InputError("inconsistent units: survey '" + s.id + "' uses " + t.horizontal + "/" + t.vertical +
                       ", earlier input uses " + u->horizontal + "/" + u->vertical);
    }
    u = t;
  }
  return u.value_or(UnitTags{});
}

void check_units(const LRSurface& s, std::span<const Survey> surveys) {
  for (const auto& sv : surveys) {
    if (sv.meta.horizontal_units.empty()) continue;
    if (sv.meta.horizontal_units != s.units().horizontal || sv.meta.vertical_units != s.units().vertical) {
      throw InputError("inconsistent units: surface uses " + s.units().horizontal + "/" + s.units().vertical +
                       ", survey '" + sv.id + "' uses " + sv.meta.horizontal_units + "/" + sv.meta.vertical_units);
    }
  }
}

void write_report(const fs::path& p, const FitResult& r) {
  auto out = open_out(p);
  write_iteration_report(out, r.reports, r.methods);
}

std::string tile_name(const Tile& t) { return "tile_" + std::to_string(t.ix) + "_" + std::to_string(t.iy); }

json box_json(const Box& b) { return json::array({b.umin, b.umax, b.vmin, b.vmax}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw InputError("manifest box must be [umin, umax, vmin, vmax]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

std::string continuity_name(StitchMode m) {
  return m == StitchMode::None ? "none" : m == StitchMode::C0 ? "c0" : "c1";
}

void print_edges(const TileSet& set) {
  for (const auto& e : tile_edges(set)) {
    const EdgeJump j = measure_edge(set, e);
    std::printf("edge %zu|%zu %s %.6g: value jump %.3e, derivative jump %.3e (scale %.3e)\n", e.low, e.high,
                e.vertical ? "x" : "y", e.position, j.value, j.derivative, j.derivative_scale);
  }
}

void write_manifest(const fs::path& dir, const TileSet& set, StitchMode mode) {
  json m;
  m["grid"] = {{"box", box_json(set.grid.box)}, {"nx", set.grid.nx}, {"ny", set.grid.ny}, {"overlap", set.grid.overlap}};
  m["continuity"] = continuity_name(mode);
  json tiles = json::array();
  for (std::size_t t = 0; t < set.grid.tiles.size(); ++t) {
    const Tile& tile = set.grid.tiles[t];
    const TileFit& f = set.fits[t];
    json jt = {{"ix", tile.ix}, {"iy", tile.iy}, {"core", box_json(tile.core)}, {"points", f.points},
               {"frozen_elements", f.frozen_elements}};
    jt["surface"] = f.surface ? json(tile_name(tile) + ".lrs") : json(nullptr);
    jt["report"] = f.surface ? json(tile_name(tile) + ".report.csv") : json(nullptr);
    if (!f.note.empty()) jt["note"] = f.note;
    tiles.push_back(jt);
  }
  m["tiles"] = tiles;
  auto out = open_out(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

void save_tiles(const fs::path& dir, const TileSet& set) {
  for (std::size_t t = 0; t < set.fits.size(); ++t) {
    if (set.fits[t].surface) save_surface(*set.fits[t].surface, dir / (tile_name(set.grid.tiles[t]) + ".lrs"));
  }
}

TileSet load_manifest(const fs::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw InputError("cannot open manifest " + manifest.string());
  json m;
  try {
    in >> m;
    const auto& g = m.at("grid");
    TileSet set;
    set.grid = make_tiles(box_from_json(g.at("box")), g.at("nx").get<int>(), g.at("ny").get<int>(),
                          g.at("overlap").get<double>());
    set.fits.resize(set.grid.tiles.size());
    for (const auto& jt : m.at("tiles")) {
      const std::size_t t = set.grid.index(jt.at("ix").get<int>(), jt.at("iy").get<int>());
      if (t >= set.fits.size()) throw InputError("manifest tile index outside the grid");
      set.fits[t].points = jt.value("points", std::size_t{0});
      if (!jt.at("surface").is_null()) {
        set.fits[t].surface = load_surface(manifest.parent_path() / jt.at("surface").get<std::string>());
      }
    }
    return set;
  } catch (const json::exception& e) {
    throw InputError("malformed manifest " + manifest.string() + ": " + e.what());
  }
}

int run_fit(const std::string& input, const std::string& output, const std::string& report, const Overrides& o) {
  const AppConfig cfg = resolve_config(o);
  const Survey sv = load_survey(input);
  const std::vector<Survey> one{sv};
  const UnitTags units = common_units(one);

  if (cfg.tiles_x * cfg.tiles_y > 1) {
    const fs::path dir(output);
    fs::create_directories(dir);
    const TileGrid grid = make_tiles(bounding_box(sv.points), cfg.tiles_x, cfg.tiles_y, cfg.tile_overlap);
    TileSet set = fit_tiles(sv.points, grid, cfg.fit);
    std::size_t frozen = 0;
    for (std::size_t t = 0; t < set.fits.size(); ++t) {
      auto& f = set.fits[t];
      frozen += f.frozen_elements;
      if (!f.surface) {
        std::fprintf(stderr, "%s: %s\n", tile_name(grid.tiles[t]).c_str(), f.note.c_str());
        continue;
      }
      f.surface->set_units(units);
      std::printf("%s (%zu points)\n", tile_name(grid.tiles[t]).c_str(), f.points);
      std::ostringstream table;
      print_iteration_table(table, f.reports, {});
      std::fputs(table.str().c_str(), stdout);
      auto out = open_out(dir / (tile_name(grid.tiles[t]) + ".report.csv"));
      write_iteration_report(out, f.reports, {});
    }
    if (cfg.stitch != StitchMode::None) {
      stitch(set, cfg.stitch == StitchMode::C0 ? Continuity::C0 : Continuity::C1, sv.points);
    }
    save_tiles(dir, set);
    write_manifest(dir, set, cfg.stitch);
    print_edges(set);
    return frozen > 0 ? kExitFrozen : kExitOk;
  }

  FitResult r = fit(sv.points, cfg.fit);
  r.surface.set_units(units);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  make_parent(output);
  save_surface(r.surface, output);
  if (!report.empty()) write_report(report, r);
  std::ostringstream table;
  print_iteration_table(table, r.reports, r.methods);
  std::fputs(table.str().c_str(), stdout);
  if (r.outside_points > 0) std::fprintf(stderr, "%zu points lie outside the domain\n", r.outside_points);
  if (r.frozen_elements > 0) {
    std::fprintf(stderr, "%zu elements still hold out-of-tolerance points but cannot be refined further\n",
                 r.frozen_elements);
    return kExitFrozen;
  }
  return kExitOk;
}

int run_deconflict(const std::vector<std::string>& inputs, const std::string& out_dir, const Overrides& o) {
  const AppConfig cfg = resolve_config(o);
  std::vector<Survey> surveys;
  for (const auto& p : inputs) surveys.push_back(load_survey(p));
  const UnitTags units = common_units(surveys);
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  LRSurface reference = build_reference(surveys, cfg.fit, cfg.deconflict_level);
  reference.set_units(units);
  save_surface(reference, dir / "reference.lrs");

  const DeconflictResult r = deconflict(surveys, reference, cfg.criteria);
  for (const auto& n : r.notes) std::fprintf(stderr, "note: %s\n", n.c_str());
  {
    auto out = open_out(dir / "removal.csv");
    write_removal_report(out, surveys, r);
  }
  {
    auto out = open_out(dir / "verdicts.csv");
    write_verdict_log(out, r.log);
  }
  const std::vector<Survey> cleaned = r.cleaned(surveys);
  for (const auto& s : cleaned) {
    auto out = open_out(dir / (s.id + ".clean.xyz"));
    write_survey_text(s, out);
  }
  for (std::size_t k : r.order) {
    std::printf("%-16s score %.4f  kept %zu  removed %zu\n", surveys[k].id.c_str(), r.decisions[k].score,
                r.decisions[k].kept.size() - r.decisions[k].removed(), r.decisions[k].removed());
  }

  // Final surface from the cleaned data.
  std::vector<Point3> all;
  for (const auto& s : cleaned) all.insert(all.end(), s.points.begin(), s.points.end());
  FitResult final_fit = fit(all, cfg.fit);
  final_fit.surface.set_units(units);
  save_surface(final_fit.surface, dir / "final.lrs");
  write_report(dir / "final_report.csv", final_fit);
  {
    auto out = open_out(dir / "accuracy.csv");
    write_accuracy_table(out, accuracy_table(cleaned, final_fit.surface, cfg.fit.tolerance));
  }
  std::ostringstream table;
  print_iteration_table(table, final_fit.reports, final_fit.methods);
  std::fputs(table.str().c_str(), stdout);
  return final_fit.frozen_elements > 0 ? kExitFrozen : kExitOk;
}

int run_stitch(const std::string& manifest, const std::string& points, const Overrides& o) {
  AppConfig cfg = resolve_config(o);
  if (cfg.stitch == StitchMode::None) throw InputError("stitch needs --stitch c0 or c1");
  TileSet set = load_manifest(manifest);
  std::vector<Point3> pts;
  if (!points.empty()) pts = load_points(points);
  const StitchReport rep = stitch(set, cfg.stitch == StitchMode::C0 ? Continuity::C0 : Continuity::C1, pts);
  std::printf("strip width %.6g, %zu constraints, %zu coefficients adjusted\n", rep.strip_width, rep.constraints,
              rep.adjusted_coefficients);
  const fs::path dir = fs::path(manifest).parent_path();
  save_tiles(dir, set);
  write_manifest(dir, set, cfg.stitch);
  print_edges(set);
  return kExitOk;
}

int run_eval(const std::string& surface, const std::string& points, const std::string& output, const Overrides& o) {
  const AppConfig cfg = resolve_config(o);
  const LRSurface s = load_surface(surface);
  const Survey sv = load_survey(points);
  const std::vector<Survey> one{sv};
  check_units(s, one);
  const DistanceField f = distance_field(s, sv.points, cfg.fit.tolerance);
  if (!output.empty()) {
    auto out = open_out(output);
    write_distance_field(out, sv.points, f);
  }
  const IterationReport r = make_report(0, s, f);
  std::printf("file_size,coefficients,max_distance,average_distance,out_of_tolerance,outside\n");
  std::printf("%zu,%zu,%s,%s,%zu,%zu\n", r.file_size, r.coefficients, format_exact(r.max_distance).c_str(),
              format_exact(r.average_distance).c_str(), r.out_of_tolerance, f.outside);
  return kExitOk;
}

int run_report(const std::string& surface, const std::vector<std::string>& inputs, const std::string& output,
               const Overrides& o) {
  const AppConfig cfg = resolve_config(o);
  const LRSurface s = load_surface(surface);
  std::vector<Survey> surveys;
  for (const auto& p : inputs) surveys.push_back(load_survey(p));
  check_units(s, surveys);
  const auto rows = accuracy_table(surveys, s, cfg.fit.tolerance);
  std::ostringstream csv;
  write_accuracy_table(csv, rows);
  if (!output.empty()) {
    auto out = open_out(output);
    out << csv.str();
  }
  std::printf("%-16s %10s %10s %10s %10s %10s %10s %8s\n", "survey", "points", "max below", "max above", "average",
              "z min", "z max", "out");
  for (const auto& a : rows) {
    std::printf("%-16s %10zu %10.4f %10.4f %10.4f %10.3f %10.3f %8zu\n", a.id.c_str(), a.points, a.max_below,
                a.max_above, a.average, a.z_min, a.z_max, a.out_of_tolerance);
  }
  return kExitOk;
}

int run_synth(const std::string& kind, const std::string& output, std::size_t points, std::uint64_t seed,
              double offset, bool consistent) {
  if (kind == "benchmark") {
    BenchmarkSpec spec;
    if (points > 0) spec.points = points;
    if (seed > 0) spec.seed = seed;
    Survey s;
    s.id = "benchmark";
    s.points = synthetic_benchmark(spec);
    make_parent(output);
    save_survey(s, output);
    std::printf("tolerance (0.5%% of range): %s\n", format_exact(benchmark_tolerance(spec.extent)).c_str());
    return kExitOk;
  }
  if (kind == "pair") {
    SurveyPairSpec spec;
    if (points > 0) spec.points_per_survey = points;
    if (seed > 0) spec.seed = seed;
    const double tol = survey_pair_tolerance(spec);
    if (consistent) spec.noise = tol / 20.0;
    spec.offset = offset * tol;
    const fs::path dir(output);
    fs::create_directories(dir);
    for (const auto& s : synthetic_survey_pair(spec)) save_survey(s, dir / (s.id + ".xyz"));
    std::printf("tolerance (0.5%% of range): %s\n", format_exact(tol).c_str());
    return kExitOk;
  }
  throw InputError("synth kind must be 'benchmark' or 'pair'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive LR B-spline approximation and deconfliction of bathymetry point clouds"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--threads", o.threads, "worker threads (0 = all cores)");

  auto add_fit_flags = [&](CLI::App* c) {
    c->add_option("--tolerance", o.tolerance, "vertical tolerance");
    c->add_option("--max-iter", o.max_iter, "maximum refinement iterations");
    c->add_option("--degree", o.degree, "polynomial degree in both directions");
    c->add_option("--smoothing", o.smoothing, "weight of the smoothing term in least squares");
    c->add_option("--ls-iterations", o.ls_iterations, "iterations that use least squares before MBA");
  };

  std::string input, output, report, points, manifest, kind;
  std::vector<std::string> inputs;

  auto* fit_cmd = app.add_subcommand("fit", "fit a surface to a point cloud");
  fit_cmd->add_option("points", input, "point file (text or binary)")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("-o,--output", output, "surface file, or directory when tiling")->required();
  fit_cmd->add_option("--report", report, "iteration report (CSV)");
  fit_cmd->add_option("--tile", o.tile, "tile grid MxN");
  fit_cmd->add_option("--stitch", o.stitch, "tile continuity: none, c0 or c1");
  add_fit_flags(fit_cmd);

  auto* dec_cmd = app.add_subcommand("deconflict", "remove inconsistent survey data and refit");
  dec_cmd->add_option("surveys", inputs, "survey files")->required()->check(CLI::ExistingFile);
  dec_cmd->add_option("-o,--output", output, "output directory")->required();
  dec_cmd->add_option("--level", o.level, "refinement iterations of the reference surface");
  add_fit_flags(dec_cmd);

  auto* stitch_cmd = app.add_subcommand("stitch", "stitch the tiles of a manifest");
  stitch_cmd->add_option("manifest", manifest, "manifest.json written by fit --tile")->required()->check(
      CLI::ExistingFile);
  stitch_cmd->add_option("--continuity", o.stitch, "c0 or c1")->required();
  stitch_cmd->add_option("--points", points, "points used to weight the coefficient changes");

  auto* eval_cmd = app.add_subcommand("eval", "export the distance field of points against a surface");
  eval_cmd->add_option("surface", input, "surface file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("points", points, "point file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("-o,--output", output, "distance field (CSV)");
  eval_cmd->add_option("--tolerance", o.tolerance, "vertical tolerance");

  auto* report_cmd = app.add_subcommand("report", "per-survey accuracy table against a surface");
  report_cmd->add_option("surface", input, "surface file")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("surveys", inputs, "survey files")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("-o,--output", output, "accuracy table (CSV)");
  report_cmd->add_option("--tolerance", o.tolerance, "vertical tolerance");

  std::size_t n_points = 0;
  std::uint64_t seed = 0;
  double offset = 0.0;
  bool consistent = false;
  auto* synth_cmd = app.add_subcommand("synth", "write synthetic test data");
  synth_cmd->add_option("kind", kind, "benchmark or pair")->required();
  synth_cmd->add_option("-o,--output", output, "point file (benchmark) or directory (pair)")->required();
  synth_cmd->add_option("--points", n_points, "number of points (per survey for pair)");
  synth_cmd->add_option("--seed", seed, "random seed");
  synth_cmd->add_option("--offset", offset, "vertical offset of survey B in the overlap, in tolerances");
  synth_cmd->add_flag("--consistent", consistent, "add noise of tolerance/20 to both surveys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fit_cmd) return run_fit(input, output, report, o);
    if (*dec_cmd) return run_deconflict(inputs, output, o);
    if (*stitch_cmd) return run_stitch(manifest, points, o);
    if (*eval_cmd) return run_eval(input, points, output, o);
    if (*report_cmd) return run_report(input, inputs, output, o);
    if (*synth_cmd) return run_synth(kind, output, n_points, seed, offset, consistent);
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitOk;
}
