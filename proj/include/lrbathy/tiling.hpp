#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrbathy/adaptive.hpp"
#include "lrbathy/geometry.hpp"
#include "lrbathy/lr_surface.hpp"

namespace lrb {

struct Tile {
  int ix = 0;
  int iy = 0;
  Box core;      ///< non-overlapping part; the cores partition the grid box
  Box expanded;  ///< core grown by the overlap fraction, clipped to the grid box
};

/// Regular nx x ny grid over a box. Tile (ix, iy) is stored at iy * nx + ix.
struct TileGrid {
  Box box;
  int nx = 1;
  int ny = 1;
  double overlap = 0.05;  ///< expansion per side as a fraction of the tile size
  std::vector<double> xs;  ///< nx + 1 core edges
  std::vector<double> ys;  ///< ny + 1 core edges
  std::vector<Tile> tiles;

  std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx + ix; }
  /// Core tile of a point, by coordinate arithmetic. Points on an interior
  /// edge go to the upper tile; points on the grid's max edge to the last one.
  std::size_t core_tile(double x, double y) const;
  /// All tiles whose expanded box contains the point.
  std::vector<std::size_t> expanded_tiles(double x, double y) const;
};

TileGrid make_tiles(const Box& box, int nx, int ny, double overlap = 0.05);

struct TileFit {
  std::optional<LRSurface> surface;  ///< empty for a hole (no usable points)
  std::vector<IterationReport> reports;
  std::size_t points = 0;            ///< points in the expanded tile
  std::size_t frozen_elements = 0;
  std::string note;
};

struct TileSet {
  TileGrid grid;
  std::vector<TileFit> fits;
};

/// Fits every tile on the points of its expanded box with the expanded box
/// as domain, then restricts each surface to its core.
TileSet fit_tiles(std::span<const Point3> pts, const TileGrid& grid, const FitConfig& cfg);

/// Shared edge between two neighbouring tiles. `low` is the tile on the
/// lesser side (left or below).
struct TileEdge {
  std::size_t low = 0;
  std::size_t high = 0;
  bool vertical = true;  ///< edge is the line x = position
  double position = 0.0;
  double start = 0.0;    ///< extent along the edge
  double stop = 0.0;
};

/// Edges whose both tiles have a surface.
std::vector<TileEdge> tile_edges(const TileSet& set);

enum class Continuity { C0, C1 };

struct StitchReport {
  double strip_width = 0.0;          ///< knot spacing of the boundary strip
  std::size_t constraints = 0;
  std::size_t adjusted_coefficients = 0;
  int unification_passes = 0;
};

/// Refines both sides of every shared edge to a common tensor-product strip
/// and changes the boundary coefficients as little as possible (weighted by
/// the number of points in each B-spline support) so that values, and for C1
/// also cross-boundary derivatives, agree along the edge. All edges are
/// solved jointly, so tile corners satisfy every edge's conditions.
/// `pts` provides the weights; without points every weight is 1.
StitchReport stitch(TileSet& set, Continuity c, std::span<const Point3> pts = {});

struct EdgeJump {
  double value = 0.0;       ///< max |F_low - F_high|
  double derivative = 0.0;  ///< max |dF_low/dn - dF_high/dn|
  double derivative_scale = 0.0;  ///< max |dF/dn| on either side
};

/// Samples an edge at `samples` evenly spaced points including both ends.
EdgeJump measure_edge(const TileSet& set, const TileEdge& e, int samples = 1000);

}  // namespace lrb
