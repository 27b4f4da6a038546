#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "cgm/field.hpp"

namespace cgm {

enum class LayoutKind { random, grid };

/// Sampling layout over a rectangle with lower-left corner (x0, y0). The base
/// station sits at the origin; points closer than bs_exclusion_radius are dropped.
struct Layout {
  LayoutKind kind = LayoutKind::random;
  double lambda = 0.0;     ///< samples per m^2 (random)
  double d = 0.0;          ///< grid spacing in m (grid)
  double area_side = 300.0;
  std::optional<double> area_height;  ///< defaults to area_side
  double x0 = 0.0;
  double y0 = 0.0;
  double bs_exclusion_radius = 1.0;

  static Layout random(double lambda, double area_side);
  static Layout grid(double d, double area_side);

  double height() const { return area_height.value_or(area_side); }
  double area() const { return area_side * height(); }
  /// Points per m^2: lambda, or 1/d^2 for grids.
  double density() const;
  void validate() const;
};

const char* to_string(LayoutKind kind);
LayoutKind parse_layout_kind(const std::string& s);

/// Random: N ~ Poisson(lambda * area) uniform points. Grid: lattice at spacing d
/// starting d/2 from the corner. Throws InvalidArgument if nothing survives exclusion.
std::vector<Location> draw_locations(const Layout& layout, std::uint64_t seed,
                                     std::uint64_t stream = 0);

struct Neighbor {
  std::size_t index;
  Location location;
  double gain_db;
  double distance;
};

/// Uniform-bucket spatial hash with exact k-NN by expanding rings.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  /// cell_size <= 0 picks sqrt(bbox area / n).
  SpatialIndex(std::span<const Location> points, double cell_size);

  /// Indices of the k nearest points, ascending by (distance, index).
  std::vector<std::size_t> knn(const Location& q, std::size_t k) const;
  std::size_t size() const { return points_.size(); }
  double cell_size() const { return cell_; }

 private:
  std::vector<Location> points_;
  double cell_ = 1.0;
  double min_x_ = 0.0, min_y_ = 0.0;
  long nx_ = 1, ny_ = 1;
  std::vector<std::size_t> cell_start_;  // CSR offsets, size nx*ny + 1
  std::vector<std::size_t> cell_items_;
};

/// Stored samples plus their nearest-neighbor index. Immutable once built.
class GainMap {
 public:
  GainMap(Layout layout, std::vector<Location> locations, std::vector<double> gains_db,
          std::uint64_t seed = 0);

  const Layout& layout() const { return layout_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return locations_.size(); }
  const std::vector<Location>& locations() const { return locations_; }
  const std::vector<double>& gains_db() const { return gains_; }
  const SpatialIndex& index() const { return index_; }

  /// k nearest samples, ascending; ties go to the lower insertion index.
  std::vector<Neighbor> knn(const Location& q, std::size_t k) const;

 private:
  Layout layout_;
  std::vector<Location> locations_;
  std::vector<double> gains_;
  std::uint64_t seed_;
  SpatialIndex index_;
};

/// Cell size used for a layout's index: max(d, 1/sqrt(lambda)).
double index_cell_size(const Layout& layout);

/// Nearest-sample distance density for a homogeneous PPP of density lambda.
double pdf_dmin_random(double x, double lambda);
/// Nearest-sample distance density for a uniform target in a square grid of spacing d.
double pdf_dmin_grid(double x, double d);

/// Writes `<stem>.csv` (x,y,gain_db) and `<stem>.meta` (key = value) with 17
/// significant digits.
void save_gain_map(const GainMap& map, const std::filesystem::path& csv_path);
/// Reads a map written by save_gain_map. The sidecar is `<csv stem>.meta`.
GainMap load_gain_map(const std::filesystem::path& csv_path);
std::filesystem::path meta_path_for(const std::filesystem::path& csv_path);

}  // namespace cgm
