#include "cgm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "cgm/errors.hpp"
#include "cgm/rng.hpp"
#include "cgm/text.hpp"

namespace cgm {

Layout Layout::random(double lambda, double area_side) {
  Layout l;
  l.kind = LayoutKind::random;
  l.lambda = lambda;
  l.area_side = area_side;
  return l;
}

Layout Layout::grid(double d, double area_side) {
  Layout l;
  l.kind = LayoutKind::grid;
  l.d = d;
  l.area_side = area_side;
  return l;
}

double Layout::density() const {
  return kind == LayoutKind::random ? lambda : 1.0 / (d * d);
}

void Layout::validate() const {
  if (!(area_side > 0.0) || !(height() > 0.0)) {
    throw InvalidArgument("layout area side must be > 0");
  }
  if (kind == LayoutKind::random && !(lambda > 0.0)) {
    throw InvalidArgument("random layout needs lambda > 0");
  }
  if (kind == LayoutKind::grid && !(d > 0.0)) {
    throw InvalidArgument("grid layout needs spacing d > 0");
  }
  if (!(bs_exclusion_radius >= 0.0)) {
    throw InvalidArgument("bs_exclusion_radius must be >= 0");
  }
}

const char* to_string(LayoutKind kind) {
  return kind == LayoutKind::random ? "random" : "grid";
}

LayoutKind parse_layout_kind(const std::string& s) {
  if (s == "random") return LayoutKind::random;
  if (s == "grid") return LayoutKind::grid;
  throw InvalidArgument("unknown layout kind '" + s + "' (expected random or grid)");
}

std::vector<Location> draw_locations(const Layout& layout, std::uint64_t seed,
                                     std::uint64_t stream) {
  layout.validate();
  const double w = layout.area_side;
  const double h = layout.height();
  std::vector<Location> pts;
  if (layout.kind == LayoutKind::grid) {
    const auto nx = static_cast<long>(std::floor(w / layout.d + 1e-9));
    const auto ny = static_cast<long>(std::floor(h / layout.d + 1e-9));
    pts.reserve(static_cast<std::size_t>(std::max(0L, nx * ny)));
    for (long j = 0; j < ny; ++j) {
      for (long i = 0; i < nx; ++i) {
        pts.push_back({layout.x0 + layout.d * (0.5 + static_cast<double>(i)),
                       layout.y0 + layout.d * (0.5 + static_cast<double>(j))});
      }
    }
  } else {
    Rng rng = make_stream(seed, stream, 0x5a);
    std::poisson_distribution<long long> count(layout.lambda * w * h);
    const long long n = count(rng);
    std::uniform_real_distribution<double> ux(layout.x0, layout.x0 + w);
    std::uniform_real_distribution<double> uy(layout.y0, layout.y0 + h);
    pts.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
      const double x = ux(rng);
      const double y = uy(rng);
      pts.push_back({x, y});
    }
  }
  std::erase_if(pts, [&](const Location& p) {
    return !(p.norm() >= layout.bs_exclusion_radius) || p.norm() == 0.0;
  });
  if (pts.empty()) throw InvalidArgument("layout produced no sample locations");
  return pts;
}

double index_cell_size(const Layout& layout) {
  if (layout.kind == LayoutKind::grid) return layout.d;
  return 1.0 / std::sqrt(layout.lambda);
}

// ---------------------------------------------------------------------------

SpatialIndex::SpatialIndex(std::span<const Location> points, double cell_size)
    : points_(points.begin(), points.end()) {
  if (points_.empty()) return;
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = max_x;
  min_x_ = std::numeric_limits<double>::infinity();
  min_y_ = min_x_;
  for (const auto& p : points_) {
    min_x_ = std::min(min_x_, p.x);
    min_y_ = std::min(min_y_, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const double span_x = max_x - min_x_;
  const double span_y = max_y - min_y_;
  const double n = static_cast<double>(points_.size());
  if (!(cell_size > 0.0)) {
    cell_size = std::sqrt(std::max(span_x * span_y, 1e-12) / n);
  }
  // Keep the bucket table O(n).
  const double max_cells = 4.0 * n + 16.0;
  while ((std::floor(span_x / cell_size) + 1.0) * (std::floor(span_y / cell_size) + 1.0) >
         max_cells) {
    cell_size *= 2.0;
  }
  cell_ = cell_size > 0.0 ? cell_size : 1.0;
  nx_ = static_cast<long>(std::floor(span_x / cell_)) + 1;
  ny_ = static_cast<long>(std::floor(span_y / cell_)) + 1;

  const auto ncell = static_cast<std::size_t>(nx_ * ny_);
  std::vector<std::size_t> cell_of(points_.size());
  cell_start_.assign(ncell + 1, 0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const long cx = std::min(nx_ - 1, static_cast<long>((points_[i].x - min_x_) / cell_));
    const long cy = std::min(ny_ - 1, static_cast<long>((points_[i].y - min_y_) / cell_));
    cell_of[i] = static_cast<std::size_t>(cy * nx_ + cx);
    ++cell_start_[cell_of[i] + 1];
  }
  for (std::size_t c = 0; c < ncell; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_items_.resize(points_.size());
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) cell_items_[fill[cell_of[i]]++] = i;
}

std::vector<std::size_t> SpatialIndex::knn(const Location& q, std::size_t k) const {
  if (k == 0) return {};
  if (k > points_.size()) {
    throw InvalidArgument("k = " + std::to_string(k) + " exceeds sample count " +
                          std::to_string(points_.size()));
  }
  struct Cand {
    double d2;
    std::size_t idx;
    bool operator<(const Cand& o) const { return d2 < o.d2 || (d2 == o.d2 && idx < o.idx); }
  };
  std::vector<Cand> cands;
  cands.reserve(4 * k + 16);

  const auto cx = static_cast<long>(std::floor((q.x - min_x_) / cell_));
  const auto cy = static_cast<long>(std::floor((q.y - min_y_) / cell_));
  const long max_ring = std::max({std::abs(cx), std::abs(nx_ - 1 - cx), std::abs(cy),
                                  std::abs(ny_ - 1 - cy)});

  auto visit = [&](long i, long j) {
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return;
    const auto c = static_cast<std::size_t>(j * nx_ + i);
    for (std::size_t t = cell_start_[c]; t < cell_start_[c + 1]; ++t) {
      const std::size_t idx = cell_items_[t];
      const double dx = points_[idx].x - q.x;
      const double dy = points_[idx].y - q.y;
      cands.push_back({dx * dx + dy * dy, idx});
    }
  };

  for (long r = 0; r <= max_ring; ++r) {
    if (r == 0) {
      visit(cx, cy);
    } else {
      for (long i = cx - r; i <= cx + r; ++i) {
        visit(i, cy - r);
        visit(i, cy + r);
      }
      for (long j = cy - r + 1; j <= cy + r - 1; ++j) {
        visit(cx - r, j);
        visit(cx + r, j);
      }
    }
    if (cands.size() >= k) {
      std::nth_element(cands.begin(), cands.begin() + static_cast<long>(k - 1), cands.end());
      cands.resize(k);
      const double reach = static_cast<double>(r) * cell_;
      // Anything in ring r+1 is at least r * cell away.
      if (cands[k - 1].d2 < reach * reach) break;
    }
  }
  std::sort(cands.begin(), cands.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = cands[i].idx;
  return out;
}

// ---------------------------------------------------------------------------

GainMap::GainMap(Layout layout, std::vector<Location> locations, std::vector<double> gains_db,
                 std::uint64_t seed)
    : layout_(std::move(layout)),
      locations_(std::move(locations)),
      gains_(std::move(gains_db)),
      seed_(seed) {
  if (locations_.size() != gains_.size()) {
    throw InvalidArgument("gain map needs one gain per location");
  }
  if (locations_.empty()) throw InvalidArgument("gain map is empty");
  double cell = 0.0;
  if ((layout_.kind == LayoutKind::grid && layout_.d > 0.0) ||
      (layout_.kind == LayoutKind::random && layout_.lambda > 0.0)) {
    cell = index_cell_size(layout_);
  }
  index_ = SpatialIndex(locations_, cell);
}

std::vector<Neighbor> GainMap::knn(const Location& q, std::size_t k) const {
  const auto idx = index_.knn(q, k);
  std::vector<Neighbor> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const double dx = locations_[i].x - q.x;
    const double dy = locations_[i].y - q.y;
    out.push_back({i, locations_[i], gains_[i], std::sqrt(dx * dx + dy * dy)});
  }
  return out;
}

// ---------------------------------------------------------------------------

double pdf_dmin_random(double x, double lambda) {
  if (x < 0.0) return 0.0;
  const double pi = std::numbers::pi;
  return 2.0 * pi * lambda * x * std::exp(-pi * lambda * x * x);
}

double pdf_dmin_grid(double x, double d) {
  const double pi = std::numbers::pi;
  if (x < 0.0) return 0.0;
  if (x <= 0.5 * d) return 2.0 * pi * x / (d * d);
  if (x <= std::numbers::sqrt2 * 0.5 * d) {
    const double ratio = std::min(1.0, d / (2.0 * x));
    return std::max(0.0, 4.0 * x / (d * d) * (0.5 * pi - 2.0 * std::acos(ratio)));
  }
  return 0.0;
}

// ---------------------------------------------------------------------------

std::filesystem::path meta_path_for(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".meta");
  return p;
}

void save_gain_map(const GainMap& map, const std::filesystem::path& csv_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw Error("cannot write " + csv_path.string());
  csv << "x,y,gain_db\n";
  for (std::size_t i = 0; i < map.size(); ++i) {
    csv << fmt_g17(map.locations()[i].x) << ',' << fmt_g17(map.locations()[i].y) << ','
        << fmt_g17(map.gains_db()[i]) << '\n';
  }
  const auto& l = map.layout();
  std::ofstream meta(meta_path_for(csv_path), std::ios::binary);
  if (!meta) throw Error("cannot write " + meta_path_for(csv_path).string());
  meta << "kind = " << to_string(l.kind) << '\n';
  if (l.kind == LayoutKind::random) {
    meta << "lambda = " << fmt_g17(l.lambda) << '\n';
  } else {
    meta << "d = " << fmt_g17(l.d) << '\n';
  }
  meta << "area_side = " << fmt_g17(l.area_side) << '\n'
       << "area_height = " << fmt_g17(l.height()) << '\n'
       << "x0 = " << fmt_g17(l.x0) << '\n'
       << "y0 = " << fmt_g17(l.y0) << '\n'
       << "bs_exclusion_radius = " << fmt_g17(l.bs_exclusion_radius) << '\n'
       << "seed = " << map.seed() << '\n'
       << "count = " << map.size() << '\n';
}

GainMap load_gain_map(const std::filesystem::path& csv_path) {
  const auto meta_path = meta_path_for(csv_path);
  std::ifstream meta(meta_path);
  if (!meta) throw ConfigError(meta_path.string() + ": cannot open map metadata");
  Layout layout;
  std::uint64_t seed = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(meta, line)) {
    ++lineno;
    const std::string where = meta_path.string() + ":" + std::to_string(lineno) + ": ";
    const auto t = trim(strip_comment(line));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(t.substr(0, eq));
    const auto val = trim(t.substr(eq + 1));
    try {
      if (key == "kind") layout.kind = parse_layout_kind(val);
      else if (key == "lambda") layout.lambda = parse_double(val);
      else if (key == "d") layout.d = parse_double(val);
      else if (key == "area_side") layout.area_side = parse_double(val);
      else if (key == "area_height") layout.area_height = parse_double(val);
      else if (key == "x0") layout.x0 = parse_double(val);
      else if (key == "y0") layout.y0 = parse_double(val);
      else if (key == "bs_exclusion_radius") layout.bs_exclusion_radius = parse_double(val);
      else if (key == "seed") seed = parse_u64(val);
      else if (key == "count") {}
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const Error& e) {
      throw ConfigError(where + e.what());
    }
  }

  std::ifstream csv(csv_path);
  if (!csv) throw ConfigError(csv_path.string() + ": cannot open map");
  std::vector<Location> locs;
  std::vector<double> gains;
  lineno = 0;
  while (std::getline(csv, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (lineno == 1) {
      if (t != "x,y,gain_db") {
        throw ConfigError(csv_path.string() + ":1: expected header 'x,y,gain_db'");
      }
      continue;
    }
    const auto fields = split(t, ',');
    const std::string where = csv_path.string() + ":" + std::to_string(lineno) + ": ";
    if (fields.size() != 3) throw ConfigError(where + "expected 3 columns");
    try {
      locs.push_back({parse_double(fields[0]), parse_double(fields[1])});
      gains.push_back(parse_double(fields[2]));
    } catch (const Error& e) {
      throw ConfigError(where + e.what());
    }
  }
  return GainMap(layout, std::move(locs), std::move(gains), seed);
}

}  // namespace cgm
