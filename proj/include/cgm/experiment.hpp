#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cgm/config.hpp"
#include "cgm/field.hpp"
#include "cgm/sampling.hpp"

namespace cgm {

enum class EstimationGeometry {
  annulus,  ///< N points with |q| ~ U[delta_min, delta_max], uniform angle
  square,   ///< layout samples inside [offset, offset + w] x [-h/2, h/2]
};

struct EstimationSetup {
  EstimationGeometry geometry = EstimationGeometry::annulus;
  std::vector<std::size_t> n_samples = {20, 50, 100};  // annulus
  double delta_min = 50.0;
  double delta_max = 500.0;
  std::vector<double> region_sides = {100.0};  // square
  std::optional<double> region_height;
  double region_offset = 100.0;
  std::vector<std::size_t> ks = {0};  ///< 0 means path loss only
  std::size_t draws = 1000;
  std::size_t targets = 20;
  double bin_width = 0.0;  ///< <= 0: beta / 10 for random layouts
  double max_distance = 0.0;  ///< correlation-fit pair cap; <= 0: none
};

struct ExperimentConfig {
  ChannelParams params;
  LayoutKind kind = LayoutKind::random;
  double area_side = 300.0;
  double bs_exclusion_radius = 1.0;
  std::vector<double> densities;  ///< lambda values; grids use d = 1/sqrt(lambda)
  std::vector<double> spacings;   ///< grid spacings, used when densities is empty
  std::vector<std::size_t> ks = {1};
  std::size_t targets = 500;
  std::size_t realizations = 200;
  std::uint64_t seed = 1;
  std::optional<double> margin;  ///< default max(3 beta, sqrt2 d/2, 3/sqrt(lambda))
  std::size_t joint_block = 512;  ///< max points per joint field draw
  unsigned threads = 1;           ///< 0 = hardware concurrency
  std::string output = "amse.csv";  ///< load() defaults this to <config stem>.csv
  EstimationSetup estimation;

  void validate() const;
  /// One layout per sweep point, in sweep order.
  std::vector<Layout> sweep_layouts() const;
  double interior_margin(const Layout& layout) const;

  /// Reads [channel], [layout], [simulation], [estimation] sections.
  static ExperimentConfig from_doc(const ConfigDoc& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct AmseRow {
  double density = 0.0;
  double spacing = 0.0;  ///< grid spacing, 0 for random layouts
  std::size_t k = 0;
  double amse_sim = 0.0;
  double amse_se = 0.0;
  double amse_cf = 0.0;
  double amse_quad = 0.0;
  double mean_samples = 0.0;
  std::string error;  ///< non-empty when the sweep point failed

  /// (amse_sim - amse_quad) / amse_quad
  double relative_gap() const { return (amse_sim - amse_quad) / amse_quad; }
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<AmseRow> rows;
  double wall_seconds = 0.0;
};

/// Monte Carlo AMSE of k-NN MMSE prediction with known parameters. Each
/// realization draws a layout and interior targets; shadowing is drawn jointly
/// over targets and their neighbor sets, in blocks of at most joint_block points.
ExperimentReport run_amse_experiment(const ExperimentConfig& config);

struct EstimationRow {
  std::string geometry;
  double density = 0.0;
  double region_side = 0.0;
  double n_samples = 0.0;  ///< mean over draws
  std::size_t k = 0;
  double var_n_sim = 0.0, var_n_approx = 0.0, var_n_cls = 0.0;
  double var_k_sim = 0.0, var_k_approx = 0.0, var_k_cls = 0.0;
  double amse_true = 0.0, amse_true_se = 0.0;
  double amse_est = 0.0, amse_est_se = 0.0;
  double amse_small_beta = 0.0;
  std::size_t failed_draws = 0;
  std::string error;
};

struct EstimationReport {
  ExperimentConfig config;
  std::vector<EstimationRow> rows;
  double wall_seconds = 0.0;
};

/// Parameter estimation sweep: LS error variances against the grouped-sample
/// approximation and the exact C_LS, plus prediction AMSE with fitted vs true
/// parameters for each k.
EstimationReport run_estimation_experiment(const ExperimentConfig& config);

/// density,k,amse_sim,amse_se,amse_cf,amse_quad
void write_amse_csv(const ExperimentReport& report, const std::filesystem::path& path);
void write_amse_plot_data(const ExperimentReport& report, const std::filesystem::path& path);
void write_estimation_csv(const EstimationReport& report, const std::filesystem::path& path);

/// Runs body(i) for i in [0, n) on `threads` workers (0 = hardware). The first
/// exception by index order is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Compensated running sum.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - c_;
    const double t = sum_ + y;
    c_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

}  // namespace cgm
