#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cgm/field.hpp"
#include "cgm/sampling.hpp"

namespace cgm {

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  bool contains(const Location& q) const {
    return q.x >= x0 && q.x <= x1 && q.y >= y0 && q.y <= y1;
  }
};

/// A model-consistent sub-area: a rectangle, or an explicit member list.
struct Region {
  std::string id;
  std::optional<Rect> boundary;
  std::vector<std::size_t> members;

  static Region from_rect(const GainMap& map, std::string id, const Rect& rect);
  static Region whole(const GainMap& map, std::string id = "all");
};

struct PathlossFit {
  double k_db_hat = 0.0;
  double n_pl_hat = 0.0;
  Eigen::Matrix2d hth;             ///< H^T H, H = [1, h], h_i = -10 log10 |q_i|
  std::vector<double> h;
  std::vector<double> residuals;   ///< s = y - K_hat - n_hat h
};

/// LS fit of (K_dB, n_PL). Throws DegenerateGeometry when every sample sits at
/// the same distance from the base station.
PathlossFit fit_pathloss(std::span<const Location> locations, std::span<const double> gains_db);
PathlossFit fit_pathloss(const GainMap& map, const Region& region);

/// C_LS = (H^T H)^-1 H^T (R + sigma2 I) H (H^T H)^-1 for the exact geometry.
/// beta == 0 is read as white shadowing (R = alpha I).
Eigen::Matrix2d ls_error_covariance(std::span<const Location> locations,
                                    const ChannelParams& params);
Eigen::Matrix2d ls_error_covariance(const GainMap& map, const Region& region,
                                    const ChannelParams& params);

struct Lemma5Inputs {
  std::size_t n_samples = 0;
  double delta_min = 0.0;
  double delta_max = 0.0;
  Layout layout;
  ChannelParams params;
};

struct Lemma5Result {
  double sigma2_k = 0.0;  ///< var(K_hat), dB^2
  double sigma2_n = 0.0;  ///< var(n_hat)
  double c = 1.0;         ///< samples per effective (decorrelated) sample
  double mu = 0.0;        ///< mean of 10 log10 |q|
  double chi = 0.0;       ///< variance of 10 log10 |q|
};

/// Mean and variance of 10 log10(D) for D ~ U[delta_min, delta_max].
std::pair<double, double> log_distance_moments(double delta_min, double delta_max);

/// Approximate LS parameter error variances for N samples whose distances to
/// the base station are uniform on [delta_min, delta_max].
Lemma5Result lemma5_error(const Lemma5Inputs& inputs);

struct CorrelationBin {
  double distance = 0.0;
  double value = 0.0;       ///< mean of s_i s_j over the bin's pairs
  std::size_t pairs = 0;
};

struct ShadowingFitOptions {
  /// Bin width for pair distances; <= 0 selects half the mean sample spacing.
  double bin_width = 0.0;
  /// Group pairs by exact distance (grid layouts) instead of fixed-width bins.
  bool exact_distances = false;
  std::size_t min_pairs = 5;
  /// Pairs farther apart than this are ignored; <= 0 keeps every distance.
  double max_distance = 0.0;
};

struct ShadowingFit {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  std::vector<CorrelationBin> bins;  ///< the bins the fit used
  bool degenerate = false;
  std::string note;
};

/// Empirical correlation per distance bin (pairs i < j), ascending in distance,
/// bins with fewer than min_pairs pairs dropped.
std::vector<CorrelationBin> empirical_correlation_bins(std::span<const Location> locations,
                                                       std::span<const double> residuals,
                                                       const ShadowingFitOptions& options);

/// Weighted log-linear LS of ln eps(d) = ln alpha - d / beta with weights |I_u|,
/// over the leading run of bins with positive value.
ShadowingFit fit_exponential_correlation(std::span<const CorrelationBin> bins);

ShadowingFit fit_shadowing(std::span<const Location> locations, std::span<const double> residuals,
                           const ShadowingFitOptions& options = {});
/// Residuals are recomputed from (k_db_hat, n_pl_hat).
ShadowingFit fit_shadowing(const GainMap& map, const Region& region, double k_db_hat,
                           double n_pl_hat, const ShadowingFitOptions& options = {});

/// max{mean(s^2) - alpha_hat, 0}.
double estimate_sigma2(std::span<const double> residuals, double alpha_hat);

struct EstimatedParams {
  double k_db_hat = 0.0;
  double n_pl_hat = 0.0;
  Eigen::Matrix2d c_ls = Eigen::Matrix2d::Zero();  ///< (K, n) error covariance
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double sigma2_hat = 0.0;
  std::vector<CorrelationBin> bins;
  bool shadowing_degenerate = false;
  std::size_t n_samples = 0;

  ChannelParams as_channel_params() const;
};

/// fit_pathloss, then fit_shadowing, then estimate_sigma2; C_LS from the fitted values.
EstimatedParams fit_region(std::span<const Location> locations, std::span<const double> gains_db,
                           const ShadowingFitOptions& options = {});

struct RegionFit {
  std::string region_id;
  std::optional<EstimatedParams> params;
  std::string error;  ///< set when params is empty
};

/// Fits each region independently. A failing region is reported, not thrown.
std::vector<RegionFit> fit_region_pipeline(const GainMap& map, std::span<const Region> regions,
                                           const ShadowingFitOptions& options = {});

/// Reads `id,x0,y0,x1,y1` rows (optional header, '#' comments).
std::vector<std::pair<std::string, Rect>> load_region_rects(const std::filesystem::path& path);

/// region_id,n_pl,k_db,alpha,beta,sigma2,c_kk,c_kn,c_nn,n_samples,status
void write_estimates_csv(std::span<const RegionFit> fits, const std::filesystem::path& path);

}  // namespace cgm
