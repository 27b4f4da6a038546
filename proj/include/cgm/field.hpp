#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "cgm/rng.hpp"

namespace cgm {

/// Log-distance channel model: path loss, exponentially correlated shadowing,
/// and white multipath, all in dB.
struct ChannelParams {
  double n_pl = 2.2;    ///< path loss exponent
  double k_db = -80.0;  ///< path loss intercept (dB)
  double alpha = 8.0;   ///< shadowing variance (dB^2)
  double beta = 30.0;   ///< shadowing correlation distance (m)
  double sigma2 = 2.0;  ///< multipath variance (dB^2)

  /// Throws InvalidArgument unless alpha >= 0, beta > 0, sigma2 >= 0, n_pl >= 0.
  void validate() const;
};

struct Location {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  friend bool operator==(const Location&, const Location&) = default;
};

inline double distance(const Location& a, const Location& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Shadowing covariance at separation h: alpha * exp(-h / beta).
double correlation(double h, const ChannelParams& params);

/// Deterministic part of the gain: K_dB - 10 n_PL log10(|q|). Throws at the origin.
double pathloss_db(const Location& q, const ChannelParams& params);
double pathloss_db(const Location& q, double k_db, double n_pl);

struct FieldRealization {
  std::vector<Location> locations;
  std::vector<double> shadowing;
  std::vector<double> multipath;
  std::vector<double> gains_db;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Cholesky factor of an SPD matrix. On failure, retries with diagonal jitter
/// 1e-10 * scale, growing x10 up to 1e-6 * scale, then throws DegenerateGeometry.
Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& m, double scale);

/// Shadowing covariance matrix [correlation(|q_i - q_j|)].
Eigen::MatrixXd shadowing_covariance(std::span<const Location> locations,
                                     const ChannelParams& params);

/// Draws a joint realization over `locations`. Shadowing is zero-mean Gaussian
/// with the exponential covariance; exactly coincident points share one value.
/// Multipath is i.i.d. N(0, sigma2). The output depends only on (inputs, seed, stream).
FieldRealization synthesize_field(std::span<const Location> locations,
                                  const ChannelParams& params, std::uint64_t seed,
                                  std::uint64_t stream = 0);
/// Same draw from a caller-owned generator.
FieldRealization synthesize_field(std::span<const Location> locations,
                                  const ChannelParams& params, Rng& rng);

}  // namespace cgm
