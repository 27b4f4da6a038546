#pragma once

#include <span>
#include <vector>

#include "cgm/field.hpp"
#include "cgm/sampling.hpp"

namespace cgm {

struct EstimatedParams;

struct Prediction {
  double gain_db = 0.0;
  double mse_db2 = 0.0;  ///< model MSE of gain_db (dB^2)
  std::size_t k_used = 0;
  std::vector<double> neighbor_distances;
};

/// MMSE prediction from an explicit neighbor set (the k-NN result or any subset).
/// Solves (R_Q + sigma2 I) x = y_Q - pathloss(Q) by Cholesky; never inverts.
/// With alpha == 0 the shadowing term vanishes and the path loss is returned.
Prediction predict_from_neighbors(const Location& q, std::span<const Neighbor> neighbors,
                                  const ChannelParams& params);

/// Uses the k nearest samples of `map`.
Prediction predict(const GainMap& map, const Location& q, std::size_t k,
                   const ChannelParams& params);

/// Path-loss-only prediction from fitted parameters; the MSE adds the LS
/// parameter error through C_LS.
Prediction predict_pathloss_only(const Location& q, const EstimatedParams& est);

/// Prediction with fitted parameters. Falls back to predict_pathloss_only when
/// the shadowing fit is degenerate (alpha_hat == 0 or beta_hat == 0) or k == 0.
Prediction predict(const GainMap& map, const Location& q, std::size_t k,
                   const EstimatedParams& est);
Prediction predict_from_neighbors(const Location& q, std::span<const Neighbor> neighbors,
                                  const EstimatedParams& est);

}  // namespace cgm
