#include "cgm/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "cgm/errors.hpp"
#include "cgm/estimation.hpp"

namespace cgm {

Prediction predict_from_neighbors(const Location& q, std::span<const Neighbor> neighbors,
                                  const ChannelParams& params) {
  // n_pl is not checked: fitted exponents may come out negative.
  if (!(params.alpha >= 0.0) || !(params.sigma2 >= 0.0) || !(params.beta > 0.0)) {
    throw InvalidArgument("prediction needs alpha >= 0, sigma2 >= 0, beta > 0");
  }
  Prediction out;
  const double pl = pathloss_db(q, params);
  out.gain_db = pl;
  out.mse_db2 = params.alpha + params.sigma2;
  out.k_used = neighbors.size();
  for (const auto& nb : neighbors) out.neighbor_distances.push_back(nb.distance);
  if (neighbors.empty() || params.alpha == 0.0) return out;

  const auto k = static_cast<Eigen::Index>(neighbors.size());
  Eigen::MatrixXd system(k, k);
  Eigen::VectorXd phi(k);
  Eigen::VectorXd resid(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& ni = neighbors[static_cast<std::size_t>(i)];
    phi(i) = correlation(ni.distance, params);
    resid(i) = ni.gain_db - pathloss_db(ni.location, params);
    system(i, i) = params.alpha + params.sigma2;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double c = correlation(
          distance(ni.location, neighbors[static_cast<std::size_t>(j)].location), params);
      system(i, j) = c;
      system(j, i) = c;
    }
  }
  const auto llt = factor_spd(system, params.alpha + params.sigma2);
  const Eigen::VectorXd w = llt.solve(phi);
  out.gain_db = pl + w.dot(resid);
  out.mse_db2 = std::max(0.0, params.alpha + params.sigma2 - w.dot(phi));
  return out;
}

Prediction predict(const GainMap& map, const Location& q, std::size_t k,
                   const ChannelParams& params) {
  if (k == 0) throw InvalidArgument("predict needs k >= 1");
  const auto nb = map.knn(q, k);
  return predict_from_neighbors(q, nb, params);
}

Prediction predict_pathloss_only(const Location& q, const EstimatedParams& est) {
  Prediction out;
  const double r = q.norm();
  out.gain_db = pathloss_db(q, est.k_db_hat, est.n_pl_hat);
  const double l = 10.0 * std::log10(r);
  out.mse_db2 = est.alpha_hat + est.sigma2_hat + est.c_ls(0, 0) + l * l * est.c_ls(1, 1) -
                l * (est.c_ls(1, 0) + est.c_ls(0, 1));
  return out;
}

Prediction predict_from_neighbors(const Location& q, std::span<const Neighbor> neighbors,
                                  const EstimatedParams& est) {
  if (neighbors.empty() || est.shadowing_degenerate || !(est.alpha_hat > 0.0) ||
      !(est.beta_hat > 0.0)) {
    return predict_pathloss_only(q, est);
  }
  return predict_from_neighbors(q, neighbors, est.as_channel_params());
}

Prediction predict(const GainMap& map, const Location& q, std::size_t k,
                   const EstimatedParams& est) {
  if (k == 0) return predict_pathloss_only(q, est);
  const auto nb = map.knn(q, k);
  return predict_from_neighbors(q, nb, est);
}

}  // namespace cgm
