#include "cgm/field.hpp"

#include <map>
#include <random>
#include <string>
#include <utility>

#include "cgm/errors.hpp"
#include "cgm/rng.hpp"

namespace cgm {

void ChannelParams::validate() const {
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be >= 0");
  if (!(beta > 0.0)) throw InvalidArgument("beta must be > 0");
  if (!(sigma2 >= 0.0)) throw InvalidArgument("sigma2 must be >= 0");
  if (!(n_pl >= 0.0)) throw InvalidArgument("n_pl must be >= 0");
  if (!std::isfinite(k_db)) throw InvalidArgument("k_db must be finite");
}

double correlation(double h, const ChannelParams& params) {
  return params.alpha * std::exp(-h / params.beta);
}

double pathloss_db(const Location& q, double k_db, double n_pl) {
  const double r = q.norm();
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw InvalidArgument("path loss undefined at the base station location");
  }
  return k_db - 10.0 * n_pl * std::log10(r);
}

double pathloss_db(const Location& q, const ChannelParams& params) {
  return pathloss_db(q, params.k_db, params.n_pl);
}

Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& m, double scale) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  if (!(scale > 0.0)) scale = 1.0;
  for (double jitter = 1e-10; jitter <= 1e-6 * 1.000001; jitter *= 10.0) {
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += jitter * scale;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw DegenerateGeometry("covariance factorization failed after jitter (n=" +
                           std::to_string(m.rows()) + ")");
}

Eigen::MatrixXd shadowing_covariance(std::span<const Location> locations,
                                     const ChannelParams& params) {
  const auto n = static_cast<Eigen::Index>(locations.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = params.alpha;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double c = correlation(distance(locations[i], locations[j]), params);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

FieldRealization synthesize_field(std::span<const Location> locations,
                                  const ChannelParams& params, std::uint64_t seed,
                                  std::uint64_t stream) {
  Rng rng = make_stream(seed, stream);
  FieldRealization out = synthesize_field(locations, params, rng);
  out.seed = seed;
  out.stream = stream;
  return out;
}

FieldRealization synthesize_field(std::span<const Location> locations,
                                  const ChannelParams& params, Rng& rng) {
  params.validate();
  FieldRealization out;
  out.locations.assign(locations.begin(), locations.end());
  const std::size_t n = locations.size();
  out.shadowing.assign(n, 0.0);
  out.multipath.assign(n, 0.0);
  out.gains_db.assign(n, 0.0);

  std::vector<double> pl(n);
  for (std::size_t i = 0; i < n; ++i) pl[i] = pathloss_db(locations[i], params);

  std::normal_distribution<double> normal(0.0, 1.0);

  if (params.alpha > 0.0 && n > 0) {
    // Exactly coincident points map onto one unique site.
    std::map<std::pair<double, double>, std::size_t> site_of;
    std::vector<Location> sites;
    std::vector<std::size_t> site_index(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto [it, inserted] =
          site_of.try_emplace({locations[i].x, locations[i].y}, sites.size());
      if (inserted) sites.push_back(locations[i]);
      site_index[i] = it->second;
    }
    const auto llt = factor_spd(shadowing_covariance(sites, params), params.alpha);
    Eigen::VectorXd z(static_cast<Eigen::Index>(sites.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const Eigen::VectorXd v = llt.matrixL() * z;
    for (std::size_t i = 0; i < n; ++i) {
      out.shadowing[i] = v(static_cast<Eigen::Index>(site_index[i]));
    }
  }

  const double sd = std::sqrt(params.sigma2);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = normal(rng);
    if (params.sigma2 > 0.0) out.multipath[i] = sd * w;
  }

  for (std::size_t i = 0; i < n; ++i) {
    out.gains_db[i] = pl[i] + out.shadowing[i] + out.multipath[i];
  }
  return out;
}

}  // namespace cgm
