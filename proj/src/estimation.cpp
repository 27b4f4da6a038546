#include "cgm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "cgm/errors.hpp"
#include "cgm/text.hpp"

namespace cgm {
namespace {

std::vector<Location> gather_locations(const GainMap& map, const Region& region) {
  std::vector<Location> out;
  out.reserve(region.members.size());
  for (std::size_t i : region.members) {
    if (i >= map.size()) throw InvalidArgument("region member index out of range");
    out.push_back(map.locations()[i]);
  }
  return out;
}

std::vector<double> gather_gains(const GainMap& map, const Region& region) {
  std::vector<double> out;
  out.reserve(region.members.size());
  for (std::size_t i : region.members) out.push_back(map.gains_db()[i]);
  return out;
}

double log_gain_term(const Location& q) {
  const double r = q.norm();
  if (!(r > 0.0)) throw InvalidArgument("sample at the base station location");
  return -10.0 * std::log10(r);
}

// Rows of (H^T H)^{-1} H^T in centered form: K row then n row.
struct LsProjector {
  std::vector<double> k_row, n_row;
};

LsProjector ls_projector(std::span<const Location> locations) {
  const std::size_t n = locations.size();
  if (n < 3) throw InvalidArgument("path loss fit needs at least 3 samples");
  std::vector<double> h(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = log_gain_term(locations[i]);
    mean += h[i];
  }
  mean /= static_cast<double>(n);
  double shh = 0.0;
  double scale = 0.0;
  for (double v : h) {
    shh += (v - mean) * (v - mean);
    scale += v * v;
  }
  if (!(shh > 1e-13 * std::max(scale, 1.0))) {
    throw DegenerateGeometry("all samples are (nearly) equidistant from the base station");
  }
  LsProjector p;
  p.k_row.resize(n);
  p.n_row.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.n_row[i] = (h[i] - mean) / shh;
    p.k_row[i] = 1.0 / static_cast<double>(n) - mean * p.n_row[i];
  }
  return p;
}

}  // namespace

Region Region::from_rect(const GainMap& map, std::string id, const Rect& rect) {
  Region r;
  r.id = std::move(id);
  r.boundary = rect;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (rect.contains(map.locations()[i])) r.members.push_back(i);
  }
  return r;
}

Region Region::whole(const GainMap& map, std::string id) {
  Region r;
  r.id = std::move(id);
  r.members.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) r.members[i] = i;
  return r;
}

PathlossFit fit_pathloss(std::span<const Location> locations, std::span<const double> gains_db) {
  if (locations.size() != gains_db.size()) {
    throw InvalidArgument("fit_pathloss: locations and gains differ in length");
  }
  const std::size_t n = locations.size();
  if (n < 3) throw InvalidArgument("path loss fit needs at least 3 samples");
  PathlossFit fit;
  fit.h.resize(n);
  double hbar = 0.0, ybar = 0.0, sum_h2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.h[i] = log_gain_term(locations[i]);
    hbar += fit.h[i];
    ybar += gains_db[i];
    sum_h2 += fit.h[i] * fit.h[i];
  }
  const double nn = static_cast<double>(n);
  fit.hth << nn, hbar, hbar, sum_h2;
  hbar /= nn;
  ybar /= nn;
  double shh = 0.0, shy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    shh += (fit.h[i] - hbar) * (fit.h[i] - hbar);
    shy += (fit.h[i] - hbar) * (gains_db[i] - ybar);
  }
  if (!(shh > 1e-13 * std::max(sum_h2, 1.0))) {
    throw DegenerateGeometry("all samples are (nearly) equidistant from the base station");
  }
  fit.n_pl_hat = shy / shh;
  fit.k_db_hat = ybar - fit.n_pl_hat * hbar;
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = gains_db[i] - fit.k_db_hat - fit.n_pl_hat * fit.h[i];
  }
  return fit;
}

PathlossFit fit_pathloss(const GainMap& map, const Region& region) {
  const auto locs = gather_locations(map, region);
  const auto gains = gather_gains(map, region);
  return fit_pathloss(locs, gains);
}

Eigen::Matrix2d ls_error_covariance(std::span<const Location> locations,
                                    const ChannelParams& params) {
  if (!(params.alpha >= 0.0) || !(params.sigma2 >= 0.0) || !(params.beta >= 0.0)) {
    throw InvalidArgument("ls_error_covariance needs alpha, sigma2 >= 0 and beta >= 0");
  }
  const LsProjector p = ls_projector(locations);
  const std::size_t n = locations.size();
  double ckk = 0.0, ckn = 0.0, cnn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diag = params.alpha + params.sigma2;
    ckk += p.k_row[i] * p.k_row[i] * diag;
    ckn += p.k_row[i] * p.n_row[i] * diag;
    cnn += p.n_row[i] * p.n_row[i] * diag;
    if (params.beta == 0.0 || params.alpha == 0.0) continue;
    for (std::size_t j = 0; j < i; ++j) {
      const double c = correlation(distance(locations[i], locations[j]), params);
      ckk += 2.0 * p.k_row[i] * p.k_row[j] * c;
      ckn += (p.k_row[i] * p.n_row[j] + p.k_row[j] * p.n_row[i]) * c;
      cnn += 2.0 * p.n_row[i] * p.n_row[j] * c;
    }
  }
  Eigen::Matrix2d out;
  out << ckk, ckn, ckn, cnn;
  return out;
}

Eigen::Matrix2d ls_error_covariance(const GainMap& map, const Region& region,
                                    const ChannelParams& params) {
  const auto locs = gather_locations(map, region);
  return ls_error_covariance(locs, params);
}

std::pair<double, double> log_distance_moments(double delta_min, double delta_max) {
  if (!(delta_min > 0.0) || !(delta_max > delta_min)) {
    throw InvalidArgument("need 0 < delta_min < delta_max");
  }
  const double a = delta_min;
  const double b = delta_max;
  const double ln10 = std::numbers::ln10;
  const double mu = (10.0 * b * std::log10(b) - 10.0 * a * std::log10(a)) / (b - a) - 10.0 / ln10;
  const double lr = std::log10(b / a);
  const double chi = 100.0 / (ln10 * ln10) - 100.0 * a * b * lr * lr / ((b - a) * (b - a));
  return {mu, chi};
}

Lemma5Result lemma5_error(const Lemma5Inputs& in) {
  if (in.n_samples < 3) throw InvalidArgument("LS error approximation needs N >= 3");
  in.params.validate();
  in.layout.validate();
  Lemma5Result r;
  const double pi = std::numbers::pi;
  const double beta = in.params.beta;
  const double eff = in.layout.kind == LayoutKind::random
                         ? pi * in.layout.lambda * beta * beta
                         : pi * beta * beta / (in.layout.d * in.layout.d);
  r.c = std::max(1.0, eff);
  std::tie(r.mu, r.chi) = log_distance_moments(in.delta_min, in.delta_max);
  const double n_eff = static_cast<double>(in.n_samples) / r.c;
  const double base = (in.params.alpha + in.params.sigma2 / r.c) / n_eff;
  r.sigma2_k = base * (r.mu * r.mu + r.chi) / r.chi;
  r.sigma2_n = base / r.chi;
  return r;
}

std::vector<CorrelationBin> empirical_correlation_bins(std::span<const Location> locations,
                                                       std::span<const double> residuals,
                                                       const ShadowingFitOptions& options) {
  if (locations.size() != residuals.size()) {
    throw InvalidArgument("correlation bins: locations and residuals differ in length");
  }
  const std::size_t n = locations.size();
  double width = options.bin_width;
  if (!options.exact_distances && !(width > 0.0)) {
    double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
    for (const auto& q : locations) {
      x0 = std::min(x0, q.x);
      y0 = std::min(y0, q.y);
      x1 = std::max(x1, q.x);
      y1 = std::max(y1, q.y);
    }
    width = 0.5 * std::sqrt(std::max((x1 - x0) * (y1 - y0), 1e-12) / static_cast<double>(n));
  }
  struct Acc {
    double sum = 0.0;
    double dist_sum = 0.0;
    std::size_t count = 0;
  };
  std::map<long long, Acc> acc;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = distance(locations[i], locations[j]);
      if (options.max_distance > 0.0 && dij > options.max_distance) continue;
      const long long key = options.exact_distances
                                ? std::llround(dij * 1e6)
                                : static_cast<long long>(std::floor(dij / width));
      auto& a = acc[key];
      a.sum += residuals[i] * residuals[j];
      a.dist_sum += dij;
      ++a.count;
    }
  }
  std::vector<CorrelationBin> bins;
  for (const auto& [key, a] : acc) {
    if (a.count < options.min_pairs) continue;
    const double d = options.exact_distances ? a.dist_sum / static_cast<double>(a.count)
                                             : (static_cast<double>(key) + 0.5) * width;
    bins.push_back({d, a.sum / static_cast<double>(a.count), a.count});
  }
  return bins;
}

ShadowingFit fit_exponential_correlation(std::span<const CorrelationBin> bins) {
  ShadowingFit fit;
  for (const auto& b : bins) {
    if (!(b.value > 0.0)) break;
    fit.bins.push_back(b);
  }
  if (fit.bins.size() < 2) {
    fit.degenerate = true;
    fit.note = "fewer than two usable correlation bins";
    return fit;
  }
  // Regress y = ln eps on x = -d with weights |I_u|.
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (const auto& b : fit.bins) {
    const double w = static_cast<double>(b.pairs);
    sw += w;
    sx += w * -b.distance;
    sy += w * std::log(b.value);
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& b : fit.bins) {
    const double w = static_cast<double>(b.pairs);
    const double dx = -b.distance - xbar;
    sxx += w * dx * dx;
    sxy += w * dx * (std::log(b.value) - ybar);
  }
  if (!(sxx > 0.0)) {
    fit.degenerate = true;
    fit.note = "correlation bins share one distance";
    return fit;
  }
  const double inv_beta = sxy / sxx;
  const double ln_alpha = ybar - inv_beta * xbar;
  fit.alpha_hat = std::exp(ln_alpha);
  if (!(inv_beta > 0.0)) {
    fit.beta_hat = 0.0;
    fit.degenerate = true;
    fit.note = "fitted correlation does not decay with distance";
    return fit;
  }
  fit.beta_hat = 1.0 / inv_beta;
  return fit;
}

ShadowingFit fit_shadowing(std::span<const Location> locations, std::span<const double> residuals,
                           const ShadowingFitOptions& options) {
  if (locations.size() < 3) throw InvalidArgument("shadowing fit needs at least 3 samples");
  const auto bins = empirical_correlation_bins(locations, residuals, options);
  return fit_exponential_correlation(bins);
}

ShadowingFit fit_shadowing(const GainMap& map, const Region& region, double k_db_hat,
                           double n_pl_hat, const ShadowingFitOptions& options) {
  const auto locs = gather_locations(map, region);
  const auto gains = gather_gains(map, region);
  std::vector<double> s(locs.size());
  for (std::size_t i = 0; i < locs.size(); ++i) {
    s[i] = gains[i] - k_db_hat - n_pl_hat * log_gain_term(locs[i]);
  }
  return fit_shadowing(locs, s, options);
}

double estimate_sigma2(std::span<const double> residuals, double alpha_hat) {
  if (residuals.empty()) throw InvalidArgument("estimate_sigma2 needs residuals");
  double ss = 0.0;
  for (double s : residuals) ss += s * s;
  return std::max(ss / static_cast<double>(residuals.size()) - alpha_hat, 0.0);
}

ChannelParams EstimatedParams::as_channel_params() const {
  ChannelParams p;
  p.n_pl = n_pl_hat;
  p.k_db = k_db_hat;
  p.alpha = alpha_hat;
  p.beta = beta_hat;
  p.sigma2 = sigma2_hat;
  return p;
}

EstimatedParams fit_region(std::span<const Location> locations, std::span<const double> gains_db,
                           const ShadowingFitOptions& options) {
  const PathlossFit pl = fit_pathloss(locations, gains_db);
  const ShadowingFit sh = fit_shadowing(locations, pl.residuals, options);
  EstimatedParams est;
  est.k_db_hat = pl.k_db_hat;
  est.n_pl_hat = pl.n_pl_hat;
  est.alpha_hat = sh.alpha_hat;
  est.beta_hat = sh.beta_hat;
  est.bins = sh.bins;
  est.shadowing_degenerate = sh.degenerate;
  est.sigma2_hat = estimate_sigma2(pl.residuals, sh.alpha_hat);
  est.n_samples = locations.size();
  ChannelParams cov_params;
  cov_params.alpha = est.alpha_hat;
  cov_params.beta = sh.degenerate ? 0.0 : est.beta_hat;
  cov_params.sigma2 = est.sigma2_hat;
  est.c_ls = ls_error_covariance(locations, cov_params);
  return est;
}

std::vector<RegionFit> fit_region_pipeline(const GainMap& map, std::span<const Region> regions,
                                           const ShadowingFitOptions& options) {
  std::vector<RegionFit> out;
  out.reserve(regions.size());
  for (const auto& region : regions) {
    RegionFit rf;
    rf.region_id = region.id;
    try {
      if (region.members.empty()) throw InvalidArgument("region has no samples");
      const auto locs = gather_locations(map, region);
      const auto gains = gather_gains(map, region);
      rf.params = fit_region(locs, gains, options);
    } catch (const Error& e) {
      rf.error = e.what();
    }
    out.push_back(std::move(rf));
  }
  return out;
}

std::vector<std::pair<std::string, Rect>> load_region_rects(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open region file");
  std::vector<std::pair<std::string, Rect>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(strip_comment(line));
    if (t.empty()) continue;
    const auto f = split(t, ',');
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    if (f.size() != 5) throw ConfigError(where + "expected id,x0,y0,x1,y1");
    if (out.empty() && f[0] == "id") continue;
    try {
      Rect r{parse_double(f[1]), parse_double(f[2]), parse_double(f[3]), parse_double(f[4])};
      if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) throw ConfigError("need x1 > x0 and y1 > y0");
      out.emplace_back(f[0], r);
    } catch (const Error& e) {
      throw ConfigError(where + e.what());
    }
  }
  return out;
}

void write_estimates_csv(std::span<const RegionFit> fits, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "region_id,n_pl,k_db,alpha,beta,sigma2,c_kk,c_kn,c_nn,n_samples,status\n";
  for (const auto& f : fits) {
    out << f.region_id << ',';
    if (!f.params) {
      out << ",,,,,,,,,error\n";
      continue;
    }
    const auto& p = *f.params;
    out << fmt_g17(p.n_pl_hat) << ',' << fmt_g17(p.k_db_hat) << ',' << fmt_g17(p.alpha_hat)
        << ',' << fmt_g17(p.beta_hat) << ',' << fmt_g17(p.sigma2_hat) << ','
        << fmt_g17(p.c_ls(0, 0)) << ',' << fmt_g17(p.c_ls(0, 1)) << ',' << fmt_g17(p.c_ls(1, 1))
        << ',' << p.n_samples << ',' << (p.shadowing_degenerate ? "degenerate" : "ok") << '\n';
  }
}

}  // namespace cgm
