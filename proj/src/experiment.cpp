#include "cgm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <thread>
#include <unordered_map>

#include "cgm/analytic.hpp"
#include "cgm/errors.hpp"
#include "cgm/estimation.hpp"
#include "cgm/predictor.hpp"
#include "cgm/rng.hpp"
#include "cgm/text.hpp"

namespace cgm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t stream_id(std::size_t point, std::size_t trial) {
  return (static_cast<std::uint64_t>(point) << 32) ^ static_cast<std::uint64_t>(trial);
}

struct MeanSe {
  double mean = kNaN;
  double se = kNaN;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  KahanSum s;
  for (double x : v) s.add(x);
  const double n = static_cast<double>(v.size());
  out.mean = s.value() / n;
  if (v.size() < 2) {
    out.se = 0.0;
    return out;
  }
  KahanSum ss;
  for (double x : v) ss.add((x - out.mean) * (x - out.mean));
  out.se = std::sqrt(ss.value() / (n - 1.0) / n);
  return out;
}

std::vector<Neighbor> make_neighbors(const Location& q, std::span<const std::size_t> idx,
                                     std::span<const Location> locs,
                                     std::span<const double> gains) {
  std::vector<Neighbor> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const double dx = locs[i].x - q.x;
    const double dy = locs[i].y - q.y;
    out.push_back({i, locs[i], gains[i], std::sqrt(dx * dx + dy * dy)});
  }
  return out;
}

const char* to_string(EstimationGeometry g) {
  return g == EstimationGeometry::annulus ? "annulus" : "square";
}

}  // namespace

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(threads, n);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  params.validate();
  if (!(area_side > 0.0)) throw ConfigError("layout.area_side must be > 0");
  if (ks.empty()) throw ConfigError("simulation.k must list at least one value");
  for (auto k : ks) {
    if (k < 1) throw ConfigError("simulation.k values must be >= 1");
  }
  if (targets < 1) throw ConfigError("simulation.targets must be >= 1");
  if (realizations < 1) throw ConfigError("simulation.realizations must be >= 1");
  if (joint_block < 2) throw ConfigError("simulation.joint_block must be >= 2");
  for (double v : densities) {
    if (!(v > 0.0)) throw ConfigError("layout.densities must be > 0");
  }
  for (double v : spacings) {
    if (!(v > 0.0)) throw ConfigError("layout.spacings must be > 0");
  }
  if (margin && !(*margin >= 0.0)) throw ConfigError("simulation.margin must be >= 0");
  const auto& e = estimation;
  if (e.draws < 1) throw ConfigError("estimation.draws must be >= 1");
  if (e.targets < 1) throw ConfigError("estimation.targets must be >= 1");
  if (e.ks.empty()) throw ConfigError("estimation.k must list at least one value");
  if (!(e.delta_min > 0.0) || !(e.delta_max > e.delta_min)) {
    throw ConfigError("estimation needs 0 < delta_min < delta_max");
  }
  for (auto n : e.n_samples) {
    if (n < 3) throw ConfigError("estimation.n_samples values must be >= 3");
  }
  for (double s : e.region_sides) {
    if (!(s > 0.0)) throw ConfigError("estimation.region_sides must be > 0");
  }
}

std::vector<Layout> ExperimentConfig::sweep_layouts() const {
  std::vector<Layout> out;
  auto finish = [&](Layout l) {
    l.bs_exclusion_radius = bs_exclusion_radius;
    out.push_back(l);
  };
  if (!densities.empty()) {
    for (double lam : densities) {
      finish(kind == LayoutKind::random ? Layout::random(lam, area_side)
                                        : Layout::grid(1.0 / std::sqrt(lam), area_side));
    }
  } else {
    for (double d : spacings) {
      finish(kind == LayoutKind::grid ? Layout::grid(d, area_side)
                                      : Layout::random(1.0 / (d * d), area_side));
    }
  }
  return out;
}

double ExperimentConfig::interior_margin(const Layout& layout) const {
  if (margin) return *margin;
  double m = 3.0 * params.beta;
  if (layout.kind == LayoutKind::grid) m = std::max(m, std::numbers::sqrt2 * layout.d / 2.0);
  if (layout.kind == LayoutKind::random) m = std::max(m, 3.0 / std::sqrt(layout.lambda));
  return m;
}

ExperimentConfig ExperimentConfig::from_doc(const ConfigDoc& doc) {
  ExperimentConfig c;
  c.seed = doc.get_u64("seed", c.seed);
  c.output = doc.get_string("output", c.output);

  c.params.n_pl = doc.get_double("channel.n_pl", c.params.n_pl);
  c.params.k_db = doc.get_double("channel.k_db", c.params.k_db);
  c.params.alpha = doc.get_double("channel.alpha", c.params.alpha);
  c.params.beta = doc.get_double("channel.beta", c.params.beta);
  c.params.sigma2 = doc.get_double("channel.sigma2", c.params.sigma2);

  const std::string kind = doc.get_string("layout.kind", "random");
  try {
    c.kind = parse_layout_kind(kind);
  } catch (const Error& e) {
    throw ConfigError(std::string("layout.kind: ") + e.what());
  }
  c.area_side = doc.get_double("layout.area_side", c.area_side);
  c.bs_exclusion_radius = doc.get_double("layout.bs_exclusion_radius", c.bs_exclusion_radius);
  c.densities = doc.get_double_list("layout.densities", {});
  c.spacings = doc.get_double_list("layout.spacings", {});

  std::vector<std::uint64_t> ks = doc.get_u64_list("simulation.k", {1});
  c.ks.assign(ks.begin(), ks.end());
  c.targets = doc.get_u64("simulation.targets", c.targets);
  c.realizations = doc.get_u64("simulation.realizations", c.realizations);
  if (doc.has("simulation.margin")) c.margin = doc.get_double("simulation.margin", 0.0);
  c.joint_block = doc.get_u64("simulation.joint_block", c.joint_block);
  c.threads = static_cast<unsigned>(doc.get_u64("simulation.threads", c.threads));

  auto& e = c.estimation;
  const std::string geom = doc.get_string("estimation.geometry", "annulus");
  if (geom == "annulus") e.geometry = EstimationGeometry::annulus;
  else if (geom == "square") e.geometry = EstimationGeometry::square;
  else throw ConfigError("estimation.geometry: expected \"annulus\" or \"square\", got \"" + geom + "\"");
  std::vector<std::uint64_t> ns = doc.get_u64_list("estimation.n_samples", {20, 50, 100});
  e.n_samples.assign(ns.begin(), ns.end());
  e.delta_min = doc.get_double("estimation.delta_min", e.delta_min);
  e.delta_max = doc.get_double("estimation.delta_max", e.delta_max);
  e.region_sides = doc.get_double_list("estimation.region_sides", e.region_sides);
  if (doc.has("estimation.region_height")) {
    e.region_height = doc.get_double("estimation.region_height", 0.0);
  }
  e.region_offset = doc.get_double("estimation.region_offset", e.region_offset);
  std::vector<std::uint64_t> eks = doc.get_u64_list("estimation.k", {0});
  e.ks.assign(eks.begin(), eks.end());
  e.draws = doc.get_u64("estimation.draws", e.draws);
  e.targets = doc.get_u64("estimation.targets", e.targets);
  e.bin_width = doc.get_double("estimation.bin_width", e.bin_width);
  e.max_distance = doc.get_double("estimation.max_distance", e.max_distance);

  doc.reject_unused();
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  const ConfigDoc doc = ConfigDoc::load(path);
  try {
    ExperimentConfig c = from_doc(doc);
    if (!doc.has("output")) c.output = path.stem().string() + ".csv";
    return c;
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    // Diagnostics from ConfigDoc already carry file:line.
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ConfigError(path.string() + ": " + msg);
  }
}

// ---------------------------------------------------------------------------

namespace {

// Squared prediction errors of one realization, averaged over targets, per k.
std::vector<double> amse_realization(const ExperimentConfig& cfg, const Layout& layout,
                                     std::size_t point, std::size_t trial,
                                     std::size_t* sample_count) {
  const auto& ks = cfg.ks;
  const std::size_t kmax = *std::max_element(ks.begin(), ks.end());
  const std::uint64_t sid = stream_id(point, trial);

  const std::vector<Location> samples = draw_locations(layout, cfg.seed, sid);
  *sample_count = samples.size();
  if (kmax > samples.size()) {
    throw InvalidArgument("k = " + std::to_string(kmax) + " exceeds the " +
                          std::to_string(samples.size()) + " samples of a realization");
  }
  const SpatialIndex index(samples, index_cell_size(layout));

  const double m = cfg.interior_margin(layout);
  Rng target_rng = make_stream(cfg.seed, sid, 1);
  std::uniform_real_distribution<double> ux(layout.x0 + m, layout.x0 + layout.area_side - m);
  std::uniform_real_distribution<double> uy(layout.y0 + m, layout.y0 + layout.height() - m);
  std::vector<Location> targets;
  targets.reserve(cfg.targets);
  while (targets.size() < cfg.targets) {
    const double x = ux(target_rng);
    const double y = uy(target_rng);
    const Location q{x, y};
    if (q.norm() >= std::max(layout.bs_exclusion_radius, 1e-9)) targets.push_back(q);
  }

  std::vector<std::vector<std::size_t>> nbrs(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) nbrs[t] = index.knn(targets[t], kmax);

  std::vector<KahanSum> sums(ks.size());
  std::size_t t = 0;
  std::size_t block = 0;
  while (t < targets.size()) {
    std::unordered_map<std::size_t, std::size_t> slot;
    std::vector<Location> pts;
    std::vector<std::size_t> block_targets;
    while (t < targets.size()) {
      std::size_t fresh = 0;
      for (std::size_t i : nbrs[t]) fresh += slot.count(i) ? 0 : 1;
      if (!block_targets.empty() &&
          pts.size() + block_targets.size() + fresh + 1 > cfg.joint_block) {
        break;
      }
      for (std::size_t i : nbrs[t]) {
        if (slot.try_emplace(i, pts.size()).second) pts.push_back(samples[i]);
      }
      block_targets.push_back(t);
      ++t;
    }
    const std::size_t n_samples = pts.size();
    for (std::size_t bt : block_targets) pts.push_back(targets[bt]);

    Rng field_rng = make_stream(cfg.seed, sid, 2, block++);
    const FieldRealization field = synthesize_field(pts, cfg.params, field_rng);

    std::vector<Neighbor> nb;
    for (std::size_t j = 0; j < block_targets.size(); ++j) {
      const std::size_t tt = block_targets[j];
      const Location& q = targets[tt];
      const double truth = field.gains_db[n_samples + j];
      nb.clear();
      for (std::size_t i : nbrs[tt]) {
        const std::size_t s = slot.at(i);
        const double dx = samples[i].x - q.x;
        const double dy = samples[i].y - q.y;
        nb.push_back({i, samples[i], field.gains_db[s], std::sqrt(dx * dx + dy * dy)});
      }
      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const Prediction p =
            predict_from_neighbors(q, std::span<const Neighbor>(nb.data(), ks[ki]), cfg.params);
        const double e = p.gain_db - truth;
        sums[ki].add(e * e);
      }
    }
  }
  std::vector<double> out(ks.size());
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    out[ki] = sums[ki].value() / static_cast<double>(targets.size());
  }
  return out;
}

}  // namespace

ExperimentReport run_amse_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  ExperimentReport report;
  report.config = config;
  const auto layouts = config.sweep_layouts();
  if (layouts.empty()) throw ConfigError("layout.densities or layout.spacings must be non-empty");

  for (std::size_t p = 0; p < layouts.size(); ++p) {
    const Layout& layout = layouts[p];
    std::vector<AmseRow> rows(config.ks.size());
    for (std::size_t ki = 0; ki < config.ks.size(); ++ki) {
      auto& row = rows[ki];
      row.density = layout.density();
      row.spacing = layout.kind == LayoutKind::grid ? layout.d : 0.0;
      row.k = config.ks[ki];
      AmseQuery q{config.params, layout, row.k, AmseMethod::closed_form};
      row.amse_cf = amse_known_params(q);
      q.method = AmseMethod::quadrature;
      row.amse_quad = amse_known_params(q);
    }
    try {
      const double m = config.interior_margin(layout);
      if (!(2.0 * m < std::min(layout.area_side, layout.height()))) {
        throw InvalidArgument("area side " + fmt_g17(layout.area_side) +
                              " leaves no interior after margin " + fmt_g17(m));
      }
      std::vector<std::vector<double>> per_trial(config.realizations);
      std::vector<std::size_t> counts(config.realizations);
      parallel_for(config.realizations, config.threads, [&](std::size_t r) {
        per_trial[r] = amse_realization(config, layout, p, r, &counts[r]);
      });
      KahanSum n_sum;
      for (auto c : counts) n_sum.add(static_cast<double>(c));
      for (std::size_t ki = 0; ki < config.ks.size(); ++ki) {
        std::vector<double> v(config.realizations);
        for (std::size_t r = 0; r < config.realizations; ++r) v[r] = per_trial[r][ki];
        const auto ms = mean_se(v);
        rows[ki].amse_sim = ms.mean;
        rows[ki].amse_se = ms.se;
        rows[ki].mean_samples = n_sum.value() / static_cast<double>(config.realizations);
      }
    } catch (const Error& e) {
      for (auto& row : rows) {
        row.amse_sim = kNaN;
        row.amse_se = kNaN;
        row.error = e.what();
      }
    }
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------

namespace {

struct EstimationPoint {
  Layout layout;  // density carrier for the grouping factor
  std::size_t n_samples = 0;  // annulus only
  double region_side = 0.0;   // square only
};

struct DrawResult {
  bool ok = false;
  double n_pl_err2 = 0.0, k_db_err2 = 0.0;
  double cls_nn = 0.0, cls_kk = 0.0;
  double n_samples = 0.0;
  std::vector<double> amse_true, amse_est;
};

DrawResult estimation_draw(const ExperimentConfig& cfg, const EstimationPoint& pt,
                           std::size_t point, std::size_t draw) {
  const auto& e = cfg.estimation;
  const std::uint64_t sid = stream_id(point, draw);
  Rng geo = make_stream(cfg.seed, sid, 3);
  std::vector<Location> samples, targets;

  if (e.geometry == EstimationGeometry::annulus) {
    std::uniform_real_distribution<double> ur(e.delta_min, e.delta_max);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * std::numbers::pi);
    auto one = [&] {
      const double r = ur(geo);
      const double a = ua(geo);
      return Location{r * std::cos(a), r * std::sin(a)};
    };
    for (std::size_t i = 0; i < pt.n_samples; ++i) samples.push_back(one());
    for (std::size_t i = 0; i < e.targets; ++i) targets.push_back(one());
  } else {
    samples = draw_locations(pt.layout, cfg.seed, sid);
    std::uniform_real_distribution<double> ux(pt.layout.x0, pt.layout.x0 + pt.layout.area_side);
    std::uniform_real_distribution<double> uy(pt.layout.y0, pt.layout.y0 + pt.layout.height());
    for (std::size_t i = 0; i < e.targets; ++i) {
      const double x = ux(geo);
      const double y = uy(geo);
      targets.push_back({x, y});
    }
  }

  std::vector<Location> all = samples;
  all.insert(all.end(), targets.begin(), targets.end());
  Rng field_rng = make_stream(cfg.seed, sid, 4);
  const FieldRealization field = synthesize_field(all, cfg.params, field_rng);
  const std::vector<double> gains(field.gains_db.begin(),
                                  field.gains_db.begin() + static_cast<long>(samples.size()));

  DrawResult out;
  out.n_samples = static_cast<double>(samples.size());
  ShadowingFitOptions opts;
  opts.exact_distances =
      e.geometry == EstimationGeometry::square && pt.layout.kind == LayoutKind::grid;
  opts.bin_width = e.bin_width > 0.0 ? e.bin_width : cfg.params.beta / 10.0;
  opts.max_distance = e.max_distance;
  EstimatedParams est;
  try {
    est = fit_region(samples, gains, opts);
  } catch (const DegenerateGeometry&) {
    return out;
  } catch (const InvalidArgument&) {
    return out;
  }
  out.ok = true;
  out.n_pl_err2 = (est.n_pl_hat - cfg.params.n_pl) * (est.n_pl_hat - cfg.params.n_pl);
  out.k_db_err2 = (est.k_db_hat - cfg.params.k_db) * (est.k_db_hat - cfg.params.k_db);
  const Eigen::Matrix2d cls = ls_error_covariance(samples, cfg.params);
  out.cls_kk = cls(0, 0);
  out.cls_nn = cls(1, 1);

  const std::size_t kmax = *std::max_element(e.ks.begin(), e.ks.end());
  if (kmax > samples.size()) {
    throw InvalidArgument("estimation.k exceeds the region's sample count");
  }
  const SpatialIndex index(samples, 0.0);
  std::vector<KahanSum> st(e.ks.size()), se(e.ks.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const Location& q = targets[t];
    const double truth = field.gains_db[samples.size() + t];
    const auto idx = index.knn(q, kmax);
    const auto nb = make_neighbors(q, idx, samples, gains);
    for (std::size_t ki = 0; ki < e.ks.size(); ++ki) {
      const std::size_t k = e.ks[ki];
      const std::span<const Neighbor> sub(nb.data(), k);
      const double p_true = k == 0 ? pathloss_db(q, cfg.params)
                                   : predict_from_neighbors(q, sub, cfg.params).gain_db;
      const double p_est = predict_from_neighbors(q, sub, est).gain_db;
      st[ki].add((p_true - truth) * (p_true - truth));
      se[ki].add((p_est - truth) * (p_est - truth));
    }
  }
  for (std::size_t ki = 0; ki < e.ks.size(); ++ki) {
    out.amse_true.push_back(st[ki].value() / static_cast<double>(targets.size()));
    out.amse_est.push_back(se[ki].value() / static_cast<double>(targets.size()));
  }
  return out;
}

}  // namespace

EstimationReport run_estimation_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  const auto& e = config.estimation;
  EstimationReport report;
  report.config = config;

  std::vector<EstimationPoint> points;
  if (e.geometry == EstimationGeometry::annulus) {
    const double ring = std::numbers::pi * (e.delta_max * e.delta_max - e.delta_min * e.delta_min);
    for (auto n : e.n_samples) {
      EstimationPoint pt;
      pt.layout = Layout::random(static_cast<double>(n) / ring, e.delta_max);
      pt.n_samples = n;
      points.push_back(pt);
    }
  } else {
    const auto layouts = config.sweep_layouts();
    if (layouts.empty()) throw ConfigError("square geometry needs layout.densities or spacings");
    for (const auto& base : layouts) {
      for (double side : e.region_sides) {
        EstimationPoint pt;
        pt.layout = base;
        pt.layout.area_side = side;
        pt.layout.area_height = e.region_height.value_or(side);
        pt.layout.x0 = e.region_offset;
        pt.layout.y0 = -0.5 * pt.layout.height();
        pt.region_side = side;
        points.push_back(pt);
      }
    }
  }

  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& pt = points[p];
    std::vector<EstimationRow> rows(e.ks.size());
    for (std::size_t ki = 0; ki < e.ks.size(); ++ki) {
      rows[ki].geometry = to_string(e.geometry);
      rows[ki].density = pt.layout.density();
      rows[ki].region_side = pt.region_side;
      rows[ki].k = e.ks[ki];
    }
    try {
      std::vector<DrawResult> draws(e.draws);
      parallel_for(e.draws, config.threads,
                   [&](std::size_t d) { draws[d] = estimation_draw(config, pt, p, d); });
      std::vector<double> n2, k2, cnn, ckk, ns;
      std::vector<std::vector<double>> at(e.ks.size()), ae(e.ks.size());
      std::size_t failed = 0;
      for (const auto& d : draws) {
        if (!d.ok) {
          ++failed;
          continue;
        }
        n2.push_back(d.n_pl_err2);
        k2.push_back(d.k_db_err2);
        cnn.push_back(d.cls_nn);
        ckk.push_back(d.cls_kk);
        ns.push_back(d.n_samples);
        for (std::size_t ki = 0; ki < e.ks.size(); ++ki) {
          at[ki].push_back(d.amse_true[ki]);
          ae[ki].push_back(d.amse_est[ki]);
        }
      }
      if (n2.empty()) throw DegenerateGeometry("every draw failed to fit");
      const double n_mean = mean_se(ns).mean;
      Lemma5Inputs li;
      li.n_samples = std::max<std::size_t>(3, static_cast<std::size_t>(std::llround(n_mean)));
      li.layout = pt.layout;
      li.params = config.params;
      if (e.geometry == EstimationGeometry::annulus) {
        li.delta_min = e.delta_min;
        li.delta_max = e.delta_max;
      } else {
        const auto& l = pt.layout;
        const double near_y = (l.y0 <= 0.0 && l.y0 + l.height() >= 0.0)
                                  ? 0.0
                                  : std::min(std::abs(l.y0), std::abs(l.y0 + l.height()));
        li.delta_min = std::hypot(std::max(l.x0, 0.0), near_y);
        li.delta_max = std::hypot(l.x0 + l.area_side, std::max(std::abs(l.y0),
                                                               std::abs(l.y0 + l.height())));
      }
      const Lemma5Result lem = lemma5_error(li);
      for (std::size_t ki = 0; ki < e.ks.size(); ++ki) {
        auto& row = rows[ki];
        row.n_samples = n_mean;
        row.var_n_sim = mean_se(n2).mean;
        row.var_k_sim = mean_se(k2).mean;
        row.var_n_cls = mean_se(cnn).mean;
        row.var_k_cls = mean_se(ckk).mean;
        row.var_n_approx = lem.sigma2_n;
        row.var_k_approx = lem.sigma2_k;
        const auto t = mean_se(at[ki]);
        const auto s = mean_se(ae[ki]);
        row.amse_true = t.mean;
        row.amse_true_se = t.se;
        row.amse_est = s.mean;
        row.amse_est_se = s.se;
        row.amse_small_beta = amse_estimated_params_small_beta(config.params, li.n_samples);
        row.failed_draws = failed;
      }
    } catch (const Error& err) {
      for (auto& row : rows) row.error = err.what();
    }
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------

void write_amse_csv(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "density,k,amse_sim,amse_se,amse_cf,amse_quad\n";
  for (const auto& r : report.rows) {
    out << fmt_g17(r.density) << ',' << r.k << ',' << fmt_g17(r.amse_sim) << ','
        << fmt_g17(r.amse_se) << ',' << fmt_g17(r.amse_cf) << ',' << fmt_g17(r.amse_quad)
        << '\n';
  }
}

void write_amse_plot_data(const ExperimentReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "# density k amse_sim amse_se amse_cf amse_quad\n";
  // One gnuplot data block per k.
  const auto& ks = report.config.ks;
  for (std::size_t bi = 0; bi < ks.size(); ++bi) {
    if (bi > 0) out << "\n\n";
    for (const auto& r : report.rows) {
      if (r.k != ks[bi]) continue;
      out << fmt_g17(r.density) << ' ' << r.k << ' ' << fmt_g17(r.amse_sim) << ' '
          << fmt_g17(r.amse_se) << ' ' << fmt_g17(r.amse_cf) << ' ' << fmt_g17(r.amse_quad)
          << '\n';
    }
  }
}

void write_estimation_csv(const EstimationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "geometry,density,region_side,n_samples,k,var_n_sim,var_n_approx,var_n_cls,"
         "var_k_sim,var_k_approx,var_k_cls,amse_true,amse_true_se,amse_est,amse_est_se,"
         "amse_small_beta,failed_draws\n";
  for (const auto& r : report.rows) {
    out << r.geometry << ',' << fmt_g17(r.density) << ',' << fmt_g17(r.region_side) << ','
        << fmt_g17(r.n_samples) << ',' << r.k << ',' << fmt_g17(r.var_n_sim) << ','
        << fmt_g17(r.var_n_approx) << ',' << fmt_g17(r.var_n_cls) << ',' << fmt_g17(r.var_k_sim)
        << ',' << fmt_g17(r.var_k_approx) << ',' << fmt_g17(r.var_k_cls) << ','
        << fmt_g17(r.amse_true) << ',' << fmt_g17(r.amse_true_se) << ',' << fmt_g17(r.amse_est)
        << ',' << fmt_g17(r.amse_est_se) << ',' << fmt_g17(r.amse_small_beta) << ','
        << r.failed_draws << '\n';
  }
}

}  // namespace cgm
