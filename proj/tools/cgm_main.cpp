// Command-line front end: amse, simulate, estimate, predict, genmap.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cgm/analytic.hpp"
#include "cgm/config.hpp"
#include "cgm/errors.hpp"
#include "cgm/estimation.hpp"
#include "cgm/experiment.hpp"
#include "cgm/field.hpp"
#include "cgm/predictor.hpp"
#include "cgm/sampling.hpp"
#include "cgm/text.hpp"

namespace fs = std::filesystem;
using namespace cgm;

namespace {

struct ParamFlags {
  std::optional<double> n_pl, k_db, alpha, beta, sigma2;

  void attach(CLI::App* app) {
    app->add_option("--n-pl", n_pl, "path loss exponent");
    app->add_option("--k-db", k_db, "path loss intercept (dB)");
    app->add_option("--alpha", alpha, "shadowing variance (dB^2)");
    app->add_option("--beta", beta, "shadowing correlation distance (m)");
    app->add_option("--sigma2", sigma2, "multipath variance (dB^2)");
  }
  void apply(ChannelParams& p) const {
    if (n_pl) p.n_pl = *n_pl;
    if (k_db) p.k_db = *k_db;
    if (alpha) p.alpha = *alpha;
    if (beta) p.beta = *beta;
    if (sigma2) p.sigma2 = *sigma2;
  }
};

ExperimentConfig base_config(const std::string& config_path) {
  if (config_path.empty()) return ExperimentConfig{};
  return ExperimentConfig::load(config_path);
}

fs::path output_path(const std::string& out_dir, const std::string& file) {
  fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  fs::create_directories(dir);
  return dir / file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel gain map construction, prediction and AMSE analysis"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool plot_data = false;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--seed", seed, "master RNG seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--plot-data", plot_data, "also write gnuplot .dat files");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  // amse
  auto* amse = app.add_subcommand("amse", "evaluate closed-form and quadrature AMSE");
  std::optional<double> lambda, spacing;
  std::size_t k = 1;
  ParamFlags amse_params;
  amse->add_option("--lambda", lambda, "random layout density (1/m^2)");
  amse->add_option("--d", spacing, "grid spacing (m)");
  amse->add_option("--k", k, "neighbors used for prediction")->check(CLI::PositiveNumber);
  amse_params.attach(amse);

  // simulate / estimate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo AMSE sweep (needs --config)");
  auto* estimate = app.add_subcommand(
      "estimate", "parameter estimation sweep (--config) or region fit (--map, --regions)");
  std::string est_map, est_regions;
  estimate->add_option("--map", est_map, "gain map CSV to fit");
  estimate->add_option("--regions", est_regions, "region rectangles CSV: id,x0,y0,x1,y1");
  double fit_max_distance = 0.0;
  estimate->add_option("--max-distance", fit_max_distance,
                       "ignore sample pairs farther apart than this in the correlation fit (m)");

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "predict the gain at one location");
  std::string map_path;
  double qx = 0.0, qy = 0.0;
  std::size_t pk = 1;
  bool fitted = false;
  ParamFlags predict_params;
  predict_cmd->add_option("--map", map_path, "gain map CSV")->required();
  predict_cmd->add_option("--x", qx, "query x (m)")->required();
  predict_cmd->add_option("--y", qy, "query y (m)")->required();
  predict_cmd->add_option("--k", pk, "neighbors (0 = path loss only with --fitted)");
  predict_cmd->add_flag("--fitted", fitted, "fit parameters from the whole map first");
  predict_cmd->add_option("--max-distance", fit_max_distance,
                          "with --fitted: correlation-fit pair cap (m)");
  predict_params.attach(predict_cmd);

  // genmap
  auto* genmap = app.add_subcommand("genmap", "draw a layout, synthesize gains, save a map");
  std::string kind = "random";
  std::optional<double> gm_lambda, gm_d;
  double side = 300.0;
  std::string map_name = "map.csv";
  ParamFlags gm_params;
  genmap->add_option("--kind", kind, "random or grid");
  genmap->add_option("--lambda", gm_lambda, "random layout density (1/m^2)");
  genmap->add_option("--d", gm_d, "grid spacing (m)");
  genmap->add_option("--side", side, "area side length (m)");
  genmap->add_option("--name", map_name, "output file name");
  gm_params.attach(genmap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentConfig cfg = base_config(config_path);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;

    if (*amse) {
      amse_params.apply(cfg.params);
      cfg.params.validate();
      if (lambda.has_value() == spacing.has_value()) {
        throw ConfigError("amse: give exactly one of --lambda or --d");
      }
      const Layout layout = lambda ? Layout::random(*lambda, cfg.area_side)
                                   : Layout::grid(*spacing, cfg.area_side);
      AmseQuery q{cfg.params, layout, k, AmseMethod::closed_form};
      const double z_cf = zeta(q);
      const double a_cf = amse_known_params(q);
      const double s_cf = amse_slope_k(q);
      q.method = AmseMethod::quadrature;
      const double z_q = zeta(q);
      const double a_q = amse_known_params(q);
      std::cout << "layout," << (lambda ? "lambda" : "d") << ",k,zeta_cf,zeta_quad,amse_cf,"
                << "amse_quad,slope_k\n"
                << to_string(layout.kind) << ',' << fmt_g17(lambda ? *lambda : *spacing) << ','
                << k << ',' << fmt_g17(z_cf) << ',' << fmt_g17(z_q) << ',' << fmt_g17(a_cf)
                << ',' << fmt_g17(a_q) << ',' << fmt_g17(s_cf) << '\n';
      return 0;
    }

    if (*simulate) {
      if (config_path.empty()) throw ConfigError("simulate: --config is required");
      const auto report = run_amse_experiment(cfg);
      const auto path = output_path(out_dir, cfg.output);
      write_amse_csv(report, path);
      if (plot_data) {
        auto dat = path;
        write_amse_plot_data(report, dat.replace_extension(".dat"));
      }
      int failed = 0;
      for (const auto& r : report.rows) {
        if (!r.error.empty()) {
          std::cerr << "density " << fmt_g17(r.density) << " k " << r.k << ": " << r.error
                    << '\n';
          ++failed;
        }
      }
      std::cerr << "wrote " << path.string() << " (" << report.rows.size() << " rows, "
                << report.wall_seconds << " s)\n";
      return failed ? 2 : 0;
    }

    if (*estimate) {
      if (!est_map.empty() || !est_regions.empty()) {
        if (est_map.empty() || est_regions.empty()) {
          throw ConfigError("estimate: --map and --regions go together");
        }
        const GainMap map = load_gain_map(est_map);
        std::vector<Region> regions;
        for (const auto& [id, rect] : load_region_rects(est_regions)) {
          regions.push_back(Region::from_rect(map, id, rect));
        }
        ShadowingFitOptions opts;
        opts.exact_distances = map.layout().kind == LayoutKind::grid;
        opts.max_distance = fit_max_distance;
        const auto fits = fit_region_pipeline(map, regions, opts);
        const auto path = output_path(out_dir, "estimates.csv");
        write_estimates_csv(fits, path);
        for (const auto& f : fits) {
          if (!f.params) std::cerr << "region " << f.region_id << ": " << f.error << '\n';
        }
        std::cerr << "wrote " << path.string() << '\n';
        return 0;
      }
      if (config_path.empty()) throw ConfigError("estimate: --config is required");
      const auto report = run_estimation_experiment(cfg);
      const auto path = output_path(out_dir, cfg.output);
      write_estimation_csv(report, path);
      int failed = 0;
      for (const auto& r : report.rows) {
        if (!r.error.empty()) {
          std::cerr << "sweep point: " << r.error << '\n';
          ++failed;
        }
      }
      std::cerr << "wrote " << path.string() << " (" << report.wall_seconds << " s)\n";
      return failed ? 2 : 0;
    }

    if (*predict_cmd) {
      predict_params.apply(cfg.params);
      const GainMap map = load_gain_map(map_path);
      const Location q{qx, qy};
      Prediction p;
      if (fitted) {
        ShadowingFitOptions opts;
        opts.exact_distances = map.layout().kind == LayoutKind::grid;
        opts.max_distance = fit_max_distance;
        const auto est = fit_region(map.locations(), map.gains_db(), opts);
        p = predict(map, q, pk, est);
      } else {
        if (pk == 0) throw ConfigError("predict: k must be >= 1 with known parameters");
        p = predict(map, q, pk, cfg.params);
      }
      std::cout << "x,y,k,gain_db,mse_db2\n"
                << fmt_g17(qx) << ',' << fmt_g17(qy) << ',' << p.k_used << ','
                << fmt_g17(p.gain_db) << ',' << fmt_g17(p.mse_db2) << '\n';
      return 0;
    }

    if (*genmap) {
      gm_params.apply(cfg.params);
      Layout layout;
      const LayoutKind lk = parse_layout_kind(kind);
      if (lk == LayoutKind::random) {
        if (!gm_lambda) throw ConfigError("genmap: random layouts need --lambda");
        layout = Layout::random(*gm_lambda, side);
      } else {
        if (!gm_d) throw ConfigError("genmap: grid layouts need --d");
        layout = Layout::grid(*gm_d, side);
      }
      layout.bs_exclusion_radius = cfg.bs_exclusion_radius;
      const auto locs = draw_locations(layout, cfg.seed);
      const auto field = synthesize_field(locs, cfg.params, cfg.seed, 1);
      const GainMap map(layout, locs, field.gains_db, cfg.seed);
      const auto path = output_path(out_dir, map_name);
      save_gain_map(map, path);
      std::cerr << "wrote " << path.string() << " (" << map.size() << " samples)\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
