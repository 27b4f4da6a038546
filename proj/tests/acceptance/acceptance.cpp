// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cgm/analytic.hpp"
#include "cgm/estimation.hpp"
#include "cgm/experiment.hpp"
#include "cgm/field.hpp"
#include "cgm/predictor.hpp"
#include "cgm/quadrature.hpp"
#include "cgm/sampling.hpp"
#include "cgm/text.hpp"

namespace fs = std::filesystem;
using namespace cgm;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }
  return out;
}

double integrate_random_pdf(double lambda) {
  const double top = 20.0 / std::sqrt(lambda);
  return integrate([&](double x) { return pdf_dmin_random(x, lambda); }, 0.0, top).value;
}

double integrate_grid_pdf(double d) {
  auto f = [&](double x) { return pdf_dmin_grid(x, d); };
  const double knee = 0.5 * d;
  return integrate(f, 0.0, knee).value + integrate(f, knee, std::numbers::sqrt2 * knee).value;
}

// 1. Densities of the nearest-sample distance integrate to one.
Outcome pdf_normalization() {
  Outcome o;
  double worst = 0.0;
  for (double lambda : logspace(1e-5, 10.0, 20)) {
    const double err = std::abs(integrate_random_pdf(lambda) - 1.0);
    worst = std::max(worst, err);
    o.require(err < 1e-9, "random lambda=" + num(lambda) + " err=" + num(err));
  }
  for (double d : logspace(0.1, 300.0, 20)) {
    const double err = std::abs(integrate_grid_pdf(d) - 1.0);
    worst = std::max(worst, err);
    o.require(err < 1e-9, "grid d=" + num(d) + " err=" + num(err));
  }
  o.note("40 densities, max |integral - 1| = " + num(worst, 3));
  return o;
}

// 2. Closed-form zeta_r agrees with quadrature of its defining integral.
Outcome zeta_r_oracle() {
  Outcome o;
  double worst = 0.0;
  for (double lambda : logspace(1e-4, 1.0, 10)) {
    for (double beta : logspace(1.0, 100.0, 10)) {
      const double cf = zeta_r(lambda, beta, AmseMethod::closed_form);
      const double quad = zeta_r(lambda, beta, AmseMethod::quadrature);
      const double err = std::abs(cf - quad);
      worst = std::max(worst, err);
      if (err >= 1e-6) {
        const double alt = zeta_r_alternate_grouping(lambda, beta);
        o.require(false, "lambda=" + num(lambda) + " beta=" + num(beta) + " cf=" + num(cf, 10) +
                             " quad=" + num(quad, 10) + " alternate=" + num(alt, 10));
      }
    }
  }
  o.note("100 grid points, max |closed form - quadrature| = " + num(worst, 3));
  double alt_gap = 0.0;
  for (double lambda : logspace(1e-4, 1.0, 10)) {
    for (double beta : logspace(1.0, 100.0, 10)) {
      alt_gap = std::max(alt_gap, std::abs(zeta_r_alternate_grouping(lambda, beta) -
                                           zeta_r(lambda, beta, AmseMethod::quadrature)));
    }
  }
  o.note("alternate grouping max gap = " + num(alt_gap, 3));
  return o;
}

ExperimentConfig amse_config(LayoutKind kind, std::vector<double> densities, double side) {
  ExperimentConfig c;
  c.kind = kind;
  c.densities = std::move(densities);
  c.area_side = side;
  c.realizations = 200;
  c.targets = 500;
  c.seed = 2024;
  return c;
}

// 3. Simulated k = 1 AMSE matches the exact expression.
Outcome k1_exactness() {
  Outcome o;
  auto c = amse_config(LayoutKind::random, {1e-4, 1e-3, 3e-3, 1e-2, 3e-2}, 1000.0);
  const auto rep = run_amse_experiment(c);
  for (const auto& r : rep.rows) {
    if (!r.error.empty()) {
      o.require(false, "lambda=" + num(r.density) + ": " + r.error);
      continue;
    }
    const double z = (r.amse_sim - r.amse_cf) / r.amse_se;
    o.require(std::abs(z) < 3.0, "lambda=" + num(r.density) + " z=" + num(z, 3));
    o.note("lambda=" + num(r.density) + " sim=" + num(r.amse_sim, 5) + " cf=" + num(r.amse_cf, 5) +
           " z=" + num(z, 2));
  }
  o.note(num(rep.wall_seconds, 3) + " s");
  return o;
}

// 4. Sparse and dense limits.
Outcome limits() {
  Outcome o;
  const ChannelParams p;
  const double sparse = p.alpha + p.sigma2;
  const double dense = p.sigma2 + p.alpha * p.sigma2 / (p.alpha + p.sigma2);
  auto amse_at = [&](double lambda) {
    AmseQuery q;
    q.layout = Layout::random(lambda, 1000.0);
    return amse_known_params(q);
  };
  const double a_sparse = amse_at(1e-8);
  const double a_dense = amse_at(1e4);
  o.require(std::abs(a_sparse - sparse) / sparse < 0.02, "sparse analytic " + num(a_sparse, 6));
  o.require(std::abs(a_dense - dense) / dense < 0.02, "dense analytic " + num(a_dense, 6));
  o.note("analytic " + num(a_sparse, 6) + " -> " + num(sparse) + ", " + num(a_dense, 6) + " -> " +
         num(dense));

  auto lo = amse_config(LayoutKind::random, {2e-6}, 5000.0);
  lo.realizations = 1000;
  const auto lo_rep = run_amse_experiment(lo);
  const auto& rl = lo_rep.rows.at(0);
  auto hi = amse_config(LayoutKind::random, {30.0}, 40.0);
  hi.margin = 4.0;
  const auto hi_rep = run_amse_experiment(hi);
  const auto& rh = hi_rep.rows.at(0);
  for (const auto* r : {&rl, &rh}) {
    const double target = r == &rl ? sparse : dense;
    if (!r->error.empty()) {
      o.require(false, r->error);
      continue;
    }
    o.require(std::abs(r->amse_sim - target) / target < 0.02,
              "simulated lambda=" + num(r->density) + " " + num(r->amse_sim, 5));
    o.require(std::abs(r->amse_sim - r->amse_cf) < 3.0 * r->amse_se,
              "simulated lambda=" + num(r->density) + " off closed form");
    o.note("simulated lambda=" + num(r->density) + " " + num(r->amse_sim, 5) + " +- " +
           num(r->amse_se, 2));
  }
  return o;
}

// 5. k-NN approximation at high density.
Outcome approximation_quality() {
  Outcome o;
  const ChannelParams p;
  for (double lambda : {0.01, 0.03}) {
    const double mean_dmin = 0.5 / std::sqrt(lambda);
    o.require(mean_dmin <= p.beta / 5.0, "lambda=" + num(lambda) + " is not high density");
  }
  auto c = amse_config(LayoutKind::random, {0.01, 0.03}, 400.0);
  c.ks = {1, 2, 4, 8};
  const auto rep = run_amse_experiment(c);
  for (const auto& r : rep.rows) {
    if (!r.error.empty()) {
      o.require(false, r.error);
      continue;
    }
    const double rel = (r.amse_sim - r.amse_cf) / r.amse_cf;
    o.require(std::abs(rel) < 0.10, "lambda=" + num(r.density) + " k=" + std::to_string(r.k) +
                                        " rel=" + num(rel, 3));
    o.note("lambda=" + num(r.density) + " k=" + std::to_string(r.k) + " rel=" + num(rel, 2));
  }
  auto sparse = amse_config(LayoutKind::random, {1e-4}, 1000.0);
  sparse.ks = {2, 8};
  sparse.realizations = 50;
  for (const auto& r : run_amse_experiment(sparse).rows) {
    if (r.error.empty()) {
      o.note("low density (reported only) k=" + std::to_string(r.k) +
             " rel=" + num((r.amse_sim - r.amse_cf) / r.amse_cf, 2));
    }
  }
  return o;
}

// 6. Grid sampling dominates random sampling.
Outcome grid_dominance() {
  Outcome o;
  int checked = 0;
  for (double lambda : logspace(1e-4, 1.0, 10)) {
    for (double beta : logspace(1.0, 100.0, 10)) {
      const double zg = zeta_g(1.0 / std::sqrt(lambda), beta);
      const double zr = zeta_r(lambda, beta);
      ++checked;
      o.require(zg >= zr, "lambda=" + num(lambda) + " beta=" + num(beta) + " zeta_g=" + num(zg, 8) +
                              " zeta_r=" + num(zr, 8));
    }
  }
  o.note(std::to_string(checked) + " analytic pairs");
  const std::vector<double> lambdas{1e-3, 3e-3, 1e-2};
  const auto grid = run_amse_experiment(amse_config(LayoutKind::grid, lambdas, 600.0));
  const auto rand = run_amse_experiment(amse_config(LayoutKind::random, lambdas, 600.0));
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const auto& g = grid.rows.at(i);
    const auto& r = rand.rows.at(i);
    if (!g.error.empty() || !r.error.empty()) {
      o.require(false, g.error + r.error);
      continue;
    }
    const double se = std::hypot(g.amse_se, r.amse_se);
    o.require(g.amse_sim <= r.amse_sim + 2.0 * se,
              "simulated lambda=" + num(lambdas[i]) + " grid " + num(g.amse_sim, 5) + " > random " +
                  num(r.amse_sim, 5));
    o.note("lambda=" + num(lambdas[i]) + " grid " + num(g.amse_sim, 4) + " random " +
           num(r.amse_sim, 4));
  }
  return o;
}

// 7. LS parameter error variances.
Outcome ls_error_variance() {
  Outcome o;
  ExperimentConfig c;
  c.params.beta = 1.0;
  c.seed = 77;
  c.estimation.n_samples = {20, 50, 100};
  c.estimation.draws = 1000;
  c.estimation.targets = 1;
  const auto rep = run_estimation_experiment(c);
  for (const auto& r : rep.rows) {
    if (!r.error.empty()) {
      o.require(false, r.error);
      continue;
    }
    const double rn = r.var_n_sim / r.var_n_approx;
    const double rk = r.var_k_sim / r.var_k_approx;
    const std::string n = std::to_string(static_cast<int>(r.n_samples));
    o.require(std::abs(rn - 1.0) <= 0.15, "N=" + n + " var(n) ratio " + num(rn, 3));
    o.require(std::abs(rk - 1.0) <= 0.15, "N=" + n + " var(K) ratio " + num(rk, 3));
    o.note("N=" + n + " sim/approx var(n) " + num(rn, 3) + " var(K) " + num(rk, 3));
  }

  ExperimentConfig s;
  s.kind = LayoutKind::grid;
  s.seed = 78;
  s.spacings = {10.0, 10.0 / std::numbers::sqrt2, 5.0};
  s.estimation.geometry = EstimationGeometry::square;
  s.estimation.region_sides = {100.0};
  s.estimation.draws = 2000;
  s.estimation.targets = 1;
  const auto sat = run_estimation_experiment(s);
  for (std::size_t i = 1; i < sat.rows.size(); ++i) {
    const auto& a = sat.rows[i - 1];
    const auto& b = sat.rows[i];
    const double dn = std::abs(b.var_n_sim - a.var_n_sim) / a.var_n_sim;
    const double dk = std::abs(b.var_k_sim - a.var_k_sim) / a.var_k_sim;
    const double dl = std::abs(b.var_n_approx - a.var_n_approx) / a.var_n_approx;
    o.require(dn < 0.10 && dk < 0.10, "beta=30 doubling " + std::to_string(i) + " changes " +
                                          num(dn, 3) + ", " + num(dk, 3));
    o.note("beta=30 N " + std::to_string(static_cast<int>(a.n_samples)) + "->" +
           std::to_string(static_cast<int>(b.n_samples)) + " sim change " + num(dn, 2) + "/" +
           num(dk, 2) + " approx " + num(dl, 2));
  }
  return o;
}

// 8. Path-loss-only AMSE with fitted parameters for white shadowing.
Outcome small_beta_amse() {
  Outcome o;
  ExperimentConfig c;
  c.params.beta = 0.1;
  c.seed = 88;
  c.estimation.n_samples = {10, 20, 50, 100};
  c.estimation.ks = {0};
  c.estimation.draws = 1000;
  c.estimation.targets = 50;
  const auto rep = run_estimation_experiment(c);
  for (const auto& r : rep.rows) {
    if (!r.error.empty()) {
      o.require(false, r.error);
      continue;
    }
    const double ratio = r.amse_est / r.amse_small_beta;
    const std::string n = std::to_string(static_cast<int>(r.n_samples));
    o.require(std::abs(ratio - 1.0) <= 0.10, "N=" + n + " ratio " + num(ratio, 3));
    o.note("N=" + n + " sim/formula " + num(ratio, 3));
  }
  return o;
}

// 9. Exact recovery and identities.
Outcome identities() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(10.0, 310.0);

  ChannelParams noiseless;
  noiseless.alpha = 0.0;
  noiseless.sigma2 = 0.0;
  noiseless.n_pl = 3.1;
  noiseless.k_db = -72.5;
  double ls_err = 0.0, ortho = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto locs = draw_locations(Layout::random(5e-4, 300.0), s);
    const auto clean = synthesize_field(locs, noiseless, s);
    const auto fit = fit_pathloss(locs, clean.gains_db);
    ls_err = std::max({ls_err, std::abs(fit.n_pl_hat - 3.1), std::abs(fit.k_db_hat + 72.5)});

    const auto noisy = synthesize_field(locs, ChannelParams{}, s);
    const auto nf = fit_pathloss(locs, noisy.gains_db);
    double s1 = 0.0, sh = 0.0;
    for (std::size_t i = 0; i < locs.size(); ++i) {
      s1 += nf.residuals[i];
      sh += nf.h[i] * nf.residuals[i];
    }
    ortho = std::max({ortho, std::abs(s1), std::abs(sh)});
  }
  o.require(ls_err < 1e-9, "noiseless LS error " + num(ls_err, 3));
  o.require(ortho < 1e-9, "H^T s = " + num(ortho, 3));

  const ChannelParams p;
  double k1_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Location q{u(rng), u(rng)};
    const Location s{u(rng), u(rng)};
    std::vector<Neighbor> nb{{0, s, -100.0, distance(q, s)}};
    k1_err = std::max(k1_err, std::abs(predict_from_neighbors(q, nb, p).mse_db2 - mse_k1(nb[0].distance, p)));
  }
  o.require(k1_err < 1e-12, "k=1 general path vs closed form " + num(k1_err, 3));

  int violations = 0;
  for (int cfg = 0; cfg < 100; ++cfg) {
    std::vector<Location> locs;
    for (int i = 0; i < 30; ++i) locs.push_back({u(rng), u(rng)});
    const GainMap map(Layout::random(30.0 / 90000.0, 300.0), locs, std::vector<double>(30, -100.0));
    const Location q{u(rng), u(rng)};
    double prev = p.alpha + p.sigma2 + 1e-12;
    for (std::size_t k = 1; k <= 20; ++k) {
      const double m = predict(map, q, k, p).mse_db2;
      if (m > prev + 1e-12) ++violations;
      prev = m;
    }
  }
  o.require(violations == 0, std::to_string(violations) + " MSE increases in k");
  o.note("LS " + num(ls_err, 2) + ", H^T s " + num(ortho, 2) + ", k=1 " + num(k1_err, 2) +
         ", monotone on 100 configurations");
  return o;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CGM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Largest absolute difference between numeric fields of two CSV files.
double csv_max_diff(const fs::path& a, const fs::path& b, bool* same_shape) {
  std::istringstream sa(slurp(a)), sb(slurp(b));
  std::string la, lb;
  double worst = 0.0;
  *same_shape = true;
  while (true) {
    const bool ga = static_cast<bool>(std::getline(sa, la));
    const bool gb = static_cast<bool>(std::getline(sb, lb));
    if (ga != gb) *same_shape = false;
    if (!ga || !gb) break;
    const auto fa = split(la, ',');
    const auto fb = split(lb, ',');
    if (fa.size() != fb.size()) {
      *same_shape = false;
      break;
    }
    for (std::size_t i = 0; i < fa.size(); ++i) {
      if (fa[i] == fb[i]) continue;
      try {
        worst = std::max(worst, std::abs(parse_double(fa[i]) - parse_double(fb[i])));
      } catch (const std::exception&) {
        *same_shape = false;
      }
    }
  }
  return worst;
}

// 10. Reproducible output and thread-count independence.
Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "cgm_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "sim.toml") << "seed = 21\noutput = \"amse.csv\"\n[layout]\nkind = \"random\"\n"
                                     "densities = [0.003, 0.01]\n[simulation]\nk = [1, 2, 4]\n"
                                     "realizations = 20\ntargets = 200\n";
  std::ofstream(dir / "est.toml") << "seed = 22\noutput = \"est.csv\"\n[estimation]\n"
                                     "n_samples = [20, 50]\nk = [0, 2]\ndraws = 100\n";
  const std::string sim = "--config " + (dir / "sim.toml").string();
  const std::string est = "--config " + (dir / "est.toml").string();
  const std::string gen = "--seed 5 genmap --kind random --lambda 0.005 --side 300 --name map.csv";

  struct Run {
    std::string args;
    std::string file;
  };
  const std::vector<Run> runs{{sim + " simulate", "amse.csv"},
                              {est + " estimate", "est.csv"},
                              {gen, "map.csv"},
                              {gen, "map.meta"}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const fs::path a = dir / ("a" + std::to_string(i));
    const fs::path b = dir / ("b" + std::to_string(i));
    const int ca = run_cli(runs[i].args + " --out " + a.string());
    const int cb = run_cli(runs[i].args + " --out " + b.string());
    o.require(ca == 0 && cb == 0, "exit codes " + std::to_string(ca) + "," + std::to_string(cb) +
                                      " for " + runs[i].file);
    const std::string ta = slurp(a / runs[i].file);
    o.require(!ta.empty() && ta == slurp(b / runs[i].file), runs[i].file + " differs between runs");
  }

  for (const auto& [args, file] : std::vector<Run>{{sim + " simulate", "amse.csv"},
                                                   {est + " estimate", "est.csv"}}) {
    const fs::path serial = dir / ("serial_" + file);
    const fs::path par = dir / ("parallel_" + file);
    const int c1 = run_cli("--threads 1 " + args + " --out " + serial.string());
    const int c4 = run_cli("--threads 4 " + args + " --out " + par.string());
    o.require(c1 == 0 && c4 == 0, "threaded run failed for " + file);
    bool shape = false;
    const double diff = csv_max_diff(serial / file, par / file, &shape);
    o.require(shape, file + " shape differs between thread counts");
    o.require(diff <= 1e-12, file + " parallel vs serial diff " + num(diff, 3));
    o.note(file + " parallel vs serial max diff " + num(diff, 2));
  }
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"pdf normalization", pdf_normalization},
      {"zeta_r closed form vs quadrature", zeta_r_oracle},
      {"k=1 simulation exactness", k1_exactness},
      {"sparse and dense limits", limits},
      {"k-NN approximation at high density", approximation_quality},
      {"grid dominance", grid_dominance},
      {"LS parameter error variances", ls_error_variance},
      {"small-beta fitted path loss AMSE", small_beta_amse},
      {"exact recovery and identities", identities},
      {"determinism", determinism},
  };
  // Optional arguments select criteria by number.
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int a = 1; a < argc; ++a) {
    const long n = std::strtol(argv[a], nullptr, 10);
    if (n >= 1 && static_cast<std::size_t>(n) <= criteria.size()) selected[n - 1] = true;
  }
  int failed = 0;
  std::size_t ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s) [%.1f s]: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria passed\n", ran - static_cast<std::size_t>(failed), ran);
  return failed == 0 ? 0 : 1;
}
