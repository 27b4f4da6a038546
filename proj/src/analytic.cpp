#include "cgm/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "cgm/errors.hpp"
#include "cgm/quadrature.hpp"

namespace cgm {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kQuadTol = 1e-13;

// 1 - (1 + t) e^{-t}, accurate for small t.
double one_minus_one_plus_t_exp(double t) {
  if (t < 0.5) {
    // sum_{n>=2} (-1)^n (n-1) t^n / n!
    double term = t * t / 2.0;  // t^n / n! at n = 2
    double sum = 0.0;
    for (int n = 2; n < 40; ++n) {
      const double s = (n % 2 == 0 ? 1.0 : -1.0) * (n - 1) * term;
      sum += s;
      if (std::abs(s) < 1e-18 * std::abs(sum)) break;
      term *= t / (n + 1);
    }
    return sum;
  }
  return 1.0 - (1.0 + t) * std::exp(-t);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double erfcx(double x) {
  if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 5.0) return std::exp(x * x) * std::erfc(x);
  // Laplace continued fraction, evaluated bottom-up.
  double f = x;
  for (int n = 120; n >= 1; --n) f = x + 0.5 * n / f;
  return 1.0 / (kSqrtPi * f);
}

double psi_polynomial(double x) {
  return (0.2854 - 0.0725 * x + 0.0108 * x * x) * std::exp(-x);
}

double psi(double x, PsiMethod method) {
  if (method == PsiMethod::polynomial) return psi_polynomial(x);
  // u = 1 + s^2 removes the square-root behaviour of arccos(1/u) at u = 1.
  const double s_max = std::sqrt(std::numbers::sqrt2 - 1.0);
  auto integrand = [x](double s) {
    const double u = 1.0 + s * s;
    return 2.0 * s * u * std::exp(-u * x) * std::acos(std::min(1.0, 1.0 / u));
  };
  return integrate(integrand, 0.0, s_max, kQuadTol).value;
}

double zeta_r(double lambda, double beta, AmseMethod method) {
  if (!(lambda > 0.0) || !(beta > 0.0)) {
    throw InvalidArgument("zeta_r needs lambda > 0 and beta > 0");
  }
  if (method == AmseMethod::closed_form) {
    const double z = 1.0 / (beta * std::sqrt(kPi * lambda));
    return clamp01(1.0 - kSqrtPi * z * erfcx(z));
  }
  // Tail beyond x_max is bounded by exp(-pi lambda x_max^2) = 1e-16.
  const double x_max = std::sqrt(16.0 * std::log(10.0) / (kPi * lambda));
  auto integrand = [lambda, beta](double x) {
    return std::exp(-2.0 * x / beta) * pdf_dmin_random(x, lambda);
  };
  // Breakpoints at the kernel and density scales so neither peak is skipped.
  std::vector<double> cuts{0.0, std::min(5.0 * beta, x_max),
                           std::min(1.0 / std::sqrt(lambda), x_max), x_max};
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) total += integrate(integrand, cuts[i], cuts[i + 1], kQuadTol).value;
  }
  return clamp01(total);
}

double zeta_r_alternate_grouping(double lambda, double beta) {
  const double z = 1.0 / (beta * std::sqrt(kPi * lambda));
  return (1.0 - std::exp(z * z) / (beta * std::sqrt(lambda))) * std::erfc(z);
}

double zeta_g(double d, double beta, AmseMethod method, PsiMethod psi_method) {
  if (!(d > 0.0) || !(beta > 0.0)) throw InvalidArgument("zeta_g needs d > 0 and beta > 0");
  if (method == AmseMethod::closed_form) {
    const double r = d / beta;
    const double t = std::numbers::sqrt2 * r;
    const double disk = kPi / (2.0 * r * r) * one_minus_one_plus_t_exp(t);
    return clamp01(disk - 2.0 * psi(r, psi_method));
  }
  const double half = 0.5 * d;
  const double corner = std::numbers::sqrt2 * half;
  auto inner = [d, beta](double x) { return std::exp(-2.0 * x / beta) * pdf_dmin_grid(x, d); };
  // x = d/2 + s^2 on the outer branch, where the density has a square-root kink.
  auto outer = [&](double s) {
    const double x = half + s * s;
    return 2.0 * s * std::exp(-2.0 * x / beta) * pdf_dmin_grid(x, d);
  };
  const double a = integrate(inner, 0.0, half, kQuadTol).value;
  const double b = integrate(outer, 0.0, std::sqrt(corner - half), kQuadTol).value;
  return clamp01(a + b);
}

double zeta(const AmseQuery& query) {
  query.layout.validate();
  if (query.layout.kind == LayoutKind::random) {
    return zeta_r(query.layout.lambda, query.params.beta, query.method);
  }
  return zeta_g(query.layout.d, query.params.beta, query.method);
}

double amse_known_params(const AmseQuery& query) {
  query.params.validate();
  if (query.k < 1) throw InvalidArgument("AMSE needs k >= 1");
  const double a = query.params.alpha;
  const double s2 = query.params.sigma2;
  const double k = static_cast<double>(query.k);
  if (a == 0.0) return s2;
  return a + s2 - k * a * a / (k * a + s2) * zeta(query);
}

double amse_slope_k(const AmseQuery& query) {
  query.params.validate();
  if (query.k < 1) throw InvalidArgument("AMSE needs k >= 1");
  const double a = query.params.alpha;
  const double s2 = query.params.sigma2;
  const double k = static_cast<double>(query.k);
  if (a == 0.0 || s2 == 0.0) return 0.0;
  const double den = k * a + s2;
  return -a * a * s2 / (den * den) * zeta(query);
}

double amse_estimated_params_small_beta(const ChannelParams& params, std::size_t n_samples) {
  params.validate();
  if (n_samples < 3) throw InvalidArgument("path loss fit needs N >= 3 samples");
  return (params.alpha + params.sigma2) * (1.0 + 2.0 / static_cast<double>(n_samples));
}

double mse_k1(double dmin, const ChannelParams& params) {
  const double a = params.alpha;
  const double s2 = params.sigma2;
  if (a + s2 == 0.0) return 0.0;
  return a + s2 - a * a / (a + s2) * std::exp(-2.0 * dmin / params.beta);
}

double mse_dense_limit(std::size_t k, const ChannelParams& params) {
  const double a = params.alpha;
  const double s2 = params.sigma2;
  const double kk = static_cast<double>(k);
  if (kk * a + s2 == 0.0) return 0.0;
  return a + s2 - kk * a * a / (kk * a + s2);
}

}  // namespace cgm
