#pragma once

#include <cstddef>

#include "cgm/field.hpp"
#include "cgm/sampling.hpp"

namespace cgm {

enum class AmseMethod { closed_form, quadrature };
enum class PsiMethod { quadrature, polynomial };

/// Scaled complementary error function exp(x^2) erfc(x).
double erfcx(double x);

/// Psi(x) = int_1^sqrt2 u exp(-u x) arccos(1/u) du.
double psi(double x, PsiMethod method = PsiMethod::quadrature);
/// Fitted fast path (0.2854 - 0.0725 x + 0.0108 x^2) exp(-x).
double psi_polynomial(double x);

/// E[exp(-2 dmin / beta)] under the PPP nearest-distance law.
/// closed_form: 1 - sqrt(pi) z erfcx(z), z = 1 / (beta sqrt(pi lambda)).
double zeta_r(double lambda, double beta, AmseMethod method = AmseMethod::closed_form);
/// The other grouping of the same symbols, (1 - e^{z^2}/(beta sqrt(lambda))) erfc(z).
/// Kept only to show that it disagrees with the quadrature.
double zeta_r_alternate_grouping(double lambda, double beta);

/// E[exp(-2 dmin / beta)] for a uniform target in a grid of spacing d.
/// closed_form evaluates the Psi-based expression with `psi_method`
/// (polynomial unless asked otherwise); quadrature integrates the dmin density.
double zeta_g(double d, double beta, AmseMethod method = AmseMethod::closed_form,
              PsiMethod psi_method = PsiMethod::polynomial);

struct AmseQuery {
  ChannelParams params;
  Layout layout;
  std::size_t k = 1;
  AmseMethod method = AmseMethod::closed_form;
};

/// zeta_r or zeta_g depending on the layout kind.
double zeta(const AmseQuery& query);

/// alpha + sigma2 - k alpha^2 / (k alpha + sigma2) * zeta. Exact for k = 1,
/// an approximation for k > 1 that is tight at high density.
double amse_known_params(const AmseQuery& query);

/// d AMSE / d k with k treated as continuous.
double amse_slope_k(const AmseQuery& query);

/// (alpha + sigma2)(1 + 2/N): path-loss-only prediction with LS-fitted
/// parameters when shadowing decorrelates faster than the sample spacing.
double amse_estimated_params_small_beta(const ChannelParams& params, std::size_t n_samples);

/// MSE of a k = 1 prediction with the neighbor at distance dmin.
double mse_k1(double dmin, const ChannelParams& params);
/// MSE when all k neighbors collapse onto the target.
double mse_dense_limit(std::size_t k, const ChannelParams& params);

}  // namespace cgm
