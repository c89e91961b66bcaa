#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "fitcoef/errors.hpp"
#include "fitcoef/kernel.hpp"
#include "fitcoef/models.hpp"
#include "fitcoef/npde.hpp"
#include "fitcoef/random.hpp"

namespace fitcoef {

/// L(alpha) = sum_i log(alpha p_i + (1 - alpha) g_i). Returns -inf when any
/// mixture term is zero.
template <typename DerivedP, typename DerivedG>
typename DerivedP::Scalar mixture_loglik(typename DerivedP::Scalar alpha,
                                         const Eigen::MatrixBase<DerivedP>& param_values,
                                         const Eigen::MatrixBase<DerivedG>& nonparam_values) {
  using Scalar = typename DerivedP::Scalar;
  using std::log;
  if (param_values.size() != nonparam_values.size())
    throw LengthMismatch("parametric and nonparametric value vectors differ in length");
  Scalar total(0);
  for (Eigen::Index i = 0; i < param_values.size(); ++i) {
    const Scalar m = alpha * param_values(i) + (Scalar(1) - alpha) * nonparam_values(i);
    if (!(m > Scalar(0))) return -std::numeric_limits<Scalar>::infinity();
    total += log(m);
  }
  return total;
}

/// L'(alpha) = sum_i (p_i - g_i) / (alpha p_i + (1 - alpha) g_i), strictly
/// decreasing in alpha whenever p != g.
template <typename DerivedP, typename DerivedG>
typename DerivedP::Scalar mixture_loglik_slope(typename DerivedP::Scalar alpha,
                                               const Eigen::MatrixBase<DerivedP>& param_values,
                                               const Eigen::MatrixBase<DerivedG>& nonparam_values) {
  using Scalar = typename DerivedP::Scalar;
  if (param_values.size() != nonparam_values.size())
    throw LengthMismatch("parametric and nonparametric value vectors differ in length");
  Scalar total(0);
  for (Eigen::Index i = 0; i < param_values.size(); ++i) {
    const Scalar diff = param_values(i) - nonparam_values(i);
    if (diff == Scalar(0)) continue;
    const Scalar m = alpha * param_values(i) + (Scalar(1) - alpha) * nonparam_values(i);
    total += m > Scalar(0) ? diff / m
                           : (diff > Scalar(0) ? std::numeric_limits<Scalar>::infinity()
                                               : -std::numeric_limits<Scalar>::infinity());
  }
  return total;
}

/// L''(alpha) = -sum_i (p_i - g_i)^2 / (alpha p_i + (1 - alpha) g_i)^2.
template <typename DerivedP, typename DerivedG>
typename DerivedP::Scalar mixture_loglik_curvature(typename DerivedP::Scalar alpha,
                                                   const Eigen::MatrixBase<DerivedP>& param_values,
                                                   const Eigen::MatrixBase<DerivedG>& nonparam_values) {
  const auto m = (alpha * param_values.array() + (1 - alpha) * nonparam_values.array()).eval();
  return -((param_values.array() - nonparam_values.array()) / m).square().sum();
}

enum class Boundary { interior, zero, one };

const char* to_string(Boundary b);

struct AlphaSolution {
  double alpha = 0.0;
  Boundary at_boundary = Boundary::interior;
};

/// Unique maximizer of the mixture log-likelihood over [0,1], found by
/// bisection on its strictly decreasing slope. When some p_i is 0 the
/// search never reaches alpha = 1.
AlphaSolution solve_alpha(const Eigen::Ref<const Eigen::VectorXd>& param_values,
                          const Eigen::Ref<const Eigen::VectorXd>& nonparam_values,
                          double tolerance = 1e-10);

/// Leave-and-repair coefficient, or the Olkin-Spiegelman variant that uses
/// the plain KDE at each observation.
enum class CoefficientKind { lr, os };

const char* to_string(CoefficientKind kind);

struct FitnessConfig {
  NPConfig np{};
  Family family = Family::normal_mean_var;
  CoefficientKind coefficient_kind = CoefficientKind::lr;
  double tolerance = 1e-10;
};

/// Experiment defaults: bandwidth from `rule`, delta = 1/n, q = t_3(x/100).
FitnessConfig make_fitness_config(const Eigen::Ref<const Eigen::VectorXd>& sample, Family family,
                                  CoefficientKind kind,
                                  const BandwidthRule& rule = BandwidthRule::silverman_robust());

struct FitnessResult {
  double alpha = 0.0;
  ParamVector theta;
  double h = 0.0;
  Boundary at_boundary = Boundary::interior;
  Eigen::VectorXd param_values;
  Eigen::VectorXd nonparam_values;
  double loglik_at_alpha = 0.0;
};

FitnessResult fitness_coefficient(const Eigen::Ref<const Eigen::VectorXd>& sample,
                                  const FitnessConfig& cfg);

/// alpha f_theta(x) + (1 - alpha) fhat_n(x).
struct SemiparametricDensity {
  double alpha = 1.0;
  ParamVector theta;
  Family family = Family::normal_mean_var;
  Eigen::VectorXd sample;
  NPConfig np{};

  static SemiparametricDensity from_fit(const Eigen::Ref<const Eigen::VectorXd>& sample,
                                        const FitnessConfig& cfg, const FitnessResult& fit);
};

double semiparametric_eval(const SemiparametricDensity& sp, double x);

Eigen::VectorXd semiparametric_eval(const SemiparametricDensity& sp,
                                    const Eigen::Ref<const Eigen::VectorXd>& xs);

struct SemiparametricDraws {
  Eigen::VectorXd values;
  Eigen::Index parametric_count = 0;
};

/// Draws from the mixture: the parametric family with probability alpha,
/// otherwise a smoothed bootstrap X_J + h * (kernel noise).
SemiparametricDraws sample_semiparametric(const SemiparametricDensity& sp, Eigen::Index m, Rng& rng);

}  // namespace fitcoef
