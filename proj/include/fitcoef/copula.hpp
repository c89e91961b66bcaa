#pragma once

#include <Eigen/Core>

#include "fitcoef/errors.hpp"
#include "fitcoef/fitness.hpp"
#include "fitcoef/gof.hpp"
#include "fitcoef/random.hpp"

namespace fitcoef {

/// Gumbel copula C(u1,u2) = exp(-[(-log u1)^xi + (-log u2)^xi]^(1/xi)), xi >= 1.
struct CopulaParam {
  double xi = 1.0;

  void validate() const {
    if (!(xi >= 1.0) || !std::isfinite(xi)) throw InvalidParameter("Gumbel copula needs xi >= 1");
  }
};

using Matrix2Col = Eigen::Matrix<double, Eigen::Dynamic, 2>;

double copula_cdf(const CopulaParam& p, double u1, double u2);

double copula_log_pdf(const CopulaParam& p, double u1, double u2);

/// Mixed partial d^2 C / du1 du2 on the open unit square.
double copula_pdf(const CopulaParam& p, double u1, double u2);

/// Scaling of ranks into (0,1]: R/(n+1) or the literal R/n.
enum class PseudoConvention { n_plus_1, n };

/// Per-column average ranks scaled by the convention.
Matrix2Col pseudo_observations(const Eigen::Ref<const Eigen::MatrixXd>& sample,
                               PseudoConvention convention = PseudoConvention::n_plus_1);

/// Average ranks (1-based) of a vector, ties sharing their mean rank.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& x);

double copula_pseudo_loglik(const CopulaParam& p, const Eigen::Ref<const Matrix2Col>& u);

struct CopulaFit {
  CopulaParam param;
  bool at_upper_bound = false;
  double loglik = 0.0;
  Eigen::Index used = 0;  // rows that entered the pseudo-likelihood
};

/// Rank-based pseudo-maximum likelihood for xi over [1, xi_max] by
/// golden-section search to 1e-6. Under the R/n convention, rows with a
/// pseudo-observation equal to 1 are dropped.
CopulaFit rank_pseudo_mle(const Eigen::Ref<const Eigen::MatrixXd>& sample,
                          PseudoConvention convention = PseudoConvention::n_plus_1, double xi_max = 50.0);

/// Marshall-Olkin draws: S positive-stable with index 1/xi (Chambers-Mallows-Stuck),
/// E_k standard exponential, u_k = exp(-(E_k / S)^(1/xi)).
Matrix2Col sample_copula(const CopulaParam& p, Eigen::Index n, Rng& rng);

/// Kendall's tau by direct concordance count (O(n^2)).
double kendall_tau(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// A univariate density estimate together with a cached cdf. Parametric
/// (alpha = 1), kernel (alpha = 0) and semiparametric margins all share the
/// mixture representation. The cdf is the cumulative midpoint-rule integral
/// of the density on a fine grid.
class MarginalEstimate {
 public:
  explicit MarginalEstimate(SemiparametricDensity density, Eigen::Index cdf_points = 20001);

  static MarginalEstimate parametric(Family family, const ParamVector& theta);
  static MarginalEstimate nonparametric(const Eigen::Ref<const Eigen::VectorXd>& sample, const NPConfig& np);

  double density(double x) const { return semiparametric_eval(density_, x); }
  Eigen::VectorXd density(const Eigen::Ref<const Eigen::VectorXd>& xs) const {
    return semiparametric_eval(density_, xs);
  }
  double cdf(double x) const;

  const SemiparametricDensity& mixture() const { return density_; }

 private:
  SemiparametricDensity density_;
  double lo_ = 0.0;
  double step_ = 0.0;
  Eigen::VectorXd cumulative_;
};

struct JointDensityEstimate {
  CopulaParam copula;
  MarginalEstimate margin1;
  MarginalEstimate margin2;
};

/// c(F1(x1), F2(x2)) f1(x1) f2(x2), with cdf values clamped to (1e-10, 1 - 1e-10).
double joint_density_eval(const JointDensityEstimate& est, double x1, double x2);

/// Joint density on the tensor grid xs1 x xs2 (rows follow xs1).
Eigen::MatrixXd joint_density_grid(const JointDensityEstimate& est, const Eigen::Ref<const Eigen::VectorXd>& xs1,
                                   const Eigen::Ref<const Eigen::VectorXd>& xs2);

}  // namespace fitcoef
