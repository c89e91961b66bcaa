#include "fitcoef/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace fitcoef {

double copula_cdf(const CopulaParam& p, double u1, double u2) {
  p.validate();
  if (!(u1 >= 0.0 && u1 <= 1.0 && u2 >= 0.0 && u2 <= 1.0)) throw DomainError("copula arguments must lie in [0,1]");
  if (u1 == 0.0 || u2 == 0.0) return 0.0;
  if (u1 == 1.0) return u2;
  if (u2 == 1.0) return u1;
  const double t = std::pow(-std::log(u1), p.xi) + std::pow(-std::log(u2), p.xi);
  return std::exp(-std::pow(t, 1.0 / p.xi));
}

double copula_log_pdf(const CopulaParam& p, double u1, double u2) {
  p.validate();
  if (!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0))
    throw DomainError("copula density is defined on the open unit square");
  const double xi = p.xi;
  const double l1 = std::log(-std::log(u1));
  const double l2 = std::log(-std::log(u2));
  // log t with t = s1 + s2, s_k = (-log u_k)^xi, computed without overflow.
  const double a = xi * l1, b = xi * l2;
  const double log_t = std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
  const double t_inv_xi = std::exp(log_t / xi);
  return -t_inv_xi + (-2.0 + 2.0 / xi) * log_t + (xi - 1.0) * (l1 + l2) - std::log(u1) - std::log(u2) +
         std::log1p((xi - 1.0) / t_inv_xi);
}

double copula_pdf(const CopulaParam& p, double u1, double u2) { return std::exp(copula_log_pdf(p, u1, u2)); }

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const auto n = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
  Eigen::VectorXd ranks(n);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && x(order[j]) == x(order[i])) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) ranks(order[k]) = avg;
    i = j;
  }
  return ranks;
}

Matrix2Col pseudo_observations(const Eigen::Ref<const Eigen::MatrixXd>& sample, PseudoConvention convention) {
  if (sample.cols() != 2) throw DimensionMismatch("pseudo-observations need a bivariate sample");
  if (sample.rows() < 2) throw DegenerateSample("pseudo-observations need at least two rows");
  const double denom = static_cast<double>(sample.rows()) + (convention == PseudoConvention::n_plus_1 ? 1.0 : 0.0);
  Matrix2Col u(sample.rows(), 2);
  for (Eigen::Index c = 0; c < 2; ++c) u.col(c) = average_ranks(sample.col(c)) / denom;
  return u;
}

double copula_pseudo_loglik(const CopulaParam& p, const Eigen::Ref<const Matrix2Col>& u) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) total += copula_log_pdf(p, u(i, 0), u(i, 1));
  return total;
}

CopulaFit rank_pseudo_mle(const Eigen::Ref<const Eigen::MatrixXd>& sample, PseudoConvention convention,
                          double xi_max) {
  if (sample.rows() < 10) throw DegenerateSample("copula estimation needs at least 10 observations");
  if (!(xi_max > 1.0)) throw InvalidParameter("xi_max must exceed 1");
  const Matrix2Col all = pseudo_observations(sample, convention);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < all.rows(); ++i) {
    if (all(i, 0) < 1.0 && all(i, 1) < 1.0) keep.push_back(i);
  }
  Matrix2Col u(static_cast<Eigen::Index>(keep.size()), 2);
  for (std::size_t k = 0; k < keep.size(); ++k) u.row(static_cast<Eigen::Index>(k)) = all.row(keep[k]);

  const auto objective = [&](double xi) { return copula_pseudo_loglik(CopulaParam{xi}, u); };

  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 1.0, b = xi_max;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  int iter = 0;
  while (b - a > 1e-6) {
    if (++iter > 200) throw NonConvergence("golden-section search for xi did not converge");
    if (!std::isfinite(fc) || !std::isfinite(fd)) throw NonConvergence("copula pseudo-likelihood is not finite");
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  CopulaFit fit;
  double xi = 0.5 * (a + b);
  double best = objective(xi);
  // Golden section never evaluates the endpoints; compare against them.
  for (double edge : {1.0, xi_max}) {
    const double v = objective(edge);
    if (v > best) {
      best = v;
      xi = edge;
    }
  }
  fit.param = CopulaParam{xi};
  fit.loglik = best;
  fit.used = u.rows();
  fit.at_upper_bound = xi >= xi_max - 1e-3;
  return fit;
}

Matrix2Col sample_copula(const CopulaParam& p, Eigen::Index n, Rng& rng) {
  p.validate();
  Matrix2Col u(n, 2);
  if (p.xi == 1.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      u(i, 0) = rng.uniform();
      u(i, 1) = rng.uniform();
    }
    return u;
  }
  const double alpha = 1.0 / p.xi;
  for (Eigen::Index i = 0; i < n; ++i) {
    // Positive stable S with Laplace transform exp(-t^alpha).
    const double v = std::numbers::pi * rng.uniform();
    const double w = rng.exponential();
    const double s = std::sin(alpha * v) / std::pow(std::sin(v), 1.0 / alpha) *
                     std::pow(std::sin((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
    for (Eigen::Index k = 0; k < 2; ++k) u(i, k) = std::exp(-std::pow(rng.exponential() / s, alpha));
  }
  return u;
}

double kendall_tau(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw LengthMismatch("Kendall's tau needs equal-length vectors");
  const auto n = x.size();
  if (n < 2) throw DegenerateSample("Kendall's tau needs two observations");
  long long score = 0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double s = (x(i) - x(j)) * (y(i) - y(j));
      score += (s > 0.0) - (s < 0.0);
    }
  }
  return 2.0 * static_cast<double>(score) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

MarginalEstimate::MarginalEstimate(SemiparametricDensity density, Eigen::Index cdf_points)
    : density_(std::move(density)) {
  if (cdf_points < 2) throw InvalidParameter("cdf grid needs at least two points");
  double lo = INFINITY, hi = -INFINITY;
  if (density_.alpha > 0.0) {
    lo = positive_support(density_.family) ? 0.0 : quantile_eval(density_.family, density_.theta, 1e-12);
    hi = quantile_eval(density_.family, density_.theta, 1.0 - 1e-12);
  }
  if (density_.alpha < 1.0) {
    const double reach = 8.0 * density_.np.h;
    lo = std::min(lo, density_.sample.minCoeff() - reach);
    hi = std::max(hi, density_.sample.maxCoeff() + reach);
  }
  lo_ = lo;
  step_ = (hi - lo) / static_cast<double>(cdf_points - 1);
  const Eigen::VectorXd mids =
      Eigen::VectorXd::LinSpaced(cdf_points - 1, lo + 0.5 * step_, hi - 0.5 * step_);
  const Eigen::VectorXd f = semiparametric_eval(density_, mids);
  cumulative_.resize(cdf_points);
  cumulative_(0) = 0.0;
  for (Eigen::Index k = 0; k + 1 < cdf_points; ++k) cumulative_(k + 1) = cumulative_(k) + f(k) * step_;
}

MarginalEstimate MarginalEstimate::parametric(Family family, const ParamVector& theta) {
  SemiparametricDensity sp;
  sp.alpha = 1.0;
  sp.family = family;
  sp.theta = theta;
  return MarginalEstimate(std::move(sp));
}

MarginalEstimate MarginalEstimate::nonparametric(const Eigen::Ref<const Eigen::VectorXd>& sample,
                                                 const NPConfig& np) {
  SemiparametricDensity sp;
  sp.alpha = 0.0;
  sp.family = Family::normal_mean_var;
  sp.theta = ParamVector::Constant(2, 1.0);
  sp.sample = sample;
  sp.np = np;
  return MarginalEstimate(std::move(sp));
}

double MarginalEstimate::cdf(double x) const {
  const auto last = cumulative_.size() - 1;
  const double pos = (x - lo_) / step_;
  if (!(pos > 0.0)) return 0.0;
  if (pos >= static_cast<double>(last)) return cumulative_(last);
  const auto k = static_cast<Eigen::Index>(pos);
  const double frac = pos - static_cast<double>(k);
  return cumulative_(k) + frac * (cumulative_(k + 1) - cumulative_(k));
}

namespace {

constexpr double kCdfClamp = 1e-10;

double clamp_unit(double u) { return std::clamp(u, kCdfClamp, 1.0 - kCdfClamp); }

}  // namespace

double joint_density_eval(const JointDensityEstimate& est, double x1, double x2) {
  const double f1 = est.margin1.density(x1);
  const double f2 = est.margin2.density(x2);
  if (f1 == 0.0 || f2 == 0.0) return 0.0;
  return copula_pdf(est.copula, clamp_unit(est.margin1.cdf(x1)), clamp_unit(est.margin2.cdf(x2))) * f1 * f2;
}

Eigen::MatrixXd joint_density_grid(const JointDensityEstimate& est, const Eigen::Ref<const Eigen::VectorXd>& xs1,
                                   const Eigen::Ref<const Eigen::VectorXd>& xs2) {
  const Eigen::VectorXd f1 = est.margin1.density(xs1);
  const Eigen::VectorXd f2 = est.margin2.density(xs2);
  const Eigen::VectorXd u1 = xs1.unaryExpr([&](double x) { return clamp_unit(est.margin1.cdf(x)); });
  const Eigen::VectorXd u2 = xs2.unaryExpr([&](double x) { return clamp_unit(est.margin2.cdf(x)); });
  Eigen::MatrixXd out(xs1.size(), xs2.size());
  for (Eigen::Index i = 0; i < xs1.size(); ++i) {
    for (Eigen::Index j = 0; j < xs2.size(); ++j) {
      const double ff = f1(i) * f2(j);
      out(i, j) = ff == 0.0 ? 0.0 : copula_pdf(est.copula, u1(i), u2(j)) * ff;
    }
  }
  return out;
}

}  // namespace fitcoef
