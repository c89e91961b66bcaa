#include "fitcoef/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "fitcoef/kernel.hpp"
#include "fitcoef/special.hpp"

namespace fitcoef {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool all_positive(const Eigen::Ref<const Eigen::VectorXd>& xs) { return (xs.array() > 0.0).all(); }

/// Root of a strictly monotone function on a bracket [lo, hi] with
/// f(lo) and f(hi) of opposite signs. Newton steps that leave the bracket
/// are replaced by bisection.
double safeguarded_newton(const std::function<std::pair<double, double>(double)>& f_and_df,
                          double lo, double hi, double x0, double f_tol, const char* what) {
  const double f_lo = f_and_df(lo).first;
  const bool increasing = f_lo < 0.0;
  double x = std::clamp(x0, lo, hi);
  for (int iter = 0; iter < 100; ++iter) {
    const auto [fx, dfx] = f_and_df(x);
    if (!std::isfinite(fx)) throw NonConvergence(std::string(what) + ": objective is not finite");
    if (std::abs(fx) < f_tol) return x;
    if ((fx < 0.0) == increasing) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) return x;
    double next = x - fx / dfx;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    x = next;
  }
  throw NonConvergence(std::string(what) + ": no convergence after 100 iterations");
}

// Profile score for the Gumbel scale: sigma + mean(x) - sum(w x), with
// w proportional to exp(x / sigma). Returns (value, derivative).
std::pair<double, double> gumbel_scale_score(const Eigen::VectorXd& xs, double xbar, double xmax,
                                             double sigma) {
  const Eigen::ArrayXd w0 = ((xs.array() - xmax) / sigma).exp();
  const Eigen::ArrayXd w = w0 / w0.sum();
  const double m1 = (w * xs.array()).sum();
  const double m2 = (w * (xs.array() - m1).square()).sum();
  return {sigma + xbar - m1, 1.0 + m2 / (sigma * sigma)};
}

ParamVector fit_gumbel(const Eigen::Ref<const Eigen::VectorXd>& sample) {
  const Eigen::VectorXd xs = sample;
  const double xbar = stats::mean(xs);
  const double s = stats::sd(xs);
  if (!(s > 0.0)) throw DegenerateSample("Gumbel fit needs a non-constant sample");
  const double xmax = xs.maxCoeff();
  auto score = [&](double sigma) { return gumbel_scale_score(xs, xbar, xmax, sigma); };

  double lo = s * 1e-3;
  while (score(lo).first >= 0.0) {
    lo *= 0.5;
    if (lo < s * 1e-12) throw NonConvergence("Gumbel fit: cannot bracket scale from below");
  }
  double hi = s;
  while (score(hi).first <= 0.0) {
    hi *= 2.0;
    if (hi > s * 1e12) throw NonConvergence("Gumbel fit: cannot bracket scale from above");
  }
  const double sigma0 = s * std::sqrt(6.0) / std::numbers::pi;
  const double sigma = safeguarded_newton(score, lo, hi, sigma0, 1e-10 * (1.0 + s), "Gumbel fit");
  const double mu = xmax + sigma * std::log(((xs.array() - xmax) / sigma).exp().mean());
  ParamVector theta(2);
  theta << mu, sigma;
  return theta;
}

// Profile score for the Weibull shape: 1/a + mean(log x) - sum(w log x),
// with w proportional to x^a.
std::pair<double, double> weibull_shape_score(const Eigen::ArrayXd& ys, double ybar, double ymax,
                                              double a) {
  const Eigen::ArrayXd w0 = (a * (ys - ymax)).exp();
  const Eigen::ArrayXd w = w0 / w0.sum();
  const double m1 = (w * ys).sum();
  const double m2 = (w * (ys - m1).square()).sum();
  return {1.0 / a + ybar - m1, -1.0 / (a * a) - m2};
}

ParamVector fit_weibull(const Eigen::Ref<const Eigen::VectorXd>& sample) {
  const Eigen::ArrayXd ys = sample.array().log();
  const double ybar = ys.mean();
  const double ymax = ys.maxCoeff();
  const double sy = std::sqrt((ys - ybar).square().sum() / static_cast<double>(ys.size() - 1));
  if (!(sy > 0.0)) throw DegenerateSample("Weibull fit needs a non-constant sample");
  auto score = [&](double a) { return weibull_shape_score(ys, ybar, ymax, a); };

  const double a0 = 1.2825 / sy;  // moment estimator via the log-Gumbel variance
  double lo = a0, hi = a0;
  while (score(lo).first <= 0.0) {
    lo *= 0.5;
    if (lo < 1e-12) throw NonConvergence("Weibull fit: cannot bracket shape from below");
  }
  while (score(hi).first >= 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw NonConvergence("Weibull fit: cannot bracket shape from above");
  }
  const double a = safeguarded_newton(score, lo, hi, a0, 1e-10, "Weibull fit");
  const double b = std::exp(ymax + std::log((a * (ys - ymax)).exp().mean()) / a);
  ParamVector theta(2);
  theta << a, b;
  return theta;
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::normal_mean_var: return "normal";
    case Family::normal_mean_only: return "normal-mean";
    case Family::normal_var_only: return "normal-scale";
    case Family::gumbel_paper: return "gumbel";
    case Family::exponential: return "exponential";
    case Family::weibull: return "weibull";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::normal_mean_var, Family::normal_mean_only, Family::normal_var_only,
                   Family::gumbel_paper, Family::exponential, Family::weibull}) {
    if (name == to_string(f)) return f;
  }
  throw InvalidParameter("unknown model family '" + std::string(name) + "'");
}

Eigen::Index param_count(Family family) {
  switch (family) {
    case Family::normal_mean_var:
    case Family::gumbel_paper:
    case Family::weibull: return 2;
    default: return 1;
  }
}

bool positive_support(Family family) {
  return family == Family::exponential || family == Family::weibull;
}

void validate_params(Family family, const ParamVector& theta) {
  if (theta.size() != param_count(family))
    throw InvalidParameter(std::string(to_string(family)) + " expects " +
                           std::to_string(param_count(family)) + " parameters");
  if (!theta.allFinite()) throw InvalidParameter("parameters must be finite");
  switch (family) {
    case Family::normal_mean_var:
    case Family::gumbel_paper:
      if (!(theta(1) > 0.0)) throw InvalidParameter("scale must be positive");
      break;
    case Family::normal_var_only:
    case Family::exponential:
      if (!(theta(0) > 0.0)) throw InvalidParameter("scale/rate must be positive");
      break;
    case Family::weibull:
      if (!(theta(0) > 0.0 && theta(1) > 0.0)) throw InvalidParameter("shape and scale must be positive");
      break;
    case Family::normal_mean_only: break;
  }
}

double log_density(Family family, const ParamVector& theta, double x) {
  validate_params(family, theta);
  constexpr double log_sqrt_2pi = 0.91893853320467274178;
  switch (family) {
    case Family::normal_mean_var: {
      const double z = (x - theta(0)) / theta(1);
      return -0.5 * z * z - log_sqrt_2pi - std::log(theta(1));
    }
    case Family::normal_mean_only: {
      const double z = x - theta(0);
      return -0.5 * z * z - log_sqrt_2pi;
    }
    case Family::normal_var_only: {
      const double z = x / theta(0);
      return -0.5 * z * z - log_sqrt_2pi - std::log(theta(0));
    }
    case Family::gumbel_paper: {
      const double z = (x - theta(0)) / theta(1);
      return z - std::exp(z) - std::log(theta(1));
    }
    case Family::exponential:
      return x > 0.0 ? std::log(theta(0)) - theta(0) * x : kNegInf;
    case Family::weibull: {
      if (!(x > 0.0)) return kNegInf;
      const double a = theta(0), b = theta(1);
      const double lz = std::log(x / b);
      return std::log(a / b) + (a - 1.0) * lz - std::exp(a * lz);
    }
  }
  return kNegInf;
}

double density_eval(Family family, const ParamVector& theta, double x) {
  return std::exp(log_density(family, theta, x));
}

Eigen::VectorXd density_eval(Family family, const ParamVector& theta,
                             const Eigen::Ref<const Eigen::VectorXd>& xs) {
  return xs.unaryExpr([&](double x) { return density_eval(family, theta, x); });
}

double cdf_eval(Family family, const ParamVector& theta, double x) {
  validate_params(family, theta);
  switch (family) {
    case Family::normal_mean_var: return special::normal_cdf((x - theta(0)) / theta(1));
    case Family::normal_mean_only: return special::normal_cdf(x - theta(0));
    case Family::normal_var_only: return special::normal_cdf(x / theta(0));
    case Family::gumbel_paper: return -std::expm1(-std::exp((x - theta(0)) / theta(1)));
    case Family::exponential: return x > 0.0 ? -std::expm1(-theta(0) * x) : 0.0;
    case Family::weibull: return x > 0.0 ? -std::expm1(-std::pow(x / theta(1), theta(0))) : 0.0;
  }
  return 0.0;
}

double quantile_eval(Family family, const ParamVector& theta, double p) {
  validate_params(family, theta);
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0,1)");
  switch (family) {
    case Family::normal_mean_var: return theta(0) + theta(1) * special::normal_quantile(p);
    case Family::normal_mean_only: return theta(0) + special::normal_quantile(p);
    case Family::normal_var_only: return theta(0) * special::normal_quantile(p);
    case Family::gumbel_paper: return theta(0) + theta(1) * std::log(-std::log1p(-p));
    case Family::exponential: return -std::log1p(-p) / theta(0);
    case Family::weibull: return theta(1) * std::pow(-std::log1p(-p), 1.0 / theta(0));
  }
  return 0.0;
}

double log_likelihood(Family family, const ParamVector& theta,
                      const Eigen::Ref<const Eigen::VectorXd>& sample) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < sample.size(); ++i) total += log_density(family, theta, sample(i));
  return total;
}

ParamVector fit_mle(Family family, const Eigen::Ref<const Eigen::VectorXd>& sample) {
  const auto n = sample.size();
  if (n < 2) throw DegenerateSample("MLE needs at least two observations");
  if (!sample.allFinite()) throw InvalidParameter("sample contains non-finite values");
  if (positive_support(family) && !all_positive(sample))
    throw SupportViolation(std::string(to_string(family)) + " model requires strictly positive data");

  ParamVector theta(param_count(family));
  const double xbar = sample.mean();
  switch (family) {
    case Family::normal_mean_var: {
      const double var = (sample.array() - xbar).square().mean();
      if (!(var > 0.0)) throw DegenerateSample("normal fit needs a non-constant sample");
      theta << xbar, std::sqrt(var);
      return theta;
    }
    case Family::normal_mean_only: theta << xbar; return theta;
    case Family::normal_var_only: {
      const double m2 = sample.array().square().mean();
      if (!(m2 > 0.0)) throw DegenerateSample("normal scale fit needs a non-zero sample");
      theta << std::sqrt(m2);
      return theta;
    }
    case Family::gumbel_paper: return fit_gumbel(sample);
    case Family::exponential: theta << 1.0 / xbar; return theta;
    case Family::weibull: return fit_weibull(sample);
  }
  return theta;
}

Eigen::VectorXd sample_from(Family family, const ParamVector& theta, Eigen::Index n, Rng& rng) {
  validate_params(family, theta);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = quantile_eval(family, theta, rng.uniform());
  return out;
}

double family_mean(Family family, const ParamVector& theta) {
  validate_params(family, theta);
  switch (family) {
    case Family::normal_mean_var:
    case Family::normal_mean_only: return theta(0);
    case Family::normal_var_only: return 0.0;
    case Family::gumbel_paper: return theta(0) - theta(1) * special::euler_gamma;
    case Family::exponential: return 1.0 / theta(0);
    case Family::weibull: return theta(1) * std::tgamma(1.0 + 1.0 / theta(0));
  }
  return 0.0;
}

ParamVector gumbel_from_moments(double mean, double sd) {
  if (!(sd > 0.0)) throw InvalidParameter("sd must be positive");
  const double sigma = sd * std::sqrt(6.0) / std::numbers::pi;
  ParamVector theta(2);
  theta << mean + sigma * special::euler_gamma, sigma;
  return theta;
}

}  // namespace fitcoef
