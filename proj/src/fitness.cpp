#include "fitcoef/fitness.hpp"

#include <cmath>

namespace fitcoef {

const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::interior: return "interior";
    case Boundary::zero: return "zero";
    case Boundary::one: return "one";
  }
  return "interior";
}

const char* to_string(CoefficientKind kind) { return kind == CoefficientKind::lr ? "lr" : "os"; }

AlphaSolution solve_alpha(const Eigen::Ref<const Eigen::VectorXd>& param_values,
                          const Eigen::Ref<const Eigen::VectorXd>& nonparam_values, double tolerance) {
  const Eigen::Ref<const Eigen::VectorXd>& p = param_values;
  const Eigen::Ref<const Eigen::VectorXd>& g = nonparam_values;
  if (p.size() != g.size()) throw LengthMismatch("parametric and nonparametric value vectors differ in length");
  if (p.size() == 0) throw LengthMismatch("empty value vectors");
  if (!(tolerance > 0.0)) throw InvalidParameter("tolerance must be positive");
  if (!p.allFinite() || !g.allFinite() || (p.array() < 0.0).any() || (g.array() < 0.0).any())
    throw DomainError("density values must be finite and non-negative");
  if ((p.array() == g.array()).all())
    throw Indistinguishable("parametric and nonparametric values coincide at every observation");
  if (((p.array() == 0.0) && (g.array() == 0.0)).any())
    throw DomainError("an observation has zero parametric and nonparametric density");

  if (mixture_loglik_slope(0.0, p, g) <= 0.0) return {0.0, Boundary::zero};
  const bool param_positive = (p.array() > 0.0).all();
  if (param_positive && mixture_loglik_slope(1.0, p, g) >= 0.0) return {1.0, Boundary::one};

  // Midpoints stay strictly inside (0,1), where every mixture term is positive.
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 60 && hi - lo > tolerance; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mixture_loglik_slope(mid, p, g) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), Boundary::interior};
}

FitnessConfig make_fitness_config(const Eigen::Ref<const Eigen::VectorXd>& sample, Family family,
                                  CoefficientKind kind, const BandwidthRule& rule) {
  FitnessConfig cfg;
  cfg.np = default_np_config(sample.size(), select_bandwidth(rule, sample));
  cfg.family = family;
  cfg.coefficient_kind = kind;
  return cfg;
}

FitnessResult fitness_coefficient(const Eigen::Ref<const Eigen::VectorXd>& sample,
                                  const FitnessConfig& cfg) {
  cfg.np.validate();
  FitnessResult r;
  r.theta = fit_mle(cfg.family, sample);
  r.h = cfg.np.h;
  r.param_values = density_eval(cfg.family, r.theta, sample);
  r.nonparam_values = cfg.coefficient_kind == CoefficientKind::lr ? lr_values(sample, cfg.np)
                                                                  : kde_at_sample(sample, cfg.np);
  const AlphaSolution sol = solve_alpha(r.param_values, r.nonparam_values, cfg.tolerance);
  r.alpha = sol.alpha;
  r.at_boundary = sol.at_boundary;
  r.loglik_at_alpha = mixture_loglik(r.alpha, r.param_values, r.nonparam_values);
  return r;
}

SemiparametricDensity SemiparametricDensity::from_fit(const Eigen::Ref<const Eigen::VectorXd>& sample,
                                                      const FitnessConfig& cfg, const FitnessResult& fit) {
  return {fit.alpha, fit.theta, cfg.family, sample, cfg.np};
}

double semiparametric_eval(const SemiparametricDensity& sp, double x) {
  double v = 0.0;
  if (sp.alpha > 0.0) v += sp.alpha * density_eval(sp.family, sp.theta, x);
  if (sp.alpha < 1.0) v += (1.0 - sp.alpha) * kde_eval(sp.sample, sp.np, x);
  return v;
}

Eigen::VectorXd semiparametric_eval(const SemiparametricDensity& sp,
                                    const Eigen::Ref<const Eigen::VectorXd>& xs) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(xs.size());
  if (sp.alpha > 0.0) v += sp.alpha * density_eval(sp.family, sp.theta, xs);
  if (sp.alpha < 1.0) v += (1.0 - sp.alpha) * kde_eval_many(sp.sample, sp.np, xs);
  return v;
}

namespace {

double kernel_noise(KernelKind kind, Rng& rng) {
  if (kind == KernelKind::gaussian) return rng.normal();
  // Devroye's construction for the Epanechnikov kernel.
  const double u1 = 2.0 * rng.uniform() - 1.0;
  const double u2 = 2.0 * rng.uniform() - 1.0;
  const double u3 = 2.0 * rng.uniform() - 1.0;
  return (std::abs(u3) >= std::abs(u2) && std::abs(u3) >= std::abs(u1)) ? u2 : u3;
}

}  // namespace

SemiparametricDraws sample_semiparametric(const SemiparametricDensity& sp, Eigen::Index m, Rng& rng) {
  validate_params(sp.family, sp.theta);
  sp.np.validate();
  if (sp.sample.size() < 1) throw DegenerateSample("semiparametric sampling needs data");
  SemiparametricDraws out;
  out.values.resize(m);
  const auto n = static_cast<std::uint64_t>(sp.sample.size());
  for (Eigen::Index k = 0; k < m; ++k) {
    if (rng.uniform() < sp.alpha) {
      out.values(k) = quantile_eval(sp.family, sp.theta, rng.uniform());
      ++out.parametric_count;
    } else {
      const auto j = static_cast<Eigen::Index>(rng.below(n));
      out.values(k) = sp.sample(j) + sp.np.h * kernel_noise(sp.np.kernel.kind, rng);
    }
  }
  return out;
}

}  // namespace fitcoef
