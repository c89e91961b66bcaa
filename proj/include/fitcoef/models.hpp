#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

#include "fitcoef/errors.hpp"
#include "fitcoef/random.hpp"

namespace fitcoef {

/// Parametric families and the layout of their parameter vectors:
///   normal_mean_var   (mu, sigma)
///   normal_mean_only  (mu), sigma fixed at 1
///   normal_var_only   (sigma), mu fixed at 0
///   gumbel_paper      (mu, sigma), density (1/sigma) exp(z - e^z), z = (x - mu)/sigma
///   exponential       (rate)
///   weibull           (shape a, scale b)
enum class Family { normal_mean_var, normal_mean_only, normal_var_only, gumbel_paper, exponential, weibull };

using ParamVector = Eigen::VectorXd;

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

Eigen::Index param_count(Family family);
void validate_params(Family family, const ParamVector& theta);

/// True when the family's support is (0, inf).
bool positive_support(Family family);

double density_eval(Family family, const ParamVector& theta, double x);
double log_density(Family family, const ParamVector& theta, double x);
double cdf_eval(Family family, const ParamVector& theta, double x);
double quantile_eval(Family family, const ParamVector& theta, double p);

Eigen::VectorXd density_eval(Family family, const ParamVector& theta,
                             const Eigen::Ref<const Eigen::VectorXd>& xs);

double log_likelihood(Family family, const ParamVector& theta,
                      const Eigen::Ref<const Eigen::VectorXd>& sample);

/// Maximum likelihood estimate. Closed form for the normal families and the
/// exponential; safeguarded Newton on the profile likelihood for Gumbel and
/// Weibull.
ParamVector fit_mle(Family family, const Eigen::Ref<const Eigen::VectorXd>& sample);

/// n i.i.d. draws by inverse cdf.
Eigen::VectorXd sample_from(Family family, const ParamVector& theta, Eigen::Index n, Rng& rng);

double family_mean(Family family, const ParamVector& theta);

/// Gumbel parameters with the given mean and standard deviation
/// (mean = mu - sigma * gamma, var = pi^2 sigma^2 / 6).
ParamVector gumbel_from_moments(double mean, double sd);

}  // namespace fitcoef
