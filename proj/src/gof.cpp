#include "fitcoef/gof.hpp"

#include "fitcoef/parallel.hpp"
#include "fitcoef/random.hpp"

namespace fitcoef {

GofReport bootstrap_pvalue(const Eigen::Ref<const Eigen::VectorXd>& sample, Family family, std::size_t B,
                           std::uint64_t seed, unsigned threads) {
  if (B < 1) throw InvalidParameter("bootstrap needs B >= 1");
  GofReport report;
  report.theta = fit_mle(family, sample);
  report.bootstrap_reps = B;
  const auto cdf_of = [family](const ParamVector& theta) {
    return [family, theta](double x) { return cdf_eval(family, theta, x); };
  };
  report.statistic = cvm_statistic(sample, cdf_of(report.theta));

  std::vector<double> replicates(B);
  parallel_for(B, threads, [&](std::size_t b) {
    Rng rng = Rng::stream(seed, b);
    const Eigen::VectorXd sim = sample_from(family, report.theta, sample.size(), rng);
    replicates[b] = cvm_statistic(sim, cdf_of(fit_mle(family, sim)));
  });
  const auto exceed = std::count_if(replicates.begin(), replicates.end(),
                                    [&](double w) { return w >= report.statistic; });
  report.p_value = (1.0 + static_cast<double>(exceed)) / (static_cast<double>(B) + 1.0);
  return report;
}

}  // namespace fitcoef
