#include <doctest.h>

#include <cmath>

#include "fitcoef/copula.hpp"
#include "fitcoef/special.hpp"

using namespace fitcoef;
using doctest::Approx;

namespace {

double fd_pdf(const CopulaParam& p, double u, double v, double e = 1e-5) {
  return (copula_cdf(p, u + e, v + e) - copula_cdf(p, u + e, v - e) - copula_cdf(p, u - e, v + e) +
          copula_cdf(p, u - e, v - e)) /
         (4 * e * e);
}

Eigen::MatrixXd uniforms(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd u(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    u(i, 0) = rng.uniform();
    u(i, 1) = rng.uniform();
  }
  return u;
}

}  // namespace

TEST_CASE("copula cdf") {
  const CopulaParam ind{1.0}, g3{3.0};
  CHECK(copula_cdf(ind, 0.3, 0.7) == Approx(0.21));
  CHECK(copula_cdf(g3, 1.0, 0.37) == Approx(0.37));
  CHECK(copula_cdf(g3, 0.0, 0.37) == 0.0);
  CHECK(copula_cdf(g3, 0.5, 0.5) == Approx(0.41757).epsilon(1e-4));
  CHECK(copula_cdf(g3, 0.5, 0.5) == Approx(std::exp(-std::cbrt(2.0) * std::log(2.0))).epsilon(1e-12));
  CHECK_THROWS_AS(CopulaParam{0.5}.validate(), InvalidParameter);

  Rng rng(1);
  for (int r = 0; r < 500; ++r) {
    double a1 = rng.uniform(), b1 = rng.uniform(), a2 = rng.uniform(), b2 = rng.uniform();
    if (a1 > b1) std::swap(a1, b1);
    if (a2 > b2) std::swap(a2, b2);
    const CopulaParam p{1.0 + 10 * rng.uniform()};
    const double vol = copula_cdf(p, b1, b2) - copula_cdf(p, a1, b2) - copula_cdf(p, b1, a2) + copula_cdf(p, a1, a2);
    CHECK(vol >= -1e-12);
  }
}

TEST_CASE("copula density") {
  CHECK(copula_pdf(CopulaParam{1.0}, 0.2, 0.9) == Approx(1.0));
  CHECK(copula_pdf(CopulaParam{3.0}, 0.5, 0.5) == Approx(fd_pdf(CopulaParam{3.0}, 0.5, 0.5)).epsilon(1e-4));
  CHECK_THROWS_AS(copula_pdf(CopulaParam{3.0}, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(copula_pdf(CopulaParam{3.0}, 0.5, 0.0), DomainError);
  CHECK(copula_log_pdf(CopulaParam{2.0}, 0.3, 0.6) == Approx(std::log(copula_pdf(CopulaParam{2.0}, 0.3, 0.6))));
}

TEST_CASE("pseudo observations") {
  Eigen::MatrixXd s(3, 2);
  s << 3.0, 1.0, 1.0, 1.0, 2.0, 2.0;
  const Matrix2Col u = pseudo_observations(s, PseudoConvention::n_plus_1);
  CHECK(u(0, 0) == Approx(0.75));
  CHECK(u(1, 0) == Approx(0.25));
  CHECK(u(2, 0) == Approx(0.5));
  CHECK(u(0, 1) == Approx(1.5 / 4));
  CHECK(u(1, 1) == Approx(1.5 / 4));
  CHECK(u(2, 1) == Approx(0.75));
  const Matrix2Col un = pseudo_observations(s, PseudoConvention::n);
  CHECK(un(0, 0) == Approx(1.0));
  CHECK(un(1, 0) == Approx(1.0 / 3));
  CHECK(un(2, 0) == Approx(2.0 / 3));

  const Eigen::MatrixXd x = uniforms(50, 2);
  Eigen::MatrixXd t = x;
  t.col(0) = x.col(0).array().exp();
  t.col(1) = x.col(1).array().cube() * 7.0 - 3.0;
  CHECK(pseudo_observations(x, PseudoConvention::n_plus_1) == pseudo_observations(t, PseudoConvention::n_plus_1));
}

TEST_CASE("rank pseudo-likelihood estimator") {
  Rng rng(33);
  const Matrix2Col u = sample_copula(CopulaParam{3.0}, 2000, rng);
  const CopulaFit fit = rank_pseudo_mle(u);
  CHECK(std::abs(fit.param.xi - 3.0) <= 0.3);
  CHECK_FALSE(fit.at_upper_bound);

  Eigen::MatrixXd t = u;
  t.col(0) = -(1.0 - u.col(0).array()).log();
  CHECK(rank_pseudo_mle(t).param.xi == Approx(fit.param.xi).epsilon(1e-12));

  CHECK(rank_pseudo_mle(uniforms(2000, 8)).param.xi <= 1.1);

  Eigen::MatrixXd como(100, 2);
  como.col(0) = Eigen::VectorXd::LinSpaced(100, 0.0, 1.0);
  como.col(1) = como.col(0);
  CHECK(rank_pseudo_mle(como).at_upper_bound);

  const CopulaFit lit = rank_pseudo_mle(u, PseudoConvention::n);
  CHECK(lit.used < 2000);
  CHECK(std::abs(lit.param.xi - fit.param.xi) < 0.1);

  CHECK_THROWS_AS(rank_pseudo_mle(uniforms(9, 1)), DegenerateSample);
}

TEST_CASE("copula sampler") {
  Rng rng(44);
  const Matrix2Col ind = sample_copula(CopulaParam{1.0}, 10000, rng);
  CHECK(std::abs(kendall_tau(ind.col(0), ind.col(1))) <= 0.03);

  const Matrix2Col u = sample_copula(CopulaParam{3.0}, 10000, rng);
  CHECK(std::abs(kendall_tau(u.col(0), u.col(1)) - 2.0 / 3) <= 0.02);
  for (int c = 0; c < 2; ++c) {
    std::vector<double> v(u.col(c).begin(), u.col(c).end());
    std::sort(v.begin(), v.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      ks = std::max({ks, std::abs(v[i] - double(i) / v.size()), std::abs(v[i] - double(i + 1) / v.size())});
    }
    CHECK(ks < 1.63 / std::sqrt(10000.0));
    CHECK(v.front() > 0.0);
    CHECK(v.back() < 1.0);
  }
}

TEST_CASE("kendall tau by brute force") {
  Eigen::VectorXd x(4), y(4);
  x << 1, 2, 3, 4;
  y << 1, 3, 2, 4;
  CHECK(kendall_tau(x, y) == Approx(4.0 / 6));
  CHECK(kendall_tau(x, -x) == Approx(-1.0));
}

TEST_CASE("joint density") {
  ParamVector rate(1);
  rate << 2.0;
  ParamVector wb(2);
  wb << 2.0, 0.5;
  const auto m1 = MarginalEstimate::parametric(Family::exponential, rate);
  const auto m2 = MarginalEstimate::parametric(Family::weibull, wb);
  CHECK(m1.cdf(0.7) == Approx(cdf_eval(Family::exponential, rate, 0.7)).epsilon(1e-5));
  CHECK(m2.cdf(0.4) == Approx(cdf_eval(Family::weibull, wb, 0.4)).epsilon(1e-5));

  const JointDensityEstimate ind{CopulaParam{1.0}, m1, m2};
  CHECK(joint_density_eval(ind, 0.3, 0.2) == Approx(m1.density(0.3) * m2.density(0.2)).epsilon(1e-12));

  const JointDensityEstimate truth{CopulaParam{3.0}, m1, m2};
  const Eigen::VectorXd xs = Eigen::VectorXd::LinSpaced(601, 0.0, 3.0);
  const Eigen::MatrixXd f = joint_density_grid(truth, xs, xs);
  CHECK(f.minCoeff() >= 0.0);
  const double dx = 3.0 / 600;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(601, dx);
  w(0) = w(600) = 0.5 * dx;
  CHECK(w.dot(f * w) >= 0.99);

  Rng rng(3);
  const Eigen::VectorXd data = sample_from(Family::exponential, rate, 200, rng);
  NPConfig np = default_np_config(200, select_bandwidth(BandwidthRule::silverman_robust(), data));
  const auto kde = MarginalEstimate::nonparametric(data, np);
  const JointDensityEstimate mixed{CopulaParam{2.0}, kde, m2};
  const Eigen::VectorXd ys = Eigen::VectorXd::LinSpaced(100, -1.0, 4.0);
  CHECK(joint_density_grid(mixed, ys, ys).minCoeff() >= 0.0);
}
