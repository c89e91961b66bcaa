#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <type_traits>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "fitcoef/errors.hpp"
#include "fitcoef/models.hpp"

namespace fitcoef {

/// Uniform quadrature grid of m points on [lo, hi].
struct Grid {
  double lo = 0.0;
  double hi = 1.0;
  Eigen::Index m = 2001;

  void validate() const {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw InvalidParameter("grid needs lo < hi");
    if (m < 2) throw InvalidParameter("grid needs at least two points");
  }
  double step() const { return (hi - lo) / static_cast<double>(m - 1); }
  Eigen::VectorXd points() const {
    validate();
    return Eigen::VectorXd::LinSpaced(m, lo, hi);
  }

  /// [min - 8h, max + 8h].
  static Grid around(const Eigen::Ref<const Eigen::VectorXd>& sample, double h, Eigen::Index m = 2001) {
    return {sample.minCoeff() - 8.0 * h, sample.maxCoeff() + 8.0 * h, m};
  }
};

/// Trapezoid rule for values sampled on a uniform grid.
template <typename Derived>
typename Derived::Scalar trapezoid(const Eigen::MatrixBase<Derived>& values, typename Derived::Scalar dx) {
  const auto m = values.size();
  if (m < 2) return typename Derived::Scalar(0);
  return dx * (values.sum() - typename Derived::Scalar(0.5) * (values(0) + values(m - 1)));
}

/// Squared L2 distance between two densities sampled on the same grid.
inline double l2_distance_squared(const Eigen::Ref<const Eigen::VectorXd>& f,
                                  const Eigen::Ref<const Eigen::VectorXd>& g, const Grid& grid) {
  if (f.size() != grid.m || g.size() != grid.m) throw LengthMismatch("values do not match the grid");
  return trapezoid((f - g).array().square().matrix().eval(), grid.step());
}

inline double l2_distance(const Eigen::Ref<const Eigen::VectorXd>& f,
                          const Eigen::Ref<const Eigen::VectorXd>& g, const Grid& grid) {
  return std::sqrt(l2_distance_squared(f, g, grid));
}

/// L2 distance between two evaluable densities (callables double -> double).
namespace detail {

template <typename F>
concept ScalarFunction = std::invocable<F, double> &&
    !std::is_base_of_v<Eigen::EigenBase<std::remove_cvref_t<F>>, std::remove_cvref_t<F>>;

}  // namespace detail

template <typename F, typename G>
  requires detail::ScalarFunction<F> && detail::ScalarFunction<G>
double l2_distance(F&& f, G&& g, const Grid& grid) {
  const Eigen::VectorXd xs = grid.points();
  return l2_distance(xs.unaryExpr(f).eval(), xs.unaryExpr(g).eval(), grid);
}

template <typename F, typename G>
  requires detail::ScalarFunction<F> && detail::ScalarFunction<G>
double l2_distance_squared(F&& f, G&& g, const Grid& grid) {
  const Eigen::VectorXd xs = grid.points();
  return l2_distance_squared(xs.unaryExpr(f).eval(), xs.unaryExpr(g).eval(), grid);
}

/// Cramer-von Mises W^2 = 1/(12n) + sum_i (F(x_(i)) - (2i-1)/(2n))^2.
template <typename Cdf>
double cvm_statistic(const Eigen::Ref<const Eigen::VectorXd>& sample, Cdf&& cdf) {
  const auto n = sample.size();
  if (n < 1) throw DegenerateSample("Cramer-von Mises statistic needs at least one observation");
  std::vector<double> xs(sample.data(), sample.data() + n);
  std::sort(xs.begin(), xs.end());
  const double nd = static_cast<double>(n);
  double w2 = 1.0 / (12.0 * nd);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = cdf(xs[static_cast<std::size_t>(i)]) - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nd);
    w2 += d * d;
  }
  return w2;
}

struct GofReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t bootstrap_reps = 0;
  ParamVector theta;
};

/// Parametric-bootstrap p-value of the Cramer-von Mises test for `family`:
/// p = (1 + #{W2_b >= W2_obs}) / (B + 1). Replication b uses its own stream
/// derived from (seed, b), so the result does not depend on `threads`.
GofReport bootstrap_pvalue(const Eigen::Ref<const Eigen::VectorXd>& sample, Family family, std::size_t B,
                           std::uint64_t seed, unsigned threads = 1);

}  // namespace fitcoef
