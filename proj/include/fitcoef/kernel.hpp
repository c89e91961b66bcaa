#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "fitcoef/errors.hpp"

namespace fitcoef {

enum class KernelKind { gaussian, epanechnikov };

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
};

/// K(u). Both kernels are symmetric, non-negative and integrate to one.
template <typename Scalar>
  requires(!std::is_base_of_v<Eigen::EigenBase<Scalar>, Scalar>)
Scalar kernel_eval(const KernelSpec& spec, Scalar u) {
  using std::exp;
  switch (spec.kind) {
    case KernelKind::gaussian:
      return exp(Scalar(-0.5) * u * u) *
             Scalar(std::numbers::inv_sqrtpi / std::numbers::sqrt2);
    case KernelKind::epanechnikov: {
      const Scalar v = Scalar(1) - u * u;
      return v > Scalar(0) ? Scalar(0.75) * v : Scalar(0);
    }
  }
  return Scalar(0);
}

/// Coefficient-wise kernel over an Eigen array expression.
template <typename Derived>
auto kernel_eval(const KernelSpec& spec, const Eigen::ArrayBase<Derived>& u)
    -> Eigen::Array<typename Derived::Scalar, Derived::RowsAtCompileTime,
                    Derived::ColsAtCompileTime> {
  using Scalar = typename Derived::Scalar;
  switch (spec.kind) {
    case KernelKind::gaussian:
      return (Scalar(-0.5) * u.square()).exp() *
             Scalar(std::numbers::inv_sqrtpi / std::numbers::sqrt2);
    case KernelKind::epanechnikov:
      return (Scalar(0.75) * (Scalar(1) - u.square())).max(Scalar(0));
  }
  return u * Scalar(0);
}

inline const char* to_string(KernelKind kind) {
  return kind == KernelKind::gaussian ? "gaussian" : "epanechnikov";
}

struct BandwidthRule {
  enum class Kind { silverman_robust, silverman_normal, fixed };

  Kind kind = Kind::silverman_robust;
  double h = 0.0;  // only for Kind::fixed, in data units

  static BandwidthRule silverman_robust() { return {Kind::silverman_robust, 0.0}; }
  static BandwidthRule silverman_normal() { return {Kind::silverman_normal, 0.0}; }
  static BandwidthRule fixed(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidParameter("fixed bandwidth must be positive");
    return {Kind::fixed, h};
  }
};

namespace stats {

template <typename Derived>
typename Derived::Scalar mean(const Eigen::DenseBase<Derived>& x) {
  return x.sum() / typename Derived::Scalar(x.size());
}

/// Sample standard deviation with the n-1 denominator.
template <typename Derived>
typename Derived::Scalar sd(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  using std::sqrt;
  const Scalar m = mean(x);
  return sqrt((x.derived().array() - m).square().sum() / Scalar(x.size() - 1));
}

/// Type-7 (linear interpolation) quantile.
inline double quantile(std::vector<double> sorted, double p, bool already_sorted = false) {
  if (!already_sorted) std::sort(sorted.begin(), sorted.end());
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double iqr(const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  return quantile(v, 0.75, true) - quantile(v, 0.25, true);
}

}  // namespace stats

/// Bandwidth for a univariate sample. The robust rule is
/// 0.9 min(s, IQR/1.34) n^(-1/5); the normal-reference rule is 1.06 s n^(-1/5).
inline double select_bandwidth(const BandwidthRule& rule,
                               const Eigen::Ref<const Eigen::VectorXd>& sample) {
  if (rule.kind == BandwidthRule::Kind::fixed) return rule.h;
  const auto n = sample.size();
  if (n < 2) throw DegenerateSample("bandwidth selection needs at least two observations");
  const double s = stats::sd(sample);
  if (!(s > 0.0)) throw DegenerateSample("sample has zero dispersion");
  const double rate = std::pow(static_cast<double>(n), -0.2);
  if (rule.kind == BandwidthRule::Kind::silverman_normal) return 1.06 * s * rate;
  const double spread = stats::iqr(sample) / 1.34;
  // A sample with most mass tied has IQR 0; fall back to s.
  const double a = spread > 0.0 ? std::min(s, spread) : s;
  return 0.9 * a * rate;
}

}  // namespace fitcoef
