#pragma once

#include <cmath>

#include <Eigen/Core>

#include "fitcoef/errors.hpp"
#include "fitcoef/kernel.hpp"
#include "fitcoef/special.hpp"

namespace fitcoef {

/// Rows are observations, columns are coordinates (d = 1 or 2).
using Sample = Eigen::MatrixXd;
using Sample1D = Eigen::VectorXd;
using Sample2D = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// The repair density q in f_LOO(X_i) + delta * q(X_i).
///
/// The scaled Student-t variant evaluates t_nu((x - mu) / sigma), by default
/// without the 1/sigma Jacobian, so it is not normalized. `normalized` adds the
/// Jacobian. Any constant factor in q is equivalent to rescaling delta. In
/// d = 2 the value is the product over coordinates.
struct RepairDensity {
  enum class Kind { scaled_student_t, kernel_at_zero };

  Kind kind = Kind::scaled_student_t;
  int nu = 3;
  double mu = 0.0;
  double sigma = 100.0;
  KernelSpec kernel{};  // used by kernel_at_zero
  bool normalized = true;

  static RepairDensity student_t(int nu, double mu, double sigma, bool normalized = false) {
    if (nu <= 0 || !(sigma > 0.0)) throw InvalidParameter("student-t repair needs nu > 0, sigma > 0");
    return {Kind::scaled_student_t, nu, mu, sigma, {}, normalized};
  }
  static RepairDensity student_t_density(int nu, double mu, double sigma) {
    return student_t(nu, mu, sigma, true);
  }
  static RepairDensity kernel_at_zero(KernelSpec k) { return {Kind::kernel_at_zero, 0, 0.0, 1.0, k, false}; }
};

template <typename Scalar>
  requires(!std::is_base_of_v<Eigen::EigenBase<Scalar>, Scalar>)
Scalar repair_density_eval(const RepairDensity& q, Scalar x) {
  if (q.kind == RepairDensity::Kind::kernel_at_zero) return kernel_eval(q.kernel, Scalar(0));
  const Scalar v = special::student_t_pdf((x - Scalar(q.mu)) / Scalar(q.sigma), q.nu);
  return q.normalized ? v / Scalar(q.sigma) : v;
}

template <typename Derived>
typename Derived::Scalar repair_density_eval(const RepairDensity& q,
                                             const Eigen::MatrixBase<Derived>& x) {
  typename Derived::Scalar v(1);
  for (Eigen::Index k = 0; k < x.size(); ++k) v *= repair_density_eval(q, x(k));
  return v;
}

struct NPConfig {
  KernelSpec kernel{};
  double h = 1.0;
  double delta = 0.0;
  RepairDensity q{};

  void validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidParameter("bandwidth must be positive");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidParameter("delta must be non-negative");
  }
};

/// Defaults used throughout the experiments: Gaussian kernel, delta = 1/n and
/// q(x) = t_3(x / 100) / 100.
inline NPConfig default_np_config(Eigen::Index n, double h) {
  return {KernelSpec{KernelKind::gaussian}, h, 1.0 / static_cast<double>(n),
          RepairDensity::student_t_density(3, 0.0, 100.0)};
}

namespace detail {

template <typename Derived>
void check_sample(const Eigen::MatrixBase<Derived>& sample) {
  if (sample.rows() < 2) throw DegenerateSample("estimator needs at least two observations");
  if (sample.cols() < 1 || sample.cols() > 2)
    throw DimensionMismatch("sample dimension must be 1 or 2");
  if (!sample.allFinite()) throw InvalidParameter("sample contains non-finite values");
}

/// Product kernel of a scaled difference row.
template <typename Derived>
typename Derived::Scalar product_kernel(const KernelSpec& k, const Eigen::MatrixBase<Derived>& u) {
  typename Derived::Scalar v(1);
  for (Eigen::Index c = 0; c < u.size(); ++c) v *= kernel_eval(k, u(c));
  return v;
}

}  // namespace detail

/// Kernel density estimate (1/(n h^d)) sum_i K((x - X_i)/h) at a point.
template <typename DerivedS, typename DerivedX>
typename DerivedS::Scalar kde_eval(const Eigen::MatrixBase<DerivedS>& sample, const NPConfig& cfg,
                                   const Eigen::MatrixBase<DerivedX>& x) {
  using Scalar = typename DerivedS::Scalar;
  detail::check_sample(sample);
  cfg.validate();
  if (x.size() != sample.cols()) throw DimensionMismatch("point dimension differs from sample");
  const Scalar h(cfg.h);
  const auto n = sample.rows();
  const auto d = sample.cols();
  if (d == 1) {
    const auto u = (Scalar(x(0)) - sample.col(0).array()) / h;
    return kernel_eval(cfg.kernel, u).sum() / (Scalar(n) * h);
  }
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> row(d);
  for (Eigen::Index c = 0; c < d; ++c) row(c) = Scalar(x(c));
  Scalar total(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    total += detail::product_kernel(cfg.kernel, ((row - sample.row(i)) / h).eval());
  }
  return total / (Scalar(n) * std::pow(h, Scalar(d)));
}

/// Univariate convenience overload.
template <typename Derived>
typename Derived::Scalar kde_eval(const Eigen::MatrixBase<Derived>& sample, const NPConfig& cfg,
                                  typename Derived::Scalar x) {
  Eigen::Matrix<typename Derived::Scalar, 1, 1> p;
  p(0) = x;
  return kde_eval(sample, cfg, p);
}

/// KDE of a univariate sample on many points at once.
template <typename DerivedS, typename DerivedP>
Eigen::Matrix<typename DerivedS::Scalar, Eigen::Dynamic, 1> kde_eval_many(
    const Eigen::MatrixBase<DerivedS>& sample, const NPConfig& cfg,
    const Eigen::MatrixBase<DerivedP>& points) {
  using Scalar = typename DerivedS::Scalar;
  detail::check_sample(sample);
  cfg.validate();
  if (sample.cols() != 1) throw DimensionMismatch("kde_eval_many is univariate");
  const Scalar h(cfg.h);
  const Scalar norm = Scalar(1) / (Scalar(sample.rows()) * h);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(points.size());
  const auto xs = sample.col(0).array();
  for (Eigen::Index k = 0; k < points.size(); ++k) {
    out(k) = kernel_eval(cfg.kernel, ((Scalar(points(k)) - xs) / h).eval()).sum() * norm;
  }
  return out;
}

/// Leave-one-out values (1/((n-1) h^d)) sum_{j != i} K((X_i - X_j)/h).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> loo_values(
    const Eigen::MatrixBase<Derived>& sample, const NPConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  detail::check_sample(sample);
  cfg.validate();
  const auto n = sample.rows();
  const auto d = sample.cols();
  const Scalar h(cfg.h);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sums = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
  if (d == 1) {
    const auto xs = sample.col(0).array();
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const Eigen::Index m = n - i - 1;
      const Eigen::Array<Scalar, Eigen::Dynamic, 1> k =
          kernel_eval(cfg.kernel, ((xs.tail(m) - xs(i)) / h).eval());
      sums(i) += k.sum();
      sums.tail(m).array() += k;
    }
  } else {
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const Scalar k =
            detail::product_kernel(cfg.kernel, ((sample.row(i) - sample.row(j)) / h).eval());
        sums(i) += k;
        sums(j) += k;
      }
    }
  }
  return sums / (Scalar(n - 1) * std::pow(h, Scalar(d)));
}

/// Leave-and-repair values: loo_values + delta * q(X_i).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> lr_values(
    const Eigen::MatrixBase<Derived>& sample, const NPConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = loo_values(sample, cfg);
  if (cfg.delta == 0.0) return out;
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    out(i) += Scalar(cfg.delta) * repair_density_eval(cfg.q, sample.row(i));
  }
  return out;
}

/// Plain KDE evaluated at each observation (the observation itself included).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> kde_at_sample(
    const Eigen::MatrixBase<Derived>& sample, const NPConfig& cfg) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(sample.rows());
  for (Eigen::Index i = 0; i < sample.rows(); ++i) out(i) = kde_eval(sample, cfg, sample.row(i));
  return out;
}

}  // namespace fitcoef
