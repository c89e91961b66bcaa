// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <quadmath.h>
#include <sstream>
#include <string>
#include <vector>

#include "fitcoef/cli.hpp"
#include "fitcoef/copula.hpp"
#include "fitcoef/experiments.hpp"
#include "fitcoef/fitness.hpp"
#include "fitcoef/io.hpp"

using namespace fitcoef;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome wind_mle() {
  const ParamVector t = fit_mle(Family::gumbel_paper, wind_speed_data());
  const bool ok = std::abs(t(0) - 62.1) <= 0.1 && std::abs(t(1) - 5.4) <= 0.1;
  return {ok, fmt("theta = (%.4f, %.4f)", t(0), t(1))};
}

Outcome wind_coefficients() {
  const Eigen::VectorXd x = wind_speed_data();
  const double s = stats::sd(x);
  auto lr_cfg = make_fitness_config(x, Family::gumbel_paper, CoefficientKind::lr);
  const double at_silverman = fitness_coefficient(x, lr_cfg).alpha;
  double lr_min = 1.0;
  for (double frac : std::vector<double>(Eigen::VectorXd::LinSpaced(25, 0.3, 1.5).begin(),
                                         Eigen::VectorXd::LinSpaced(25, 0.3, 1.5).end())) {
    lr_cfg.np.h = frac * s;
    lr_min = std::min(lr_min, fitness_coefficient(x, lr_cfg).alpha);
  }
  auto os_cfg = make_fitness_config(x, Family::gumbel_paper, CoefficientKind::os, BandwidthRule::fixed(0.7 * s));
  const double os07 = fitness_coefficient(x, os_cfg).alpha;
  os_cfg.np.h = 0.21 * s;
  const double os021 = fitness_coefficient(x, os_cfg).alpha;
  const bool ok = at_silverman >= 0.9 && lr_min >= 0.9 && os07 >= 0.7 && os07 <= 0.9 && os021 <= 0.05;
  return {ok, fmt("LR(silverman) = %.4f, min LR on [0.3s,1.5s] = %.4f, OS(0.7s) = %.4f, OS(0.21s) = %.4f",
                  at_silverman, lr_min, os07, os021)};
}

double median_silverman_alpha(Family generator, const ParamVector& theta) {
  SweepSpec spec;
  spec.generator = generator;
  spec.generator_theta = theta;
  spec.n = 400;
  spec.reps = 50;
  spec.h_fractions = {0.37};
  spec.model = Family::gumbel_paper;
  spec.run.seed = 20240601;
  return bandwidth_sweep(spec).at("lr", "alpha_silverman", 0.0).median;
}

Outcome consistency_true() {
  const double m = median_silverman_alpha(Family::gumbel_paper, gumbel_from_moments(59.1, 6.55));
  return {m >= 0.9, fmt("median alpha = %.4f (need >= 0.9)", m)};
}

Outcome consistency_false() {
  ParamVector t(2);
  t << 59.1, 6.55;
  const double m = median_silverman_alpha(Family::normal_mean_var, t);
  return {m <= 0.1, fmt("median alpha = %.4f (need <= 0.1)", m)};
}

Outcome intertwine() {
  IntertwineSpec spec;
  spec.setting = Setting::setting1;
  spec.t_grid = IntertwineSpec::default_t_grid(21);
  spec.n = 400;
  spec.reps = 100;
  spec.run.seed = 20240602;
  const ExperimentReport r = intertwine_study(spec);

  const double a0 = r.at("lr", "alpha", 0.0).mean;
  const double a_lo = r.at("lr", "alpha", -0.5).mean;
  const double a_hi = r.at("lr", "alpha", 0.5).mean;
  const bool part_a = a0 >= 0.8 && a_lo <= 0.2 && a_hi <= 0.2;

  double worst = 0.0, worst_t = 0.0;
  for (double t : spec.t_grid) {
    const double lr = r.at("lr_mix", "l2", t).mean;
    const double best = std::min(r.at("parametric", "l2", t).mean, r.at("nonparametric", "l2", t).mean);
    if (lr / best > worst) {
      worst = lr / best;
      worst_t = t;
    }
  }
  const bool part_b = worst <= 1.1;

  const double lr_int = r.at("lr_mix", "integrated_l2", 0.5).mean;
  bool part_c = true;
  for (const char* other : {"parametric", "nonparametric", "os_mix"}) {
    part_c = part_c && lr_int <= r.at(other, "integrated_l2", 0.5).mean;
  }
  return {part_a && part_b && part_c,
          fmt("(a) %s alpha(0) = %.3f, alpha(-0.5) = %.3f, alpha(0.5) = %.3f; "
              "(b) %s worst LR-mix / min ratio = %.3f at t = %.2f; (c) %s integrated LR = %.5f",
              part_a ? "ok" : "FAIL", a0, a_lo, a_hi, part_b ? "ok" : "FAIL", worst, worst_t,
              part_c ? "ok" : "FAIL", lr_int)};
}

Outcome copula_pipeline() {
  CopulaStudySpec spec;
  spec.n_list = {200};
  spec.reps = 50;
  spec.run.seed = 20240603;
  const ExperimentReport r = copula_study(spec);
  const double semi = r.at("semiparametric", "l2_squared", 200).mean;
  const double par = r.at("parametric", "l2_squared", 200).mean;
  const double np = r.at("nonparametric", "l2_squared", 200).mean;
  const double a1 = r.at("margin1", "alpha", 200).mean;
  const double a2 = r.at("margin2", "alpha", 200).mean;
  const bool ok = semi < par && semi < np && a1 >= 0.8 && a2 <= 0.2;
  return {ok, fmt("L2^2 semi = %.4f, parametric = %.4f, nonparametric = %.4f; alpha margin1 = %.3f, margin2 = %.3f",
                  semi, par, np, a1, a2)};
}

// Gumbel copula cdf in quad precision; a double finite difference cannot
// resolve densities near 1e-12 in the corners at large xi.
__float128 cdf_q(double xi, __float128 u, __float128 v) {
  const __float128 t = powq(-logq(u), xi) + powq(-logq(v), xi);
  return expq(-powq(t, 1 / __float128(xi)));
}

Outcome copula_oracles() {
  double worst_rel = 0.0, worst_cdf = 0.0;
  for (double xi : {1.5, 3.0, 8.0}) {
    const CopulaParam p{xi};
    for (int i = 1; i <= 19; ++i) {
      for (int j = 1; j <= 19; ++j) {
        const __float128 u = __float128(i) / 20, v = __float128(j) / 20, e = 1e-6;
        const double fd =
            double((cdf_q(xi, u + e, v + e) - cdf_q(xi, u + e, v - e) - cdf_q(xi, u - e, v + e) +
                    cdf_q(xi, u - e, v - e)) /
                   (4 * e * e));
        worst_rel = std::max(worst_rel, std::abs(copula_pdf(p, i / 20.0, j / 20.0) - fd) / fd);
        const double c = double(cdf_q(xi, u, v));
        worst_cdf = std::max(worst_cdf, std::abs(copula_cdf(p, i / 20.0, j / 20.0) - c) / c);
      }
    }
  }

  // Midpoint rule on (0,1)^2 after the substitution u = s^2 (3 - 2s), which
  // flattens the corner singularities.
  const int m = 1500;
  const CopulaParam p3{3.0};
  double mass = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s = (i + 0.5) / m;
    const double u = s * s * (3 - 2 * s), du = 6 * s * (1 - s);
    for (int j = 0; j < m; ++j) {
      const double t = (j + 0.5) / m;
      const double v = t * t * (3 - 2 * t), dv = 6 * t * (1 - t);
      mass += copula_pdf(p3, u, v) * du * dv;
    }
  }
  mass /= double(m) * m;

  Rng rng(20240604);
  const Matrix2Col draws = sample_copula(p3, 10000, rng);
  const double tau = kendall_tau(draws.col(0), draws.col(1));

  const bool ok = worst_rel <= 1e-4 && worst_cdf <= 1e-12 && std::abs(mass - 1.0) <= 1e-3 &&
                  std::abs(tau - 2.0 / 3) <= 0.02;
  return {ok, fmt("max rel. err = %.2e (cdf %.1e), mass = %.6f, tau = %.4f", worst_rel, worst_cdf, mass, tau)};
}

Outcome optimizer_oracle() {
  Rng rng(20240605);
  double worst = 0.0;
  bool concave = true;
  for (int r = 0; r < 100; ++r) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.below(60));
    Eigen::VectorXd p(n), g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = std::exp(1.5 * rng.normal());
      g(i) = std::exp(1.5 * rng.normal());
    }
    const double a = solve_alpha(p, g).alpha;
    double best = -INFINITY, arg = 0.0;
    const int points = 100000;
    for (int k = 0; k < points; ++k) {
      const double x = double(k) / (points - 1);
      const double v = mixture_loglik(x, p, g);
      if (v > best) {
        best = v;
        arg = x;
      }
    }
    worst = std::max(worst, std::abs(a - arg));
    for (int k = 0; k < 50; ++k) {
      double lo = rng.uniform(), hi = rng.uniform();
      if (lo > hi) std::swap(lo, hi);
      if (hi - lo < 1e-6) continue;
      concave = concave && mixture_loglik(0.5 * (lo + hi), p, g) >
                               0.5 * (mixture_loglik(lo, p, g) + mixture_loglik(hi, p, g));
    }
  }
  return {worst <= 2e-5 && concave, fmt("max |alpha - grid argmax| = %.2e, strict concavity %s", worst,
                                        concave ? "holds" : "violated")};
}

Outcome agreement() {
  AgreementSpec spec;
  spec.n = 409;
  spec.reps = 100;
  spec.B = 199;
  spec.run.seed = 20240606;
  const ExperimentReport r = agreement_study(spec);
  const double rho = r.annotations.at("spearman_alpha_log_p").get<double>();
  return {rho > 0.5, fmt("Spearman(alpha, log p) = %.4f (need > 0.5)", rho)};
}

std::string run_cli(std::vector<std::string> args, const std::filesystem::path& out) {
  args.push_back("--out");
  args.push_back(out.string());
  std::ostringstream o, e;
  if (cli::parse_and_dispatch(args, o, e) != 0) return "exit failure: " + e.str();
  std::ifstream in(out, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "fitcoef_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::vector<std::string>> commands{
      {"gof", "--data", "builtin:wind", "--model", "gumbel", "--B", "199", "--seed", "3"},
      {"sweep", "--generator", "gumbel", "--n", "200", "--reps", "6", "--seed", "3"},
      {"sweep", "--generator", "normal", "--n", "200", "--reps", "6", "--seed", "4", "--kernel", "epanechnikov"},
      {"intertwine", "--setting", "2", "--n", "100", "--reps", "4", "--t-points", "5", "--seed", "3"},
      {"copula-study", "--n-list", "50,80", "--reps", "3", "--grid-m", "40", "--seed", "3"},
      {"agreement", "--n", "100", "--reps", "10", "--B", "99", "--seed", "3"},
  };
  int matched = 0;
  std::string failed;
  for (const auto& cmd : commands) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "1", "2", "5"}) {
      auto args = cmd;
      args.insert(args.end(), {"--threads", threads});
      outputs.push_back(run_cli(args, dir / (cmd[0] + ".json")));
    }
    bool same = outputs[0].rfind("exit failure", 0) != 0;
    for (const auto& o : outputs) same = same && o == outputs[0];
    if (same) {
      ++matched;
    } else {
      failed += " " + cmd[0];
    }
  }
  return {matched == int(commands.size()),
          fmt("%d/%zu commands byte-identical across reruns and thread counts 1, 2, 5%s", matched, commands.size(),
              failed.empty() ? "" : (" (differs:" + failed + ")").c_str())};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "wind-speed Gumbel MLE", 1.0, wind_mle},
      {2, "wind-speed LR and OS coefficients", 5.0, wind_coefficients},
      {3, "consistency, model true", 60.0, consistency_true},
      {4, "consistency, model false", 60.0, consistency_false},
      {5, "intertwine study, setting 1", 900.0, intertwine},
      {6, "copula study, n = 200", 1200.0, copula_pipeline},
      {7, "copula unit oracles", 30.0, copula_oracles},
      {8, "optimizer oracle", 10.0, optimizer_oracle},
      {9, "alpha / p-value agreement", 600.0, agreement},
      {10, "determinism", 600.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s; %.2f s (limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.time_limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
