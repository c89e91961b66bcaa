#include "fitcoef/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "fitcoef/parallel.hpp"

namespace fitcoef {

using nlohmann::json;

const Aggregate& ExperimentReport::at(const std::string& estimator, const std::string& metric, double grid) const {
  for (const auto& a : aggregates) {
    if (a.estimator == estimator && a.metric == metric && std::abs(a.grid - grid) <= 1e-9 * (1.0 + std::abs(grid)))
      return a;
  }
  throw std::out_of_range("no aggregate for " + estimator + "/" + metric);
}

std::vector<Aggregate> ExperimentReport::select(const std::string& estimator, const std::string& metric) const {
  std::vector<Aggregate> out;
  for (const auto& a : aggregates) {
    if (a.estimator == estimator && a.metric == metric) out.push_back(a);
  }
  return out;
}

std::vector<Aggregate> aggregate_records(const std::vector<Record>& records) {
  using Key = std::tuple<double, std::string, std::string>;
  std::map<Key, std::size_t> slot;
  std::vector<std::vector<double>> values;
  std::vector<Aggregate> out;
  for (const auto& r : records) {
    const Key key{r.grid, r.estimator, r.metric};
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.size()).first;
      out.push_back({r.grid, r.estimator, r.metric, 0.0, 0.0, 0});
      values.emplace_back();
    }
    values[it->second].push_back(r.value);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& v = values[k];
    double sum = 0.0;
    for (double x : v) sum += x;
    out[k].count = v.size();
    out[k].mean = sum / static_cast<double>(v.size());
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    out[k].median = m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
  }
  return out;
}

namespace {

/// Runs `reps` replications, each producing its own records, and assembles
/// the report in replication order.
template <typename Body>
void run_replications(ExperimentReport& report, std::size_t reps, const RunOptions& run, Body&& body) {
  std::vector<std::vector<Record>> per_rep(reps);
  parallel_for(reps, run.threads, [&](std::size_t r) { per_rep[r] = body(r); });
  std::vector<Record> all;
  for (auto& v : per_rep) {
    for (auto& rec : v) all.push_back(std::move(rec));
  }
  auto aggregates = aggregate_records(all);
  report.aggregates.insert(report.aggregates.end(), aggregates.begin(), aggregates.end());
  if (all.size() > run.record_cap) {
    all.resize(run.record_cap);
    report.annotations["records_truncated"] = true;
  }
  report.records = std::move(all);
  report.seed = run.seed;
}

json run_options_json(const RunOptions& run) { return {{"seed", run.seed}, {"record_cap", run.record_cap}}; }

FitnessConfig config_for(const Eigen::VectorXd& sample, Family model, CoefficientKind kind, const KernelSpec& kernel,
                         const RepairDensity& q, double h) {
  FitnessConfig cfg;
  cfg.np = NPConfig{kernel, h, 1.0 / static_cast<double>(sample.size()), q};
  cfg.family = model;
  cfg.coefficient_kind = kind;
  return cfg;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bandwidth sweep

std::vector<std::pair<std::string, double>> SweepSpec::reference_ticks() {
  return {{"0.21s", 0.21}, {"0.37s", 0.37}, {"0.43s", 0.43}, {"0.7s", 0.7}};
}

ExperimentReport bandwidth_sweep(const SweepSpec& spec) {
  if (spec.h_fractions.empty()) throw InvalidParameter("bandwidth grid is empty");
  for (std::size_t k = 0; k < spec.h_fractions.size(); ++k) {
    if (!(spec.h_fractions[k] > 0.0)) throw InvalidParameter("bandwidth fractions must be positive");
    if (k > 0 && !(spec.h_fractions[k] > spec.h_fractions[k - 1]))
      throw InvalidParameter("bandwidth fractions must be strictly ascending");
  }
  const std::size_t reps = spec.data ? 1 : spec.reps;
  if (reps < 1) throw InvalidParameter("reps must be at least 1");
  if (!spec.data) validate_params(spec.generator, spec.generator_theta);

  ExperimentReport report;
  report.command = "sweep";
  report.config = {{"source", spec.data ? "data" : "generator"},
                   {"model", to_string(spec.model)},
                   {"kernel", to_string(spec.kernel.kind)},
                   {"q", {{"nu", spec.q.nu}, {"mu", spec.q.mu}, {"sigma", spec.q.sigma}, {"normalized", spec.q.normalized}}},
                   {"h_fractions", spec.h_fractions},
                   {"reps", reps},
                   {"run", run_options_json(spec.run)}};
  if (!spec.data) {
    report.config["generator"] = to_string(spec.generator);
    report.config["generator_theta"] = std::vector<double>(spec.generator_theta.begin(), spec.generator_theta.end());
    report.config["n"] = spec.n;
  }
  json ticks = json::object();
  for (const auto& [name, frac] : SweepSpec::reference_ticks()) ticks[name] = frac;
  report.annotations["ticks"] = ticks;

  std::vector<double> silverman_fraction(reps);
  run_replications(report, reps, spec.run, [&](std::size_t r) {
    Eigen::VectorXd sample;
    if (spec.data) {
      sample = *spec.data;
    } else {
      Rng rng = Rng::stream(spec.run.seed, r);
      sample = sample_from(spec.generator, spec.generator_theta, spec.n, rng);
    }
    const double s = stats::sd(sample);
    if (!(s > 0.0)) throw DegenerateSample("sweep sample has zero dispersion");
    std::vector<Record> recs;
    auto both = [&](double h, double grid, const std::string& metric) {
      for (auto kind : {CoefficientKind::lr, CoefficientKind::os}) {
        const auto res = fitness_coefficient(sample, config_for(sample, spec.model, kind, spec.kernel, spec.q, h));
        recs.push_back({r, grid, to_string(kind), metric, res.alpha});
      }
    };
    for (double frac : spec.h_fractions) both(frac * s, frac, "alpha");
    for (const auto& [name, frac] : SweepSpec::reference_ticks()) both(frac * s, frac, "alpha_tick");
    const double h_silverman = select_bandwidth(BandwidthRule::silverman_robust(), sample);
    silverman_fraction[r] = h_silverman / s;
    both(h_silverman, 0.0, "alpha_silverman");
    return recs;
  });
  double mean_frac = 0.0;
  for (double f : silverman_fraction) mean_frac += f;
  report.annotations["silverman_fraction_mean"] = mean_frac / static_cast<double>(reps);
  return report;
}

// ---------------------------------------------------------------------------
// Intertwine study

std::vector<double> IntertwineSpec::default_t_grid(std::size_t points) {
  if (points < 2) throw InvalidParameter("t grid needs at least two points");
  std::vector<double> t(points);
  for (std::size_t k = 0; k < points; ++k) {
    t[k] = -0.5 + static_cast<double>(k) / static_cast<double>(points - 1);
  }
  // Snap the centre so 0 is represented exactly.
  if (points % 2 == 1) t[points / 2] = 0.0;
  return t;
}

std::vector<std::pair<double, double>> symmetric_cumulative_integral(const std::vector<double>& t_grid,
                                                                     const std::vector<double>& values) {
  if (t_grid.size() != values.size()) throw LengthMismatch("t grid and values differ in length");
  std::vector<std::pair<double, double>> out;
  for (double t : t_grid) {
    if (t < 0.0) continue;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
      const double a = t_grid[k], b = t_grid[k + 1];
      if (a < -t - 1e-12 || b > t + 1e-12) continue;
      total += 0.5 * (b - a) * (values[k] + values[k + 1]);
    }
    out.emplace_back(t, total);
  }
  return out;
}

ExperimentReport intertwine_study(const IntertwineSpec& spec) {
  if (spec.t_grid.empty()) throw InvalidParameter("t grid is empty");
  for (std::size_t k = 0; k < spec.t_grid.size(); ++k) {
    if (!(spec.t_grid[k] > -1.0)) throw InvalidParameter("t must exceed -1");
    if (k > 0 && !(spec.t_grid[k] > spec.t_grid[k - 1])) throw InvalidParameter("t grid must be ascending");
    if (std::abs(spec.t_grid[k] + spec.t_grid[spec.t_grid.size() - 1 - k]) > 1e-12)
      throw InvalidParameter("t grid must be symmetric about 0");
  }
  if (spec.reps < 1) throw InvalidParameter("reps must be at least 1");
  if (spec.n < 10) throw InvalidParameter("n must be at least 10");
  spec.l2_grid.validate();

  const Family model = spec.setting == Setting::setting1 ? Family::normal_mean_only : Family::normal_var_only;
  const Eigen::VectorXd xs = spec.l2_grid.points();

  ExperimentReport report;
  report.command = "intertwine";
  report.config = {{"setting", spec.setting == Setting::setting1 ? "setting1" : "setting2"},
                   {"t_grid", spec.t_grid},
                   {"n", spec.n},
                   {"reps", spec.reps},
                   {"model", to_string(model)},
                   {"l2_grid", {{"lo", spec.l2_grid.lo}, {"hi", spec.l2_grid.hi}, {"m", spec.l2_grid.m}}},
                   {"run", run_options_json(spec.run)}};

  const std::size_t cells = spec.t_grid.size() * spec.reps;
  run_replications(report, cells, spec.run, [&](std::size_t cell) {
    const std::size_t ti = cell / spec.reps;
    const double t = spec.t_grid[ti];
    ParamVector truth_theta(2);
    if (spec.setting == Setting::setting1) {
      truth_theta << 0.0, 1.0 + t;
    } else {
      truth_theta << t, 1.0;
    }
    Rng rng = Rng::stream(spec.run.seed, cell);
    const Eigen::VectorXd sample = sample_from(Family::normal_mean_var, truth_theta, spec.n, rng);
    const double h = select_bandwidth(BandwidthRule::silverman_robust(), sample);
    const FitnessConfig lr_cfg = config_for(sample, model, CoefficientKind::lr, {}, RepairDensity{}, h);
    FitnessConfig os_cfg = lr_cfg;
    os_cfg.coefficient_kind = CoefficientKind::os;
    const FitnessResult lr = fitness_coefficient(sample, lr_cfg);
    const FitnessResult os = fitness_coefficient(sample, os_cfg);

    const Eigen::VectorXd truth = density_eval(Family::normal_mean_var, truth_theta, xs);
    const Eigen::VectorXd param = density_eval(model, lr.theta, xs);
    const Eigen::VectorXd kde = kde_eval_many(sample, lr_cfg.np, xs);
    const Eigen::VectorXd lr_mix = lr.alpha * param + (1.0 - lr.alpha) * kde;
    const Eigen::VectorXd os_mix = os.alpha * param + (1.0 - os.alpha) * kde;

    return std::vector<Record>{
        {cell, t, "lr", "alpha", lr.alpha},
        {cell, t, "os", "alpha", os.alpha},
        {cell, t, "parametric", "l2", l2_distance(param, truth, spec.l2_grid)},
        {cell, t, "nonparametric", "l2", l2_distance(kde, truth, spec.l2_grid)},
        {cell, t, "os_mix", "l2", l2_distance(os_mix, truth, spec.l2_grid)},
        {cell, t, "lr_mix", "l2", l2_distance(lr_mix, truth, spec.l2_grid)},
    };
  });

  // Records arrive grouped by t, so aggregates are ordered by t within each
  // (estimator, metric) series.
  for (const std::string est : {"parametric", "nonparametric", "os_mix", "lr_mix"}) {
    std::vector<double> curve;
    for (double t : spec.t_grid) curve.push_back(report.at(est, "l2", t).mean);
    for (const auto& [t, integral] : symmetric_cumulative_integral(spec.t_grid, curve)) {
      report.aggregates.push_back({t, est, "integrated_l2", integral, integral, spec.reps});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Copula study

namespace {

double l2_squared_2d(const Eigen::MatrixXd& f, const Eigen::MatrixXd& g, const Grid& g1, const Grid& g2) {
  Eigen::VectorXd w1 = Eigen::VectorXd::Constant(g1.m, g1.step());
  Eigen::VectorXd w2 = Eigen::VectorXd::Constant(g2.m, g2.step());
  w1(0) *= 0.5;
  w1(g1.m - 1) *= 0.5;
  w2(0) *= 0.5;
  w2(g2.m - 1) *= 0.5;
  return w1.transpose() * (f - g).array().square().matrix() * w2;
}

}  // namespace

ExperimentReport copula_study(const CopulaStudySpec& spec) {
  if (spec.n_list.empty()) throw InvalidParameter("n list is empty");
  for (auto n : spec.n_list) {
    if (n < 10) throw InvalidParameter("copula study needs n >= 10");
  }
  if (spec.reps < 1) throw InvalidParameter("reps must be at least 1");
  const CopulaParam true_copula{spec.xi};
  true_copula.validate();
  ParamVector exp_theta(1);
  exp_theta << 2.0;
  ParamVector weib_theta(2);
  weib_theta << 2.0, 0.5;

  const Eigen::VectorXd xs1 = spec.grid1.points();
  const Eigen::VectorXd xs2 = spec.grid2.points();
  Eigen::MatrixXd truth(xs1.size(), xs2.size());
  for (Eigen::Index i = 0; i < xs1.size(); ++i) {
    for (Eigen::Index j = 0; j < xs2.size(); ++j) {
      const double f1 = density_eval(Family::exponential, exp_theta, xs1(i));
      const double f2 = density_eval(Family::weibull, weib_theta, xs2(j));
      truth(i, j) = (f1 == 0.0 || f2 == 0.0)
                        ? 0.0
                        : copula_pdf(true_copula,
                                     std::clamp(cdf_eval(Family::exponential, exp_theta, xs1(i)), 1e-10, 1 - 1e-10),
                                     std::clamp(cdf_eval(Family::weibull, weib_theta, xs2(j)), 1e-10, 1 - 1e-10)) *
                              f1 * f2;
    }
  }

  ExperimentReport report;
  report.command = "copula-study";
  report.config = {{"n_list", spec.n_list},
                   {"reps", spec.reps},
                   {"xi", spec.xi},
                   {"margins", {"exponential(2)", "weibull(2,0.5)"}},
                   {"model", "exponential"},
                   {"convention", spec.convention == PseudoConvention::n_plus_1 ? "n_plus_1" : "n"},
                   {"grid1", {{"lo", spec.grid1.lo}, {"hi", spec.grid1.hi}, {"m", spec.grid1.m}}},
                   {"grid2", {{"lo", spec.grid2.lo}, {"hi", spec.grid2.hi}, {"m", spec.grid2.m}}},
                   {"run", run_options_json(spec.run)}};

  const std::size_t cells = spec.n_list.size() * spec.reps;
  run_replications(report, cells, spec.run, [&](std::size_t cell) {
    const Eigen::Index n = spec.n_list[cell / spec.reps];
    const double grid_n = static_cast<double>(n);
    Rng rng = Rng::stream(spec.run.seed, cell);
    const Matrix2Col u = sample_copula(true_copula, n, rng);
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, 0) = quantile_eval(Family::exponential, exp_theta, u(i, 0));
      x(i, 1) = quantile_eval(Family::weibull, weib_theta, u(i, 1));
    }
    const CopulaFit cfit = rank_pseudo_mle(x, spec.convention);

    std::vector<Record> recs;
    recs.push_back({cell, grid_n, "copula", "xi", cfit.param.xi});

    std::vector<MarginalEstimate> nonpar, par, semi;
    for (Eigen::Index c = 0; c < 2; ++c) {
      const Eigen::VectorXd col = x.col(c);
      const FitnessConfig cfg = make_fitness_config(col, Family::exponential, CoefficientKind::lr);
      const FitnessResult fit = fitness_coefficient(col, cfg);
      nonpar.push_back(MarginalEstimate::nonparametric(col, cfg.np));
      par.push_back(MarginalEstimate::parametric(Family::exponential, fit.theta));
      semi.emplace_back(SemiparametricDensity::from_fit(col, cfg, fit));
      recs.push_back({cell, grid_n, c == 0 ? "margin1" : "margin2", "alpha", fit.alpha});
    }
    const auto error = [&](const std::vector<MarginalEstimate>& m) {
      const JointDensityEstimate est{cfit.param, m[0], m[1]};
      return l2_squared_2d(joint_density_grid(est, xs1, xs2), truth, spec.grid1, spec.grid2);
    };
    recs.push_back({cell, grid_n, "nonparametric", "l2_squared", error(nonpar)});
    recs.push_back({cell, grid_n, "parametric", "l2_squared", error(par)});
    recs.push_back({cell, grid_n, "semiparametric", "l2_squared", error(semi)});
    return recs;
  });
  return report;
}

// ---------------------------------------------------------------------------
// Agreement study

std::string_view to_string(Generator g) {
  switch (g) {
    case Generator::normal: return "normal";
    case Generator::student_t3: return "t3";
    case Generator::student_t5: return "t5";
    case Generator::student_t10: return "t10";
    case Generator::lognormal: return "lognormal";
    case Generator::chi_square4: return "chisq4";
  }
  return "unknown";
}

Generator parse_generator(std::string_view name) {
  for (Generator g : {Generator::normal, Generator::student_t3, Generator::student_t5, Generator::student_t10,
                      Generator::lognormal, Generator::chi_square4}) {
    if (name == to_string(g)) return g;
  }
  throw InvalidParameter("unknown generator '" + std::string(name) + "'");
}

Eigen::VectorXd draw_generator(Generator g, Eigen::Index n, Rng& rng) {
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    switch (g) {
      case Generator::normal: out(i) = rng.normal(); break;
      case Generator::student_t3: out(i) = rng.student_t(3); break;
      case Generator::student_t5: out(i) = rng.student_t(5); break;
      case Generator::student_t10: out(i) = rng.student_t(10); break;
      case Generator::lognormal: out(i) = std::exp(0.5 * rng.normal()); break;
      case Generator::chi_square4: out(i) = rng.chi_square(4); break;
    }
  }
  return out;
}

double spearman(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw LengthMismatch("Spearman correlation needs equal-length vectors");
  if (x.size() < 2) throw DegenerateSample("Spearman correlation needs two observations");
  const Eigen::ArrayXd rx = average_ranks(x).array() - 0.5 * static_cast<double>(x.size() + 1);
  const Eigen::ArrayXd ry = average_ranks(y).array() - 0.5 * static_cast<double>(y.size() + 1);
  const double denom = std::sqrt(rx.square().sum() * ry.square().sum());
  if (!(denom > 0.0)) throw DegenerateSample("Spearman correlation of a constant vector");
  return (rx * ry).sum() / denom;
}

ExperimentReport agreement_study(const AgreementSpec& spec) {
  if (spec.generators.empty()) throw InvalidParameter("no generators given");
  if (spec.B < 99) throw InvalidParameter("agreement study needs B >= 99");
  if (spec.reps < 2) throw InvalidParameter("agreement study needs at least two replications");

  ExperimentReport report;
  report.command = "agreement";
  std::vector<std::string> names;
  for (auto g : spec.generators) names.emplace_back(to_string(g));
  report.config = {{"generators", names},   {"n", spec.n}, {"reps", spec.reps},
                   {"B", spec.B},           {"model", to_string(Family::normal_mean_var)},
                   {"run", run_options_json(spec.run)}};

  std::vector<double> alphas(spec.reps), log_ps(spec.reps);
  run_replications(report, spec.reps, spec.run, [&](std::size_t r) {
    const std::size_t gi = r % spec.generators.size();
    const Generator g = spec.generators[gi];
    Rng rng = Rng::stream(spec.run.seed, r);
    const Eigen::VectorXd sample = draw_generator(g, spec.n, rng);
    const GofReport gof = bootstrap_pvalue(sample, Family::normal_mean_var, spec.B, rng.below(UINT64_MAX), 1);
    const FitnessResult fit =
        fitness_coefficient(sample, make_fitness_config(sample, Family::normal_mean_var, CoefficientKind::lr));
    alphas[r] = fit.alpha;
    log_ps[r] = std::log(gof.p_value);
    const auto grid = static_cast<double>(gi);
    const std::string name(to_string(g));
    return std::vector<Record>{{r, grid, name, "alpha", fit.alpha},
                               {r, grid, name, "p_value", gof.p_value},
                               {r, grid, name, "log_p", std::log(gof.p_value)},
                               {r, grid, name, "cvm", gof.statistic}};
  });
  const Eigen::Map<const Eigen::VectorXd> a(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
  const Eigen::Map<const Eigen::VectorXd> lp(log_ps.data(), static_cast<Eigen::Index>(log_ps.size()));
  try {
    report.annotations["spearman_alpha_log_p"] = spearman(a, lp);
  } catch (const DegenerateSample&) {
    report.annotations["spearman_alpha_log_p"] = nullptr;
  }
  return report;
}

}  // namespace fitcoef
