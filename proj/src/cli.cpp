#include "fitcoef/cli.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "fitcoef/copula.hpp"
#include "fitcoef/experiments.hpp"
#include "fitcoef/fitness.hpp"
#include "fitcoef/gof.hpp"
#include "fitcoef/io.hpp"
#include "fitcoef/models.hpp"

namespace fitcoef::cli {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_double(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + " '" + text + "'");
  }
}

struct Options {
  std::string data;
  std::string model = "gumbel";
  std::string out;
  std::string table;
  std::string bandwidth = "silverman";
  std::string coefficient = "lr";
  std::string kernel = "gaussian";
  std::string delta = "1/n";
  std::string q = "tdens:3,0,100";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::size_t reps = 0;
  long long n = 0;
  std::size_t B = 199;
  bool per_point = false;

  // sweep
  std::string generator;
  double gen_mean = 59.1;
  double gen_sd = 6.55;
  std::string h_grid = "0.05:1.5:30";
  // intertwine
  int setting = 1;
  std::size_t t_points = 21;
  double l2_lo = -8.0, l2_hi = 8.0;
  long long l2_m = 2001;
  // copula-study
  std::string n_list = "200";
  std::string convention = "n_plus_1";
  long long grid_m = 150;
  // agreement
  std::string generators = "normal,t10,t5,t3,lognormal";
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

Family family_flag(const std::string& name) {
  try {
    return parse_family(name);
  } catch (const InvalidParameter& e) {
    throw UsageError(e.what());
  }
}

KernelSpec kernel_flag(const std::string& name) {
  if (name == "gaussian") return {KernelKind::gaussian};
  if (name == "epanechnikov") return {KernelKind::epanechnikov};
  throw UsageError("unknown kernel '" + name + "'");
}

CoefficientKind coefficient_flag(const std::string& name) {
  if (name == "lr") return CoefficientKind::lr;
  if (name == "os") return CoefficientKind::os;
  throw UsageError("unknown coefficient kind '" + name + "' (expected lr or os)");
}

RepairDensity q_flag(const std::string& text, const KernelSpec& kernel) {
  if (text == "kernel0") return RepairDensity::kernel_at_zero(kernel);
  const bool density = text.rfind("tdens:", 0) == 0;
  if (density || text.rfind("t:", 0) == 0) {
    const auto parts = split_list(text.substr(density ? 6 : 2));
    if (parts.size() != 3) throw UsageError("q grammar is t:<nu>,<mu>,<sigma>");
    const double nu = parse_double(parts[0], "q degrees of freedom");
    if (nu != std::floor(nu) || nu < 1) throw UsageError("q degrees of freedom must be a positive integer");
    const double sigma = parse_double(parts[2], "q scale");
    if (!(sigma > 0.0)) throw UsageError("q scale must be positive");
    return RepairDensity::student_t(static_cast<int>(nu), parse_double(parts[1], "q location"), sigma,
                                     density);
  }
  throw UsageError("unknown repair density '" + text + "'");
}

double delta_flag(const std::string& text, Eigen::Index n) {
  if (text == "1/n") return 1.0 / static_cast<double>(n);
  const double d = parse_double(text, "delta");
  if (!(d >= 0.0)) throw UsageError("delta must be non-negative");
  return d;
}

Eigen::VectorXd univariate(const Eigen::MatrixXd& sample) {
  if (sample.cols() != 1) throw DimensionMismatch("this command needs a single-column dataset");
  return sample.col(0);
}

std::uint64_t require_seed(const Options& o, const std::string& command) {
  if (!o.seed) throw UsageError(command + " is stochastic and requires --seed");
  return *o.seed;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

void emit(const Options& o, const json& doc, std::ostream& out) {
  const std::string text = dump_document(doc);
  if (o.out.empty()) {
    out << text;
  } else {
    write_text(o.out, text);
  }
}

void emit_report(const Options& o, const ExperimentReport& report, std::ostream& out) {
  emit(o, to_json(report), out);
  std::string table = o.table;
  if (table.empty() && !o.out.empty()) table = std::filesystem::path(o.out).replace_extension(".csv").string();
  if (!table.empty()) write_text(table, report_table(report));
}

RunOptions run_options(const Options& o, std::uint64_t seed) {
  RunOptions run;
  run.seed = seed;
  run.threads = std::max(1u, o.threads);
  return run;
}

// ---------------------------------------------------------------------------

void cmd_fit(const Options& o, std::ostream& out) {
  const Eigen::VectorXd x = univariate(load_dataset(o.data));
  const Family family = family_flag(o.model);
  const ParamVector theta = fit_mle(family, x);
  const json config = {{"data", o.data}, {"model", to_string(family)}};
  const json results = {{"theta", vec_json(theta)},
                        {"loglik", log_likelihood(family, theta, x)},
                        {"n", x.size()}};
  emit(o, make_document("fit", config, 0, results), out);
}

void cmd_fitness(const Options& o, std::ostream& out) {
  const Eigen::VectorXd x = univariate(load_dataset(o.data));
  FitnessConfig cfg;
  cfg.family = family_flag(o.model);
  cfg.coefficient_kind = coefficient_flag(o.coefficient);
  cfg.np.kernel = kernel_flag(o.kernel);
  const BandwidthFlag bw = parse_bandwidth_flag(o.bandwidth);
  cfg.np.h = bw.sd_fraction > 0.0 ? bw.sd_fraction * stats::sd(x) : select_bandwidth(bw.rule, x);
  cfg.np.delta = delta_flag(o.delta, x.size());
  cfg.np.q = q_flag(o.q, cfg.np.kernel);

  const FitnessResult r = fitness_coefficient(x, cfg);
  const json config = {{"data", o.data},
                       {"model", to_string(cfg.family)},
                       {"coefficient", to_string(cfg.coefficient_kind)},
                       {"kernel", to_string(cfg.np.kernel.kind)},
                       {"bandwidth", o.bandwidth},
                       {"delta", cfg.np.delta},
                       {"q", o.q}};
  const json results = {{"alpha", r.alpha},
                        {"theta", vec_json(r.theta)},
                        {"h", r.h},
                        {"at_boundary", to_string(r.at_boundary)},
                        {"loglik_at_alpha", r.loglik_at_alpha},
                        {"n", x.size()}};
  json per_point = nullptr;
  if (o.per_point) {
    per_point = {{"x", vec_json(x)}, {"param_values", vec_json(r.param_values)},
                 {"nonparam_values", vec_json(r.nonparam_values)}};
  }
  emit(o, make_document("fitness", config, 0, results, per_point), out);
}

void cmd_gof(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o, "gof");
  const Eigen::VectorXd x = univariate(load_dataset(o.data));
  const Family family = family_flag(o.model);
  if (o.B < 1) throw UsageError("--B must be at least 1");
  const GofReport g = bootstrap_pvalue(x, family, o.B, seed, std::max(1u, o.threads));
  const json config = {{"data", o.data}, {"model", to_string(family)}, {"B", o.B}};
  const json results = {{"statistic", g.statistic},
                        {"p_value", g.p_value},
                        {"bootstrap_reps", g.bootstrap_reps},
                        {"theta", vec_json(g.theta)}};
  emit(o, make_document("gof", config, seed, results), out);
}

std::vector<double> parse_h_grid(const std::string& text) {
  // lo:hi:count, or an explicit comma-separated list
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw UsageError("h grid grammar is lo:hi:count");
    const double lo = parse_double(parts[0], "h grid start");
    const double hi = parse_double(parts[1], "h grid end");
    const auto count = static_cast<int>(parse_double(parts[2], "h grid count"));
    if (count < 1 || !(lo > 0.0) || (count > 1 && !(hi > lo))) throw UsageError("invalid h grid");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) grid[static_cast<std::size_t>(k)] = count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
    return grid;
  }
  std::vector<double> grid;
  for (const auto& p : split_list(text)) grid.push_back(parse_double(p, "h grid value"));
  return grid;
}

void cmd_sweep(const Options& o, std::ostream& out) {
  SweepSpec spec;
  spec.model = family_flag(o.model);
  spec.kernel = kernel_flag(o.kernel);
  spec.q = q_flag(o.q, spec.kernel);
  spec.h_fractions = parse_h_grid(o.h_grid);
  std::uint64_t seed = o.seed.value_or(0);
  if (!o.data.empty() && !o.generator.empty()) throw UsageError("give either --data or --generator, not both");
  if (!o.data.empty()) {
    spec.data = univariate(load_dataset(o.data));
  } else if (!o.generator.empty()) {
    seed = require_seed(o, "sweep with --generator");
    spec.generator = family_flag(o.generator);
    if (spec.generator == Family::gumbel_paper) {
      spec.generator_theta = gumbel_from_moments(o.gen_mean, o.gen_sd);
    } else if (spec.generator == Family::normal_mean_var) {
      spec.generator_theta = ParamVector(2);
      spec.generator_theta << o.gen_mean, o.gen_sd;
    } else {
      throw UsageError("sweep generators are gumbel or normal");
    }
    spec.n = o.n > 0 ? o.n : 400;
    spec.reps = o.reps > 0 ? o.reps : 1;
  } else {
    throw UsageError("sweep needs --data or --generator");
  }
  spec.run = run_options(o, seed);
  ExperimentReport report = bandwidth_sweep(spec);
  if (spec.data) report.config["data"] = o.data;
  emit_report(o, report, out);
}

void cmd_intertwine(const Options& o, std::ostream& out) {
  IntertwineSpec spec;
  if (o.setting != 1 && o.setting != 2) throw UsageError("--setting must be 1 or 2");
  spec.setting = o.setting == 1 ? Setting::setting1 : Setting::setting2;
  spec.t_grid = IntertwineSpec::default_t_grid(o.t_points);
  spec.n = o.n > 0 ? o.n : 400;
  spec.reps = o.reps > 0 ? o.reps : 100;
  spec.l2_grid = Grid{o.l2_lo, o.l2_hi, o.l2_m};
  spec.run = run_options(o, require_seed(o, "intertwine"));
  emit_report(o, intertwine_study(spec), out);
}

void cmd_copula_study(const Options& o, std::ostream& out) {
  CopulaStudySpec spec;
  spec.n_list.clear();
  for (const auto& p : split_list(o.n_list)) {
    const double v = parse_double(p, "sample size");
    if (v < 10 || v != std::floor(v)) throw UsageError("sample sizes must be integers >= 10");
    spec.n_list.push_back(static_cast<Eigen::Index>(v));
  }
  if (spec.n_list.empty()) throw UsageError("--n-list is empty");
  spec.reps = o.reps > 0 ? o.reps : 50;
  if (o.convention == "n_plus_1") {
    spec.convention = PseudoConvention::n_plus_1;
  } else if (o.convention == "n") {
    spec.convention = PseudoConvention::n;
  } else {
    throw UsageError("--convention must be n_plus_1 or n");
  }
  spec.grid1.m = spec.grid2.m = o.grid_m;
  spec.run = run_options(o, require_seed(o, "copula-study"));
  emit_report(o, copula_study(spec), out);
}

void cmd_agreement(const Options& o, std::ostream& out) {
  AgreementSpec spec;
  spec.generators.clear();
  for (const auto& name : split_list(o.generators)) {
    try {
      spec.generators.push_back(parse_generator(name));
    } catch (const InvalidParameter& e) {
      throw UsageError(e.what());
    }
  }
  spec.n = o.n > 0 ? o.n : 409;
  spec.reps = o.reps > 0 ? o.reps : 100;
  spec.B = o.B;
  if (spec.B < 99) throw UsageError("agreement needs --B >= 99");
  spec.run = run_options(o, require_seed(o, "agreement"));
  emit_report(o, agreement_study(spec), out);
}

}  // namespace

BandwidthFlag parse_bandwidth_flag(const std::string& text) {
  if (text == "silverman") return {BandwidthRule::silverman_robust(), 0.0};
  if (text == "silverman-normal") return {BandwidthRule::silverman_normal(), 0.0};
  if (text.rfind("fixed:", 0) == 0) {
    std::string value = text.substr(6);
    double fraction = 0.0;
    if (value.size() > 2 && value.compare(value.size() - 2, 2, "sd") == 0) {
      fraction = parse_double(value.substr(0, value.size() - 2), "bandwidth fraction");
      if (!(fraction > 0.0)) throw UsageError("bandwidth fraction must be positive");
      return {BandwidthRule::silverman_robust(), fraction};
    }
    const double h = parse_double(value, "bandwidth");
    if (!(h > 0.0)) throw UsageError("bandwidth must be positive");
    return {BandwidthRule::fixed(h), 0.0};
  }
  throw UsageError("bandwidth must be silverman, silverman-normal, fixed:<h> or fixed:<c>sd");
}

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Fitness coefficient: parametric versus nonparametric density estimation"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Write the JSON report here instead of stdout");
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", o.model, "normal | normal-mean | normal-scale | gumbel | exponential | weibull");
  };
  auto add_np = [&](CLI::App* sub) {
    sub->add_option("--kernel", o.kernel, "gaussian | epanechnikov");
    sub->add_option("--q", o.q, "Repair density: t:<nu>,<mu>,<sigma> | tdens:<nu>,<mu>,<sigma> | kernel0");
  };
  auto add_table = [&](CLI::App* sub) { sub->add_option("--table", o.table, "Flat CSV table path"); };

  auto* fit = app.add_subcommand("fit", "Maximum likelihood fit");
  fit->add_option("--data", o.data, "CSV path or builtin:wind")->required();
  add_model(fit);
  add_common(fit);

  auto* fitness = app.add_subcommand("fitness", "Fitness (or OS) coefficient");
  fitness->add_option("--data", o.data, "CSV path or builtin:wind")->required();
  add_model(fitness);
  add_np(fitness);
  fitness->add_option("--bandwidth", o.bandwidth, "silverman | silverman-normal | fixed:<h> | fixed:<c>sd");
  fitness->add_option("--coefficient", o.coefficient, "lr | os");
  fitness->add_option("--delta", o.delta, "Repair weight, number or 1/n");
  fitness->add_flag("--per-point", o.per_point, "Include per-observation density values");
  add_common(fitness);

  auto* gof = app.add_subcommand("gof", "Cramer-von Mises parametric bootstrap test");
  gof->add_option("--data", o.data, "CSV path or builtin:wind")->required();
  add_model(gof);
  gof->add_option("--B", o.B, "Bootstrap replications");
  add_common(gof);

  auto* sweep = app.add_subcommand("sweep", "Coefficients as a function of the bandwidth");
  sweep->add_option("--data", o.data, "CSV path or builtin:wind");
  sweep->add_option("--generator", o.generator, "gumbel | normal");
  sweep->add_option("--gen-mean", o.gen_mean, "Generator mean");
  sweep->add_option("--gen-sd", o.gen_sd, "Generator standard deviation");
  sweep->add_option("--h-grid", o.h_grid, "lo:hi:count or list, as fractions of the sample sd");
  sweep->add_option("--n", o.n, "Generated sample size");
  sweep->add_option("--reps", o.reps, "Replications");
  add_model(sweep);
  add_np(sweep);
  add_table(sweep);
  add_common(sweep);

  auto* intertwine = app.add_subcommand("intertwine", "Model and truth intertwine study");
  intertwine->add_option("--setting", o.setting, "1 or 2");
  intertwine->add_option("--t-points", o.t_points, "Points of the t grid on [-0.5, 0.5]");
  intertwine->add_option("--n", o.n, "Sample size");
  intertwine->add_option("--reps", o.reps, "Replications");
  intertwine->add_option("--l2-lo", o.l2_lo, "L2 grid start");
  intertwine->add_option("--l2-hi", o.l2_hi, "L2 grid end");
  intertwine->add_option("--l2-m", o.l2_m, "L2 grid points");
  add_table(intertwine);
  add_common(intertwine);

  auto* copula = app.add_subcommand("copula-study", "Gumbel copula semiparametric joint density study");
  copula->add_option("--n-list", o.n_list, "Comma-separated sample sizes");
  copula->add_option("--reps", o.reps, "Replications per sample size");
  copula->add_option("--convention", o.convention, "n_plus_1 | n");
  copula->add_option("--grid-m", o.grid_m, "Points per axis of the L2 grid");
  add_table(copula);
  add_common(copula);

  auto* agreement = app.add_subcommand("agreement", "Fitness coefficient versus bootstrap p-values");
  agreement->add_option("--generators", o.generators, "Comma-separated: normal,t3,t5,t10,lognormal,chisq4");
  agreement->add_option("--n", o.n, "Sample size");
  agreement->add_option("--reps", o.reps, "Replications");
  agreement->add_option("--B", o.B, "Bootstrap replications");
  add_table(agreement);
  add_common(agreement);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }

  try {
    if (*fit) cmd_fit(o, out);
    else if (*fitness) cmd_fitness(o, out);
    else if (*gof) cmd_gof(o, out);
    else if (*sweep) cmd_sweep(o, out);
    else if (*intertwine) cmd_intertwine(o, out);
    else if (*copula) cmd_copula_study(o, out);
    else if (*agreement) cmd_agreement(o, out);
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fitcoef::cli
