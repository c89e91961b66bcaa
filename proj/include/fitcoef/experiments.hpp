#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "fitcoef/copula.hpp"
#include "fitcoef/fitness.hpp"
#include "fitcoef/gof.hpp"
#include "fitcoef/models.hpp"

namespace fitcoef {

/// One retained per-replication value.
struct Record {
  std::size_t replication = 0;
  double grid = 0.0;
  std::string estimator;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const Record&, const Record&) = default;
};

/// Mean (and median) over replications of one (grid, estimator, metric) cell.
struct Aggregate {
  double grid = 0.0;
  std::string estimator;
  std::string metric;
  double mean = 0.0;
  double median = 0.0;
  std::size_t count = 0;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

struct ExperimentReport {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<Aggregate> aggregates;
  std::vector<Record> records;
  nlohmann::json annotations = nlohmann::json::object();

  /// First aggregate matching the key; throws std::out_of_range if absent.
  const Aggregate& at(const std::string& estimator, const std::string& metric, double grid) const;
  std::vector<Aggregate> select(const std::string& estimator, const std::string& metric) const;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Groups records by (grid, estimator, metric) in order of first appearance.
std::vector<Aggregate> aggregate_records(const std::vector<Record>& records);

/// Common knobs for the replication harnesses.
struct RunOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::size_t record_cap = 1'000'000;
};

/// Bandwidth sweep of the LR and OS coefficients (bandwidths as fractions of
/// the sample standard deviation). With `data` set the sweep runs once on it;
/// otherwise each replication draws n points from the generator.
struct SweepSpec {
  std::optional<Eigen::VectorXd> data;
  Family generator = Family::gumbel_paper;
  ParamVector generator_theta;
  Eigen::Index n = 400;
  std::size_t reps = 1;
  std::vector<double> h_fractions;
  Family model = Family::gumbel_paper;
  KernelSpec kernel{};
  RepairDensity q = RepairDensity::student_t_density(3, 0.0, 100.0);
  RunOptions run{};

  /// Bandwidth ticks from the literature, as fractions of s.
  static std::vector<std::pair<std::string, double>> reference_ticks();
};

ExperimentReport bandwidth_sweep(const SweepSpec& spec);

/// Setting 1: model N(theta, 1), truth N(0, (1+t)^2).
/// Setting 2: model N(0, theta^2), truth N(t, 1).
enum class Setting { setting1, setting2 };

struct IntertwineSpec {
  Setting setting = Setting::setting1;
  std::vector<double> t_grid;  // symmetric about 0, within [-0.5, 0.5]
  Eigen::Index n = 400;
  std::size_t reps = 100;
  Grid l2_grid{-8.0, 8.0, 2001};
  RunOptions run{};

  static std::vector<double> default_t_grid(std::size_t points = 21);
};

ExperimentReport intertwine_study(const IntertwineSpec& spec);

struct CopulaStudySpec {
  std::vector<Eigen::Index> n_list{200};
  std::size_t reps = 50;
  double xi = 3.0;
  Grid grid1{0.0, 3.0, 150};
  Grid grid2{0.0, 2.5, 150};
  PseudoConvention convention = PseudoConvention::n_plus_1;
  RunOptions run{};
};

/// Gumbel-copula data with E(2) and W(2, 1/2) margins; joint estimates with
/// nonparametric, exponential-parametric and LR-semiparametric margins.
ExperimentReport copula_study(const CopulaStudySpec& spec);

/// Data generators for the p-value / coefficient agreement study.
enum class Generator { normal, student_t3, student_t5, student_t10, lognormal, chi_square4 };

std::string_view to_string(Generator g);
Generator parse_generator(std::string_view name);
Eigen::VectorXd draw_generator(Generator g, Eigen::Index n, Rng& rng);

struct AgreementSpec {
  std::vector<Generator> generators{Generator::normal, Generator::student_t10, Generator::student_t5,
                                    Generator::student_t3, Generator::lognormal};
  Eigen::Index n = 409;
  std::size_t reps = 100;
  std::size_t B = 199;
  RunOptions run{};
};

/// Normal-model Cramer-von Mises bootstrap p-values against LR fitness
/// coefficients; replication r uses generator r mod |generators|.
ExperimentReport agreement_study(const AgreementSpec& spec);

/// Spearman rank correlation (average ranks for ties).
double spearman(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Cumulative trapezoid of `values` over [-t, t] for each t >= 0 in a grid
/// symmetric about zero. Returns (t, integral) pairs in ascending t.
std::vector<std::pair<double, double>> symmetric_cumulative_integral(const std::vector<double>& t_grid,
                                                                     const std::vector<double>& values);

}  // namespace fitcoef
