#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fitcoef/cli.hpp"
#include "fitcoef/io.hpp"

using namespace fitcoef;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::parse_and_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fitcoef_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("csv parsing") {
  std::istringstream a("1.0\n2.0\n3.0");
  const Eigen::MatrixXd m = read_csv(a);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 1);
  CHECK(m(2, 0) == 3.0);

  std::istringstream b("x,y\r\n1,2\r\n3,4\r\n");
  const Eigen::MatrixXd m2 = read_csv(b);
  CHECK(m2.rows() == 2);
  CHECK(m2.cols() == 2);
  CHECK(m2(1, 1) == 4.0);

  std::istringstream c("1.0\nabc");
  try {
    read_csv(c);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 1);
  }

  std::istringstream d("1,2\n3\n");
  CHECK_THROWS_AS(read_csv(d), ParseError);
  std::istringstream e("1,2,3\n4,5,6\n");
  CHECK_THROWS_AS(read_csv(e), ParseError);
  std::istringstream f("1,x\n");
  try {
    read_csv(f);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.line() == 1);
    CHECK(err.column() == 2);
  }
}

TEST_CASE("aggregates and report round trip") {
  std::vector<Record> recs{{0, 0.5, "lr", "alpha", 0.25}, {1, 0.5, "lr", "alpha", 0.75},
                           {0, 0.1, "os", "alpha", 1.0 / 3}, {2, 0.5, "lr", "alpha", 1.0}};
  const auto agg = aggregate_records(recs);
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].grid == 0.5);
  CHECK(agg[0].count == 3);
  CHECK(agg[0].mean == Approx(2.0 / 3));
  CHECK(agg[0].median == Approx(0.75));
  CHECK(agg[1].mean == Approx(1.0 / 3));

  ExperimentReport r;
  r.command = "sweep";
  r.config = {{"n", 3}};
  r.seed = 17;
  r.records = recs;
  r.aggregates = agg;
  r.annotations = {{"note", 0.1 + 0.2}};
  const auto doc = to_json(r);
  const ExperimentReport back = report_from_json(nlohmann::json::parse(dump_document(doc)));
  CHECK(back == r);
  CHECK(dump_document(to_json(back)) == dump_document(doc));
  CHECK(report_table(r).rfind("grid,estimator,metric,mean,count\n", 0) == 0);
}

TEST_CASE("symmetric cumulative integral and spearman") {
  const std::vector<double> t{-1, -0.5, 0, 0.5, 1};
  const std::vector<double> v{4, 1, 2, 1, 4};
  const auto c = symmetric_cumulative_integral(t, v);
  REQUIRE(c.size() == 3);
  CHECK(c[0].second == 0.0);
  CHECK(c[1].second == Approx(0.5 * 1.5 * 2));
  CHECK(c[2].second == Approx(4.0));
  CHECK(c[1].second <= c[2].second);

  Eigen::VectorXd x(5), y(5);
  x << 1, 2, 3, 4, 5;
  y << 10, 20, 30, 50, 40;
  CHECK(spearman(x, y) == Approx(0.9));
  CHECK(spearman(x, -x) == Approx(-1.0));
}

TEST_CASE("experiments are reproducible across thread counts") {
  SweepSpec sweep;
  sweep.generator = Family::gumbel_paper;
  sweep.generator_theta = gumbel_from_moments(59.1, 6.55);
  sweep.n = 80;
  sweep.reps = 4;
  sweep.h_fractions = {0.2, 0.5, 1.0};
  sweep.run.seed = 9;
  auto one = bandwidth_sweep(sweep);
  sweep.run.threads = 3;
  auto three = bandwidth_sweep(sweep);
  CHECK(dump_document(to_json(one)) == dump_document(to_json(three)));

  IntertwineSpec it;
  it.t_grid = {-0.5, 0.0, 0.5};
  it.n = 60;
  it.reps = 3;
  it.l2_grid = Grid{-8, 8, 401};
  it.run.seed = 4;
  const auto a = intertwine_study(it);
  it.run.threads = 4;
  const auto b = intertwine_study(it);
  CHECK(dump_document(to_json(a)) == dump_document(to_json(b)));
  for (const auto& agg : a.select("lr", "alpha")) CHECK(agg.count == 3);

  double sum = 0.0;
  std::size_t cnt = 0;
  for (const auto& r : a.records) {
    if (r.estimator == "lr_mix" && r.metric == "l2" && r.grid == 0.0) {
      sum += r.value;
      ++cnt;
    }
  }
  CHECK(a.at("lr_mix", "l2", 0.0).mean == Approx(sum / cnt).epsilon(1e-12));
  const auto integ = a.select("lr_mix", "integrated_l2");
  for (std::size_t k = 1; k < integ.size(); ++k) CHECK(integ[k].mean >= integ[k - 1].mean);

  AgreementSpec ag;
  ag.n = 50;
  ag.reps = 4;
  ag.B = 99;
  ag.run.seed = 3;
  const auto p = agreement_study(ag);
  ag.run.threads = 2;
  CHECK(dump_document(to_json(p)) == dump_document(to_json(agreement_study(ag))));

  CopulaStudySpec cs;
  cs.n_list = {40};
  cs.reps = 2;
  cs.grid1.m = cs.grid2.m = 30;
  cs.run.seed = 8;
  const auto c1 = copula_study(cs);
  cs.run.threads = 2;
  CHECK(dump_document(to_json(c1)) == dump_document(to_json(copula_study(cs))));
}

TEST_CASE("cli fit and fitness on the wind data") {
  const Run fit = run({"fit", "--data", "builtin:wind", "--model", "gumbel"});
  REQUIRE(fit.code == 0);
  const auto doc = nlohmann::json::parse(fit.out);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["command"] == "fit");
  CHECK(std::abs(doc["results"]["theta"][0].get<double>() - 62.1) <= 0.1);
  CHECK(std::abs(doc["results"]["theta"][1].get<double>() - 5.4) <= 0.1);

  const Run lr = run({"fitness", "--data", "builtin:wind", "--model", "gumbel", "--bandwidth", "silverman"});
  REQUIRE(lr.code == 0);
  const auto d2 = nlohmann::json::parse(lr.out);
  CHECK(d2["results"]["alpha"].get<double>() >= 0.9);
  CHECK(std::abs(d2["results"]["theta"][0].get<double>() - 62.1) <= 0.1);

  const Run os = run({"fitness", "--data", "builtin:wind", "--model", "gumbel", "--coefficient", "os", "--bandwidth",
                      "fixed:0.7sd", "--per-point"});
  REQUIRE(os.code == 0);
  const auto d3 = nlohmann::json::parse(os.out);
  CHECK(std::abs(d3["results"]["alpha"].get<double>() - 0.8) <= 0.1);
  CHECK(d3["per_point"]["x"].size() == 20);
}

TEST_CASE("cli errors and exit codes") {
  const fs::path neg = temp_path("negative.csv");
  write_text(neg, "value\n1.5\n-2.0\n3.0\n");
  const Run sv = run({"fit", "--data", neg.string(), "--model", "exponential"});
  CHECK(sv.code == 1);
  CHECK(sv.err.find("SupportViolation") != std::string::npos);

  const fs::path bad = temp_path("bad.csv");
  write_text(bad, "1.0\nabc\n");
  const Run pe = run({"fit", "--data", bad.string()});
  CHECK(pe.code == 1);
  CHECK(pe.err.find("line 2") != std::string::npos);

  const fs::path flat = temp_path("flat.csv");
  write_text(flat, "5\n5\n5\n");
  const Run ds = run({"fitness", "--data", flat.string()});
  CHECK(ds.code == 1);
  CHECK(ds.err.find("DegenerateSample") != std::string::npos);

  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"fit"}).code == 2);
  CHECK(run({"fitness", "--data", "builtin:wind", "--bandwidth", "wide"}).code == 2);
  CHECK(run({"fitness", "--data", "builtin:wind", "--model", "cauchy"}).code == 2);
  CHECK(run({"gof", "--data", "builtin:wind"}).code == 2);
  CHECK(run({"intertwine", "--reps", "2"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("bandwidth flag grammar") {
  CHECK(cli::parse_bandwidth_flag("silverman").rule.kind == BandwidthRule::Kind::silverman_robust);
  CHECK(cli::parse_bandwidth_flag("silverman-normal").rule.kind == BandwidthRule::Kind::silverman_normal);
  const auto f = cli::parse_bandwidth_flag("fixed:2.5");
  CHECK(f.rule.kind == BandwidthRule::Kind::fixed);
  CHECK(f.rule.h == 2.5);
  CHECK(cli::parse_bandwidth_flag("fixed:0.7sd").sd_fraction == 0.7);
  CHECK_THROWS(cli::parse_bandwidth_flag("fixed:-1"));
  CHECK_THROWS(cli::parse_bandwidth_flag("fixed:sd"));
  CHECK_THROWS(cli::parse_bandwidth_flag("scott"));
}

TEST_CASE("cli reports are byte identical and round trip") {
  const fs::path a = temp_path("sweep_a.json");
  const fs::path b = temp_path("sweep_b.json");
  const std::vector<std::string> base{"sweep", "--generator", "normal", "--n", "60", "--reps", "3", "--seed", "21",
                                      "--h-grid", "0.2,0.6,1.0"};
  auto args = base;
  args.insert(args.end(), {"--out", a.string(), "--threads", "1"});
  REQUIRE(run(args).code == 0);
  args = base;
  args.insert(args.end(), {"--out", b.string(), "--threads", "3"});
  REQUIRE(run(args).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a.string().substr(0, a.string().size() - 5) + ".csv") ==
        slurp(b.string().substr(0, b.string().size() - 5) + ".csv"));

  const auto doc = read_document(a);
  const ExperimentReport rep = report_from_json(doc);
  CHECK(dump_document(to_json(rep)) == slurp(a));

  const fs::path g1 = temp_path("gof1.json");
  const fs::path g2 = temp_path("gof2.json");
  REQUIRE(run({"gof", "--data", "builtin:wind", "--model", "gumbel", "--B", "99", "--seed", "5", "--out",
               g1.string()})
              .code == 0);
  REQUIRE(run({"gof", "--data", "builtin:wind", "--model", "gumbel", "--B", "99", "--seed", "5", "--threads", "2",
               "--out", g2.string()})
              .code == 0);
  CHECK(slurp(g1) == slurp(g2));
}
