#include "fitcoef/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace fitcoef {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

bool parse_number(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

}  // namespace

Eigen::MatrixXd read_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  std::size_t data_rows = 0;
  bool header_allowed = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const auto cells = split(body);
    std::vector<double> row(cells.size());
    std::size_t bad = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_number(cells[c], row[c]) && bad == 0) bad = c + 1;
    }
    if (bad != 0) {
      const bool looks_like_header = header_allowed && [&] {
        for (auto cell : cells) {
          double tmp;
          if (parse_number(cell, tmp)) return false;
        }
        return true;
      }();
      if (looks_like_header) {
        header_allowed = false;
        cols = cells.size();
        continue;
      }
      throw ParseError(line_no, bad, "not a number: '" + std::string(cells[bad - 1]) + "'");
    }
    header_allowed = false;
    if (cols == 0) cols = cells.size();
    if (cells.size() != cols)
      throw ParseError(line_no, std::min(cells.size(), cols) + 1,
                       "expected " + std::to_string(cols) + " columns, found " + std::to_string(cells.size()));
    values.insert(values.end(), row.begin(), row.end());
    ++data_rows;
  }
  if (data_rows == 0) throw ParseError(line_no == 0 ? 1 : line_no, 1, "no data rows");
  if (cols < 1 || cols > 2) throw ParseError(1, 1, "expected 1 or 2 columns, found " + std::to_string(cols));
  Eigen::MatrixXd sample(static_cast<Eigen::Index>(data_rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < data_rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      sample(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * cols + c];
    }
  }
  return sample;
}

Eigen::MatrixXd read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open '" + path.string() + "'");
  return read_csv(in);
}

Eigen::VectorXd wind_speed_data() {
  Eigen::VectorXd x(20);
  x << 70, 61, 61, 60, 61, 63, 61, 67, 61, 62, 47, 67, 61, 49, 55, 65, 57, 51, 47, 56;
  return x;
}

Eigen::MatrixXd load_dataset(std::string_view source) {
  constexpr std::string_view prefix = "builtin:";
  if (source.substr(0, prefix.size()) == prefix) {
    const auto name = source.substr(prefix.size());
    if (name == "wind") return wind_speed_data();
    throw InvalidParameter("unknown builtin dataset '" + std::string(name) + "'");
  }
  return read_csv(std::filesystem::path(source));
}

json to_json(const ExperimentReport& report) {
  json aggregates = json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"grid", a.grid},
                          {"estimator", a.estimator},
                          {"metric", a.metric},
                          {"mean", a.mean},
                          {"median", a.median},
                          {"count", a.count}});
  }
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back({r.replication, r.grid, r.estimator, r.metric, r.value});
  }
  json results = {{"aggregates", aggregates}, {"annotations", report.annotations}, {"records", records}};
  auto doc = make_document(report.command, report.config, report.seed, results);
  doc["schema_version"] = report.schema_version;
  return doc;
}

ExperimentReport report_from_json(const json& doc) {
  ExperimentReport report;
  report.schema_version = doc.at("schema_version").get<int>();
  if (report.schema_version != ExperimentReport::kSchemaVersion)
    throw InvalidParameter("unsupported report schema version " + std::to_string(report.schema_version));
  report.command = doc.at("command").get<std::string>();
  report.config = doc.at("config");
  report.seed = doc.at("seed").get<std::uint64_t>();
  const auto& results = doc.at("results");
  for (const auto& a : results.at("aggregates")) {
    report.aggregates.push_back({a.at("grid").get<double>(), a.at("estimator").get<std::string>(),
                                 a.at("metric").get<std::string>(), a.at("mean").get<double>(),
                                 a.at("median").get<double>(), a.at("count").get<std::size_t>()});
  }
  for (const auto& r : results.at("records")) {
    report.records.push_back({r.at(0).get<std::size_t>(), r.at(1).get<double>(), r.at(2).get<std::string>(),
                              r.at(3).get<std::string>(), r.at(4).get<double>()});
  }
  report.annotations = results.at("annotations");
  return report;
}

json make_document(const std::string& command, const json& config, std::uint64_t seed, const json& results,
                   const json& per_point) {
  json doc = {{"schema_version", ExperimentReport::kSchemaVersion},
              {"command", command},
              {"config", config},
              {"seed", seed},
              {"results", results}};
  if (!per_point.is_null()) doc["per_point"] = per_point;
  return doc;
}

std::string dump_document(const json& doc) { return doc.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot write '" + path.string() + "'");
  out << text;
}

json read_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open '" + path.string() + "'");
  return json::parse(in);
}

std::string report_table(const ExperimentReport& report) {
  std::ostringstream out;
  out << "grid,estimator,metric,mean,count\n";
  for (const auto& a : report.aggregates) {
    out << json(a.grid).dump() << ',' << a.estimator << ',' << a.metric << ',' << json(a.mean).dump() << ','
        << a.count << '\n';
  }
  return out.str();
}

}  // namespace fitcoef
