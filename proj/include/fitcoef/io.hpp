#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <json.hpp>

#include "fitcoef/experiments.hpp"

namespace fitcoef {

/// Parses a comma-separated file (LF or CRLF, optional single header row).
/// One column gives a univariate sample, two columns a bivariate one.
Eigen::MatrixXd read_csv(std::istream& in);
Eigen::MatrixXd read_csv(const std::filesystem::path& path);

/// Yearly maximum wind speeds (north direction, Sheridan, Wyoming, 1958-1977).
Eigen::VectorXd wind_speed_data();

/// Resolves "builtin:<name>" or a CSV path.
Eigen::MatrixXd load_dataset(std::string_view source);

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& doc);

/// The versioned output document shared by every command:
/// {schema_version, command, config, seed, results, per_point?}.
nlohmann::json make_document(const std::string& command, const nlohmann::json& config, std::uint64_t seed,
                             const nlohmann::json& results, const nlohmann::json& per_point = nullptr);

std::string dump_document(const nlohmann::json& doc);

void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_document(const std::filesystem::path& path);

/// Flat table: grid,estimator,metric,mean,count.
std::string report_table(const ExperimentReport& report);

}  // namespace fitcoef
