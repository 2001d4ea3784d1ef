#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace regularframe::scenario {

enum class Comparison { AtMost, AtLeast, Equal };

struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  Comparison cmp = Comparison::AtMost;
  bool pass = false;
};

/// Plot-ready series, written as CSV next to the report.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string kind;
  std::string name;
  nlohmann::ordered_json scenario;  // echo of the input
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  std::vector<Table> tables;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  std::string error;  // pipeline failure, recorded as a failed run
  std::vector<std::pair<std::string, Report>> children;  // suite entries

  void check(const std::string& name, double measured, double tolerance, Comparison cmp = Comparison::AtMost);
  bool pass() const;
  /// Everything except the timestamp, in a fixed key order.
  nlohmann::ordered_json to_json() const;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario's seed
};

/// Validates and runs one scenario. Throws SchemaError (or ConfigError) for
/// invalid input; solver failures are recorded in Report::error.
Report run(const nlohmann::json& scenario, const RunOptions& options = {});
Report run_file(const std::filesystem::path& file, const RunOptions& options = {});
/// Every *.json in `dir`, ordered by filename.
Report run_suite(const std::filesystem::path& dir, const RunOptions& options = {});

/// Report JSON plus a trailing "timestamp" field, pretty-printed.
std::string render(const Report& report, const std::string& timestamp);
std::string utc_timestamp();
void write_csv(const Table& table, const std::filesystem::path& path);

int exit_code(const Report& report);

}  // namespace regularframe::scenario
