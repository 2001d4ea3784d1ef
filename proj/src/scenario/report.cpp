#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pipelines.hpp"
#include "regularframe/scenario.hpp"

namespace regularframe::scenario {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const char* comparison_name(Comparison c) {
  switch (c) {
    case Comparison::AtMost: return "<=";
    case Comparison::AtLeast: return ">=";
    case Comparison::Equal: return "==";
  }
  return "?";
}

}  // namespace

void Report::check(const std::string& name, double measured, double tolerance, Comparison cmp) {
  bool ok = false;
  switch (cmp) {
    case Comparison::AtMost: ok = measured <= tolerance; break;
    case Comparison::AtLeast: ok = measured >= tolerance; break;
    case Comparison::Equal: ok = measured == tolerance; break;
  }
  checks.push_back({name, measured, tolerance, cmp, ok});
}

bool Report::pass() const {
  if (!error.empty()) return false;
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  for (const auto& [file, child] : children) {
    if (!child.pass()) return false;
  }
  return true;
}

ordered_json Report::to_json() const {
  ordered_json j;
  j["kind"] = kind;
  j["name"] = name;
  j["seed"] = seed;
  j["scenario"] = scenario;
  j["verdict"] = pass() ? "pass" : "fail";
  ordered_json cs = ordered_json::array();
  for (const auto& c : checks) {
    cs.push_back({{"name", c.name},
                  {"measured", c.measured},
                  {"comparison", comparison_name(c.cmp)},
                  {"tolerance", c.tolerance},
                  {"pass", c.pass}});
  }
  j["checks"] = cs;
  ordered_json ts = ordered_json::object();
  for (const auto& t : tables) ts[t.name] = {{"columns", t.columns}, {"rows", t.rows}};
  j["tables"] = ts;
  j["details"] = details;
  j["error"] = error.empty() ? ordered_json(nullptr) : ordered_json(error);
  if (kind == "suite") {
    ordered_json entries = ordered_json::array();
    for (const auto& [file, child] : children) entries.push_back({{"file", file}, {"report", child.to_json()}});
    j["entries"] = entries;
  }
  return j;
}

namespace {

Report run_inline_suite(const detail::Reader& r, const RunOptions& options) {
  r.allow({"kind", "name", "seed", "scenarios"});
  const auto& list = r.raw("scenarios");
  if (!list.is_array()) throw SchemaError(r.path("scenarios") + ": expected an array of scenarios");
  Report out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    Report child;
    try {
      child = run(list[i], options);
    } catch (const SchemaError& e) {
      throw SchemaError(r.path("scenarios") + "[" + std::to_string(i) + "]: " + e.what());
    }
    out.children.emplace_back(child.name.empty() ? "scenarios[" + std::to_string(i) + "]" : child.name, std::move(child));
  }
  return out;
}

}  // namespace

Report run(const json& scenario, const RunOptions& options) {
  const detail::Reader r(scenario, "");
  const std::string kind = r.string("kind");
  Report out;
  out.kind = kind;
  out.name = r.string("name", "");
  out.scenario = ordered_json::parse(scenario.dump());
  if (r.has("seed")) {
    const auto& s = r.raw("seed");
    if (!s.is_number_unsigned()) throw SchemaError("seed: expected a nonnegative integer");
    out.seed = s.get<std::uint64_t>();
  }
  if (options.seed) out.seed = *options.seed;

  if (kind == "suite") {
    auto suite = run_inline_suite(r, options);
    suite.kind = out.kind;
    suite.name = out.name;
    suite.scenario = out.scenario;
    suite.seed = out.seed;
    return suite;
  }
  using Pipeline = void (*)(const detail::Reader&, Report&);
  static const std::vector<std::pair<std::string, Pipeline>> table{
      {"chart", detail::run_chart},         {"interpolate", detail::run_interpolate},
      {"evolve", detail::run_evolve},       {"transport", detail::run_transport},
      {"shell", detail::run_shell},         {"fock", detail::run_fock}};
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == kind; });
  if (it == table.end()) {
    throw SchemaError("kind: unknown scenario kind '" + kind + "' (chart|interpolate|evolve|transport|shell|fock|suite)");
  }
  try {
    it->second(r, out);
  } catch (const SchemaError&) {
    throw;
  } catch (const ConfigError& e) {
    throw SchemaError(kind + ": " + e.what());
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

Report run_file(const std::filesystem::path& file, const RunOptions& options) {
  std::ifstream in(file);
  if (!in) throw SchemaError(file.string() + ": cannot open");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(file.string() + ": " + e.what());
  }
  try {
    return run(j, options);
  } catch (const SchemaError& e) {
    throw SchemaError(file.filename().string() + ": " + e.what());
  }
}

Report run_suite(const std::filesystem::path& dir, const RunOptions& options) {
  if (!std::filesystem::is_directory(dir)) throw SchemaError(dir.string() + ": not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  Report out;
  out.kind = "suite";
  out.name = dir.filename().string();
  out.scenario = {{"directory", dir.filename().string()}};
  if (options.seed) out.seed = *options.seed;
  for (const auto& f : files) out.children.emplace_back(f.filename().string(), run_file(f, options));
  return out;
}

std::string render(const Report& report, const std::string& timestamp) {
  auto j = report.to_json();
  j["timestamp"] = timestamp;
  return j.dump(2) + "\n";
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << "\n" << std::setprecision(17);
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

int exit_code(const Report& report) { return report.pass() ? 0 : 1; }

}  // namespace regularframe::scenario
