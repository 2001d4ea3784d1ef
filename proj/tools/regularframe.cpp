#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "regularframe/errors.hpp"
#include "regularframe/parallel.hpp"
#include "regularframe/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regularframe;

namespace {

// "@file", inline JSON, or a bare word taken as a string.
json json_arg(const std::string& flag, const std::string& text) {
  if (!text.empty() && text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw SchemaError(flag + ": cannot open " + text.substr(1));
    try {
      return json::parse(in);
    } catch (const json::parse_error& e) {
      throw SchemaError(flag + ": " + e.what());
    }
  }
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) return json(text);
  return j;
}

// Inline JSON or "n=256,L=16,dim=1".
json grid_arg(const std::string& text) {
  auto j = json::parse(text, nullptr, false);
  if (!j.is_discarded() && j.is_object()) return j;
  json out = json::object();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw SchemaError("--grid: expected key=value pairs, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    auto v = json::parse(value, nullptr, false);
    if (v.is_discarded() || !v.is_number()) throw SchemaError("--grid." + key + ": expected a number");
    out[key] = v;
  }
  return out;
}

json list_arg(const std::string& flag, const std::string& text) {
  auto j = json::parse(text, nullptr, false);
  if (!j.is_discarded() && j.is_array()) return j;
  json out = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto v = json::parse(item, nullptr, false);
    if (v.is_discarded()) throw SchemaError(flag + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  return out;
}

json load_scenario(const std::string& path, const std::string& kind) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw SchemaError("--scenario: cannot open " + path);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw SchemaError(path + ": " + e.what());
    }
    if (!j.is_object()) throw SchemaError(path + ": expected an object");
  }
  if (j.contains("kind") && j["kind"] != kind) throw SchemaError("kind: scenario is '" + j["kind"].dump() + "', expected " + kind);
  j["kind"] = kind;
  return j;
}

void emit(const scenario::Report& report, const std::string& out) {
  const std::string text = scenario::render(report, scenario::utc_timestamp());
  if (out.empty()) {
    std::cout << text;
    return;
  }
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + out);
  f << text;
  const fs::path stem = path.parent_path() / path.stem();
  for (const auto& t : report.tables) scenario::write_csv(t, stem.string() + "_" + t.name + ".csv");
  for (const auto& [file, child] : report.children) {
    const std::string base = fs::path(file).stem().string();
    for (const auto& t : child.tables) scenario::write_csv(t, stem.string() + "_" + base + "_" + t.name + ".csv");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification lab for regular charts, metric interpolation, Klein-Gordon transport and free Fock spaces"};
  app.require_subcommand(1);
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--out", out, "report path (JSON); CSV series are written next to it");
  app.add_option("--seed", seed, "seed for randomized property checks (overrides the scenario)");
  app.add_option("--threads", threads, "worker threads (default: REGULARFRAME_THREADS or 1)")->check(CLI::NonNegativeNumber);

  // run / suite
  std::string run_file;
  auto* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("file", run_file, "scenario JSON")->required();
  std::string suite_dir = "scenarios";
  auto* suite = app.add_subcommand("suite", "run every scenario in a directory, ordered by filename");
  suite->add_option("dir", suite_dir, "scenario directory");

  // per-kind subcommands: a scenario file plus flag overrides
  struct Common {
    std::string scenario, metric, grid, refine;
    std::optional<double> t1, t2, m;
  };
  Common chart_o, interp_o, evolve_o, transport_o;

  auto* chart = app.add_subcommand("chart", "build a regular chart and optionally cover a box");
  chart->add_option("--scenario", chart_o.scenario);
  chart->add_option("--metric", chart_o.metric, "family name, inline JSON or @file");
  std::string center, cover;
  std::optional<double> r_cap;
  std::optional<int> chart_lattice;
  chart->add_option("--center", center, "t,x,y,z");
  chart->add_option("--rcap,--r-cap", r_cap);
  chart->add_option("--lattice", chart_lattice, "points per axis of the pulled-metric lattice");
  chart->add_option("--cover", cover, "side length of a centered box to cover");

  auto* interpolate = app.add_subcommand("interpolate", "verify the interpolating metric on a lattice");
  interpolate->add_option("--scenario", interp_o.scenario);
  interpolate->add_option("--metric", interp_o.metric);
  interpolate->add_option("--t1", interp_o.t1);
  interpolate->add_option("--t2", interp_o.t2);

  auto* evolve = app.add_subcommand("evolve", "evolve a packet and track the inner product");
  evolve->add_option("--scenario", evolve_o.scenario);
  evolve->add_option("--metric", evolve_o.metric);
  evolve->add_option("--grid", evolve_o.grid, "JSON or n=..,L=..,dim=..,cfl=..,dt=..");
  evolve->add_option("--m", evolve_o.m);
  evolve->add_option("--refine", evolve_o.refine, "e.g. 64,128,256");
  std::string packet;
  std::optional<double> t_end;
  evolve->add_option("--packet", packet, "packet JSON or @file");
  evolve->add_option("--t-end", t_end);

  auto* transport = app.add_subcommand("transport", "transport a packet basis through the interpolation window");
  transport->add_option("--scenario", transport_o.scenario);
  transport->add_option("--metric", transport_o.metric);
  transport->add_option("--t1", transport_o.t1);
  transport->add_option("--t2", transport_o.t2);
  transport->add_option("--m", transport_o.m);
  transport->add_option("--grid", transport_o.grid);
  transport->add_option("--refine", transport_o.refine);
  std::string basis;
  transport->add_option("--basis", basis, "packet list or {\"k\":..} family, JSON or @file");

  auto* shell = app.add_subcommand("shell", "mass-shell measures and the J/K chain");
  std::string shell_scenario;
  std::optional<double> ball, shell_m;
  bool chain = false;
  shell->add_option("--scenario", shell_scenario);
  shell->add_option("--ball", ball, "ball radius");
  shell->add_option("--m", shell_m);
  shell->add_flag("--chain", chain, "norm chain on random lattice vectors");

  auto* fock = app.add_subcommand("fock", "truncated Fock-space algebra checks");
  std::string fock_scenario, system, modes, checks;
  std::optional<int> cutoff;
  fock->add_option("--scenario", fock_scenario);
  fock->add_option("--system", system, "particle system JSON or @file");
  fock->add_option("--modes", modes, "mode count or list of momenta");
  fock->add_option("--cutoff", cutoff);
  fock->add_option("--check", checks, "comma list of ccr,gamma,spectrum,registry,hamiltonian");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (threads > 0) set_thread_count(threads);

  try {
    scenario::RunOptions options{seed};
    scenario::Report report;
    auto overlay = [](json& j, const Common& o) {
      if (!o.metric.empty()) j["metric"] = json_arg("--metric", o.metric);
      if (!o.grid.empty()) j["grid"] = grid_arg(o.grid);
      if (!o.refine.empty()) j["refine"] = list_arg("--refine", o.refine);
      if (o.m) j["m"] = *o.m;
      if (o.t1 || o.t2) {
        if (!j.contains("window")) j["window"] = {{"t1", 1.0}, {"t2", 3.0}};
        if (o.t1) j["window"]["t1"] = *o.t1;
        if (o.t2) j["window"]["t2"] = *o.t2;
      }
    };
    if (*run) {
      report = scenario::run_file(run_file, options);
    } else if (*suite) {
      report = scenario::run_suite(suite_dir, options);
    } else if (*chart) {
      json j = load_scenario(chart_o.scenario, "chart");
      overlay(j, chart_o);
      if (!center.empty()) j["center"] = list_arg("--center", center);
      if (r_cap) j["config"]["r_cap"] = *r_cap;
      if (chart_lattice) j["lattice"]["n"] = *chart_lattice;
      if (!cover.empty()) {
        const double s = std::stod(cover) / 2.0;
        j["cover"] = {{"lo", {-s, -s, -s, -s}}, {"hi", {s, s, s, s}}};
      }
      report = scenario::run(j, options);
    } else if (*interpolate) {
      json j = load_scenario(interp_o.scenario, "interpolate");
      if (!j.contains("window")) j["window"] = {{"t1", 1.0}, {"t2", 3.0}};
      overlay(j, interp_o);
      report = scenario::run(j, options);
    } else if (*evolve) {
      json j = load_scenario(evolve_o.scenario, "evolve");
      overlay(j, evolve_o);
      if (!packet.empty()) j["packet"] = json_arg("--packet", packet);
      if (!j.contains("packet")) j["packet"] = {{"center", 0.0}, {"width", 1.0}, {"p0", 1.0}};
      if (t_end) j["t_end"] = *t_end;
      if (!j.contains("t_end")) j["t_end"] = 2.0;
      report = scenario::run(j, options);
    } else if (*transport) {
      json j = load_scenario(transport_o.scenario, "transport");
      if (!j.contains("window")) j["window"] = {{"t1", 1.0}, {"t2", 3.0}};
      overlay(j, transport_o);
      if (!j.contains("metric")) j["metric"] = "minkowski";
      if (!basis.empty()) j["basis"] = json_arg("--basis", basis);
      if (!j.contains("basis")) j["basis"] = {{"k", 5}};
      report = scenario::run(j, options);
    } else if (*shell) {
      json j = load_scenario(shell_scenario, "shell");
      if (ball) j["ball"] = json::array({{{"radius", *ball}, {"m", shell_m.value_or(0.0)}}});
      if (chain) j["chain"] = json::object();
      if (!j.contains("ball") && !j.contains("box") && !j.contains("chain")) j["chain"] = json::object();
      report = scenario::run(j, options);
    } else if (*fock) {
      json j = load_scenario(fock_scenario, "fock");
      if (!system.empty()) j["system"] = json_arg("--system", system);
      if (!modes.empty()) j["modes"] = json_arg("--modes", modes);
      if (cutoff) j["cutoff"] = *cutoff;
      if (!checks.empty()) {
        json list = json::array();
        std::stringstream ss(checks);
        std::string item;
        while (std::getline(ss, item, ',')) list.push_back(item);
        j["checks"] = list;
      }
      report = scenario::run(j, options);
    }
    emit(report, out);
    return scenario::exit_code(report);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
