#pragma once

#include <cmath>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "regularframe/errors.hpp"
#include "regularframe/kg.hpp"
#include "regularframe/metric.hpp"

namespace regularframe::scenario::detail {

using nlohmann::json;

/// Typed access to one JSON object; every error names the offending key path.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw SchemaError(where_ + ": expected an object");
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void allow(std::initializer_list<const char*> keys) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) throw SchemaError(path(it.key()) + ": unknown key");
    }
  }

  const json& raw(const std::string& key) const {
    if (!has(key)) throw SchemaError(path(key) + ": required");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      throw SchemaError(path(key) + ": required");
    }
    const auto& v = j_.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) throw SchemaError(path(key) + ": expected a finite number");
    return v.get<double>();
  }

  int integer(const std::string& key, std::optional<int> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      throw SchemaError(path(key) + ": required");
    }
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw SchemaError(path(key) + ": expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool def) const {
    if (!has(key)) return def;
    if (!j_.at(key).is_boolean()) throw SchemaError(path(key) + ": expected true or false");
    return j_.at(key).get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) const {
    if (!has(key)) {
      if (def) return *def;
      throw SchemaError(path(key) + ": required");
    }
    if (!j_.at(key).is_string()) throw SchemaError(path(key) + ": expected a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::size_t lo, std::size_t hi) const {
    const auto& v = raw(key);
    if (!v.is_array() || v.size() < lo || v.size() > hi) {
      throw SchemaError(path(key) + ": expected an array of " + std::to_string(lo) +
                        (lo == hi ? "" : "-" + std::to_string(hi)) + " numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw SchemaError(path(key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key) const {
    const auto& v = raw(key);
    if (!v.is_array()) throw SchemaError(path(key) + ": expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) throw SchemaError(path(key) + "[" + std::to_string(i) + "]: expected an integer");
      out.push_back(v[i].get<int>());
    }
    return out;
  }

  Reader child(const std::string& key) const { return Reader(raw(key), path(key)); }
  const json& value() const { return j_; }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
};

/// Named tolerances with defaults; the scenario may override any of them.
class Tolerances {
 public:
  Tolerances(std::map<std::string, double> defaults, const Reader& scenario) : values_(std::move(defaults)) {
    if (!scenario.has("tolerances")) return;
    const auto& t = scenario.raw("tolerances");
    const std::string where = scenario.path("tolerances");
    if (!t.is_object()) throw SchemaError(where + ": expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!values_.count(it.key())) throw SchemaError(where + "." + it.key() + ": unknown tolerance");
      if (!it->is_number() || !(it->get<double>() > 0.0) || !std::isfinite(it->get<double>())) {
        throw SchemaError(where + "." + it.key() + ": tolerance must be a positive number");
      }
      values_[it.key()] = it->get<double>();
    }
  }
  double operator[](const std::string& key) const { return values_.at(key); }

 private:
  std::map<std::string, double> values_;
};

inline kg::GridSpec grid_from(const Reader& r, kg::GridSpec def = {}) {
  kg::GridSpec g = def;
  if (!r.has("grid")) return g;
  const auto gr = r.child("grid");
  gr.allow({"n", "L", "dim", "dt", "cfl"});
  g.n = gr.integer("n", g.n);
  g.half_width = gr.number("L", g.half_width);
  g.dim = gr.integer("dim", g.dim);
  g.dt = gr.number("dt", g.dt);
  g.cfl = gr.number("cfl", g.cfl);
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw SchemaError(r.path("grid") + ": " + e.what());
  }
  return g;
}

inline nlohmann::ordered_json grid_json(const kg::GridSpec& g) {
  return {{"n", g.n}, {"L", g.half_width}, {"dim", g.dim}, {"dt", g.dt}, {"cfl", g.cfl}};
}

inline MetricPtr metric_from(const Reader& r, const std::string& key, std::optional<std::string> def) {
  if (!r.has(key)) {
    if (!def) throw SchemaError(r.path(key) + ": required");
    return metric_from_json(json(*def), r.path(key));
  }
  return metric_from_json(r.raw(key), r.path(key));
}

}  // namespace regularframe::scenario::detail
