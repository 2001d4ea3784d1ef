#include "regularframe/metric.hpp"

#include <cmath>

#include "regularframe/errors.hpp"

namespace regularframe {

using nlohmann::json;
using nlohmann::ordered_json;

bool SpacetimePoint::finite() const {
  return std::isfinite(t) && std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

bool ValidityRegion::contains(const SpacetimePoint& p) const {
  if (p.t < t_min || p.t > t_max) return false;
  for (double c : p.x) {
    if (c < x_min || c > x_max) return false;
  }
  return true;
}

bool ValidityRegion::bounded() const {
  return std::isfinite(t_min) || std::isfinite(t_max) || std::isfinite(x_min) ||
         std::isfinite(x_max);
}

Mat4 minkowski_matrix() { return Vec4(-1.0, 1.0, 1.0, 1.0).asDiagonal(); }

Mat4 MetricField::evaluate(const SpacetimePoint& p) const {
  if (!p.finite()) throw EvaluationError("non-finite spacetime point");
  if (!validity_.contains(p)) {
    throw DomainExitError("point (" + std::to_string(p.t) + ", " + std::to_string(p.x[0]) +
                          ", " + std::to_string(p.x[1]) + ", " + std::to_string(p.x[2]) +
                          ") outside validity region of " + family());
  }
  const Mat4 g = raw(p);
  if (!g.allFinite()) throw EvaluationError(family() + " metric has non-finite entries");
  const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (asym > 1e-14 * scale) {
    throw EvaluationError(family() + " metric is not symmetric (defect " + std::to_string(asym) +
                          ")");
  }
  return 0.5 * (g + g.transpose());
}

std::array<Mat4, 4> MetricField::derivative(const SpacetimePoint& p, double fd_step) const {
  if (has_analytic_derivative()) {
    if (!validity_.contains(p)) throw DomainExitError("derivative outside validity region");
    return raw_derivative(p);
  }
  std::array<Mat4, 4> d;
  const Vec4 base = p.as_vector();
  for (int mu = 0; mu < 4; ++mu) {
    Vec4 hi = base;
    Vec4 lo = base;
    hi[mu] += fd_step;
    lo[mu] -= fd_step;
    d[mu] = (evaluate(SpacetimePoint::from_vector(hi)) - evaluate(SpacetimePoint::from_vector(lo))) /
            (2.0 * fd_step);
  }
  return d;
}

std::array<Mat4, 4> MetricField::raw_derivative(const SpacetimePoint&) const {
  throw ConfigError(family() + " has no analytic derivative");
}

namespace {

class Minkowski final : public MetricField {
 public:
  std::string family() const override { return "minkowski"; }
  ordered_json to_json() const override { return {{"family", "minkowski"}, {"params", json::object()}}; }
  bool has_analytic_derivative() const override { return true; }
  bool is_static() const override { return true; }
  bool is_flat() const override { return true; }

 protected:
  Mat4 raw(const SpacetimePoint&) const override { return minkowski_matrix(); }
  std::array<Mat4, 4> raw_derivative(const SpacetimePoint&) const override {
    return {Mat4::Zero(), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
  }
};

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

class DiagPoly final : public MetricField {
 public:
  explicit DiagPoly(DiagPolyParams p) : p_(std::move(p)) {
    static_ = true;
    flat_ = true;
    for (const auto& entry : p_.diag) {
      for (const auto& term : entry) {
        if (term.pt < 0 || term.px < 0) throw ConfigError("diag_poly: negative power");
        if (term.coef != 0.0 && term.pt > 0) static_ = false;
        if (term.coef != 0.0 && (term.pt > 0 || term.px > 0)) flat_ = false;
      }
    }
  }

  std::string family() const override { return "diag_poly"; }
  ordered_json to_json() const override {
    ordered_json params = ordered_json::object();
    const char* names[4] = {"g00", "g11", "g22", "g33"};
    for (int mu = 0; mu < 4; ++mu) {
      ordered_json terms = ordered_json::array();
      for (const auto& t : p_.diag[mu]) terms.push_back({t.coef, t.pt, t.px});
      params[names[mu]] = terms;
    }
    return {{"family", "diag_poly"}, {"params", params}};
  }
  bool has_analytic_derivative() const override { return true; }
  bool is_static() const override { return static_; }
  bool is_flat() const override { return flat_; }

 protected:
  Mat4 raw(const SpacetimePoint& p) const override {
    Mat4 g = minkowski_matrix();
    for (int mu = 0; mu < 4; ++mu) {
      if (p_.diag[mu].empty()) continue;
      double v = 0.0;
      for (const auto& term : p_.diag[mu]) v += term.coef * ipow(p.t, term.pt) * ipow(p.x[0], term.px);
      g(mu, mu) = v;
    }
    return g;
  }

  std::array<Mat4, 4> raw_derivative(const SpacetimePoint& p) const override {
    std::array<Mat4, 4> d{Mat4::Zero(), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
    for (int mu = 0; mu < 4; ++mu) {
      for (const auto& term : p_.diag[mu]) {
        if (term.pt > 0) {
          d[0](mu, mu) += term.coef * term.pt * ipow(p.t, term.pt - 1) * ipow(p.x[0], term.px);
        }
        if (term.px > 0) {
          d[1](mu, mu) += term.coef * term.px * ipow(p.t, term.pt) * ipow(p.x[0], term.px - 1);
        }
      }
    }
    return d;
  }

 private:
  DiagPolyParams p_;
  bool static_ = true;
  bool flat_ = true;
};

class Frw final : public MetricField {
 public:
  explicit Frw(FrwParams p) : p_(p) {
    if (!(p_.tau > 0.0)) throw ConfigError("frw: tau must be positive");
  }

  std::string family() const override { return "frw"; }
  ordered_json to_json() const override {
    const char* shape = p_.shape == FrwShape::Tanh ? "tanh" : p_.shape == FrwShape::Sin ? "sin" : "gauss";
    return {{"family", "frw"},
            {"params", {{"eps", p_.eps}, {"shape", shape}, {"t0", p_.t0}, {"tau", p_.tau}}}};
  }
  bool has_analytic_derivative() const override { return true; }
  bool is_static() const override { return p_.eps == 0.0; }
  bool is_flat() const override { return p_.eps == 0.0; }

 protected:
  Mat4 raw(const SpacetimePoint& p) const override {
    const double a = p_.scale(p.t);
    return Vec4(-1.0, a * a, a * a, a * a).asDiagonal();
  }

  std::array<Mat4, 4> raw_derivative(const SpacetimePoint& p) const override {
    const double a = p_.scale(p.t);
    const double da2 = 2.0 * a * p_.scale_rate(p.t);
    return {Mat4(Vec4(0.0, da2, da2, da2).asDiagonal()), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
  }

 private:
  FrwParams p_;
};

class WeakField final : public MetricField {
 public:
  explicit WeakField(WeakFieldParams p) : p_(p) {
    if (!(p_.width > 0.0)) throw ConfigError("weakfield: width must be positive");
  }

  std::string family() const override { return "weakfield"; }
  ordered_json to_json() const override {
    return {{"family", "weakfield"},
            {"params",
             {{"amplitude", p_.amplitude},
              {"width", p_.width},
              {"center", {p_.center[0], p_.center[1], p_.center[2]}}}}};
  }
  bool has_analytic_derivative() const override { return true; }
  bool is_static() const override { return true; }
  bool is_flat() const override { return p_.amplitude == 0.0; }

 protected:
  double potential(const SpacetimePoint& p, double& r2) const {
    r2 = 0.0;
    for (int i = 0; i < 3; ++i) r2 += (p.x[i] - p_.center[i]) * (p.x[i] - p_.center[i]);
    return -p_.amplitude * std::exp(-r2 / (p_.width * p_.width));
  }

  Mat4 raw(const SpacetimePoint& p) const override {
    double r2 = 0.0;
    const double phi = potential(p, r2);
    return Vec4(-(1.0 + 2.0 * phi), 1.0 - 2.0 * phi, 1.0 - 2.0 * phi, 1.0 - 2.0 * phi).asDiagonal();
  }

  std::array<Mat4, 4> raw_derivative(const SpacetimePoint& p) const override {
    double r2 = 0.0;
    const double phi = potential(p, r2);
    std::array<Mat4, 4> d{Mat4::Zero(), Mat4::Zero(), Mat4::Zero(), Mat4::Zero()};
    for (int i = 0; i < 3; ++i) {
      const double dphi = phi * (-2.0 * (p.x[i] - p_.center[i]) / (p_.width * p_.width));
      d[i + 1] = Vec4(-2.0 * dphi, -2.0 * dphi, -2.0 * dphi, -2.0 * dphi).asDiagonal();
    }
    return d;
  }

 private:
  WeakFieldParams p_;
};

// JSON helpers that report the full key path on failure.

double number_at(const json& obj, const std::string& key, const std::string& where, double fallback,
                 bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw SchemaError(where + "." + key + ": missing required number");
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw SchemaError(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::vector<PolyTerm> parse_poly(const json& v, const std::string& where) {
  std::vector<PolyTerm> terms;
  if (v.is_number()) {
    terms.push_back({v.get<double>(), 0, 0});
    return terms;
  }
  if (!v.is_array()) throw SchemaError(where + ": expected number or array of coefficients");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& e = v[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (e.is_number()) {
      // Plain coefficient list: ascending powers of t.
      terms.push_back({e.get<double>(), static_cast<int>(i), 0});
    } else if (e.is_array() && e.size() == 3 && e[0].is_number() && e[1].is_number_integer() &&
               e[2].is_number_integer()) {
      terms.push_back({e[0].get<double>(), e[1].get<int>(), e[2].get<int>()});
    } else {
      throw SchemaError(at + ": expected a coefficient or a [coef, power_t, power_x1] triple");
    }
    if (terms.back().pt < 0 || terms.back().px < 0) throw SchemaError(at + ": negative power");
  }
  return terms;
}

}  // namespace

double FrwParams::scale(double t) const {
  const double u = (t - t0) / tau;
  switch (shape) {
    case FrwShape::Tanh: return 1.0 + eps * std::tanh(u);
    case FrwShape::Sin: return 1.0 + eps * std::sin(u);
    case FrwShape::Gauss: return 1.0 + eps * std::exp(-u * u);
  }
  return 1.0;
}

double FrwParams::scale_rate(double t) const {
  const double u = (t - t0) / tau;
  switch (shape) {
    case FrwShape::Tanh: {
      const double c = std::cosh(u);
      return eps / (tau * c * c);
    }
    case FrwShape::Sin: return eps * std::cos(u) / tau;
    case FrwShape::Gauss: return eps * (-2.0 * u) * std::exp(-u * u) / tau;
  }
  return 0.0;
}

MetricPtr make_minkowski() { return std::make_shared<Minkowski>(); }
MetricPtr make_diag_poly(DiagPolyParams params) { return std::make_shared<DiagPoly>(std::move(params)); }
MetricPtr make_frw(FrwParams params) { return std::make_shared<Frw>(params); }
MetricPtr make_weakfield(WeakFieldParams params) { return std::make_shared<WeakField>(params); }

MetricPtr make_constant_diagonal(double d0, double d1, double d2, double d3) {
  DiagPolyParams p;
  const double d[4] = {d0, d1, d2, d3};
  for (int mu = 0; mu < 4; ++mu) p.diag[mu] = {{d[mu], 0, 0}};
  return make_diag_poly(std::move(p));
}

MetricPtr metric_from_json(const json& j, const std::string& where) {
  if (j.is_string()) return metric_from_json(json{{"family", j.get<std::string>()}}, where);
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  if (!j.contains("family") || !j.at("family").is_string()) {
    throw SchemaError(where + ".family: missing or not a string");
  }
  const std::string family = j.at("family").get<std::string>();
  const json params = j.contains("params") ? j.at("params") : json::object();
  const std::string pw = where + ".params";
  if (!params.is_object()) throw SchemaError(pw + ": expected an object");

  std::shared_ptr<MetricField> metric;
  if (family == "minkowski") {
    metric = std::make_shared<Minkowski>();
  } else if (family == "diag_poly") {
    DiagPolyParams p;
    const char* names[4] = {"g00", "g11", "g22", "g33"};
    for (int mu = 0; mu < 4; ++mu) {
      if (params.contains(names[mu])) p.diag[mu] = parse_poly(params.at(names[mu]), pw + "." + names[mu]);
    }
    metric = std::make_shared<DiagPoly>(std::move(p));
  } else if (family == "frw") {
    FrwParams p;
    p.eps = number_at(params, "eps", pw, 0.0, true);
    p.t0 = number_at(params, "t0", pw, 0.0);
    p.tau = number_at(params, "tau", pw, 1.0);
    if (!(p.tau > 0.0)) throw SchemaError(pw + ".tau: must be positive");
    if (params.contains("shape")) {
      const auto& s = params.at("shape");
      if (!s.is_string()) throw SchemaError(pw + ".shape: expected a string");
      const auto name = s.get<std::string>();
      if (name == "tanh") p.shape = FrwShape::Tanh;
      else if (name == "sin") p.shape = FrwShape::Sin;
      else if (name == "gauss") p.shape = FrwShape::Gauss;
      else throw SchemaError(pw + ".shape: unknown shape '" + name + "' (tanh|sin|gauss)");
    }
    metric = std::make_shared<Frw>(p);
  } else if (family == "weakfield") {
    WeakFieldParams p;
    p.amplitude = number_at(params, "amplitude", pw, 0.0, true);
    p.width = number_at(params, "width", pw, 1.0);
    if (!(p.width > 0.0)) throw SchemaError(pw + ".width: must be positive");
    if (params.contains("center")) {
      const auto& c = params.at("center");
      if (!c.is_array() || c.size() != 3) throw SchemaError(pw + ".center: expected 3 numbers");
      for (int i = 0; i < 3; ++i) {
        if (!c[i].is_number()) throw SchemaError(pw + ".center: expected 3 numbers");
        p.center[i] = c[i].get<double>();
      }
    }
    metric = std::make_shared<WeakField>(p);
  } else {
    throw SchemaError(where + ".family: unknown metric family '" + family +
                      "' (minkowski|diag_poly|frw|weakfield)");
  }

  if (j.contains("validity")) {
    const auto& v = j.at("validity");
    const std::string vw = where + ".validity";
    if (!v.is_object()) throw SchemaError(vw + ": expected an object");
    ValidityRegion region;
    auto range = [&](const char* key, double& lo, double& hi) {
      if (!v.contains(key)) return;
      const auto& r = v.at(key);
      if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
        throw SchemaError(vw + "." + key + ": expected [lo, hi]");
      }
      lo = r[0].get<double>();
      hi = r[1].get<double>();
      if (!(lo < hi)) throw SchemaError(vw + "." + key + ": lo must be below hi");
    };
    range("t", region.t_min, region.t_max);
    range("x", region.x_min, region.x_max);
    metric->set_validity(region);
  }
  return metric;
}

}  // namespace regularframe
