#include <algorithm>
#include <cmath>
#include <set>

#include "pipelines.hpp"
#include "regularframe/fock.hpp"
#include "regularframe/rng.hpp"

namespace regularframe::scenario::detail {

using nlohmann::ordered_json;

namespace {

std::vector<Vec3> momenta_from(const Reader& r) {
  if (!r.has("modes")) return {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)};
  const auto& v = r.raw("modes");
  std::vector<Vec3> out;
  if (v.is_number_integer()) {
    const int k = v.get<int>();
    if (k < 1) throw SchemaError(r.path("modes") + ": needs at least one mode");
    for (int i = 0; i < k; ++i) out.emplace_back(i, 0.0, 0.0);
    return out;
  }
  if (!v.is_array() || v.empty()) throw SchemaError(r.path("modes") + ": expected a mode count or a list of momenta");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string w = r.path("modes") + "[" + std::to_string(i) + "]";
    Vec3 p = Vec3::Zero();
    if (v[i].is_number()) {
      p[0] = v[i].get<double>();
    } else if (v[i].is_array() && !v[i].empty() && v[i].size() <= 3) {
      for (std::size_t a = 0; a < v[i].size(); ++a) {
        if (!v[i][a].is_number()) throw SchemaError(w + ": expected numbers");
        p[a] = v[i][a].get<double>();
      }
    } else {
      throw SchemaError(w + ": expected a number or 1-3 numbers");
    }
    out.push_back(p);
  }
  return out;
}

// Block-diagonal Haar unitary, one block per particle, so statistics never mix.
Eigen::MatrixXcd mode_unitary(CounterRng& rng, const fock::TruncatedFock& f) {
  const auto k = static_cast<Eigen::Index>(f.momenta().size());
  const auto m = static_cast<Eigen::Index>(f.mode_count());
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(m, m);
  for (Eigen::Index b = 0; b < m; b += k) u.block(b, b, k, k) = random_unitary(rng, k);
  return u;
}

}  // namespace

void run_fock(const Reader& r, Report& out) {
  r.allow({"kind", "name", "seed", "tolerances", "system", "modes", "cutoff", "cell", "checks", "unitaries", "states"});
  const Tolerances tol({{"ccr", 1e-14}, {"gamma", 1e-10}, {"spectrum", 1e-9}, {"registry", 1e-10}}, r);
  nlohmann::json sys_json = nlohmann::json::array({{{"name", "phi"}, {"mass", 1.0}, {"stats", "boson"}}});
  if (r.has("system")) sys_json = r.raw("system");
  auto system = fock::particle_system_from_json(sys_json, r.path("system"));
  const auto diag = fock::validate_particle_system(system);
  if (system.particles.empty()) throw SchemaError(r.path("system") + ": needs at least one particle");
  const auto momenta = momenta_from(r);
  const int cutoff = r.integer("cutoff", 3);
  if (cutoff < 1) throw SchemaError(r.path("cutoff") + ": needs cutoff >= 1");
  const double cell = r.number("cell", 1.0);
  if (!(cell > 0.0)) throw SchemaError(r.path("cell") + ": must be positive");
  std::set<std::string> checks{"ccr", "gamma", "spectrum", "registry", "hamiltonian"};
  if (r.has("checks")) {
    const auto& c = r.raw("checks");
    if (!c.is_array()) throw SchemaError(r.path("checks") + ": expected an array");
    std::set<std::string> chosen;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c[i].is_string() || !checks.count(c[i].get<std::string>())) {
        throw SchemaError(r.path("checks") + "[" + std::to_string(i) + "]: expected ccr|gamma|spectrum|registry|hamiltonian");
      }
      chosen.insert(c[i].get<std::string>());
    }
    checks = chosen;
  }
  const int unitaries = r.integer("unitaries", 5);
  if (unitaries < 1) throw SchemaError(r.path("unitaries") + ": needs at least one");

  const fock::TruncatedFock f(system, momenta, cutoff, cell);
  std::size_t bosons = 0, fermions = 0;
  for (std::size_t i = 0; i < f.mode_count(); ++i) (f.mode(i).stats == fock::Statistics::Boson ? bosons : fermions)++;
  out.details["dimension"] = f.dimension();
  out.details["self_conjugate"] = diag.self_conjugate;
  out.check("dimension_count", double(f.dimension()), double(fock::fock_dimension(bosons, fermions, cutoff)),
            Comparison::Equal);

  CounterRng rng(out.seed);
  if (checks.count("ccr")) out.check("ccr_car_guarded", fock::algebra_defect(f), tol["ccr"]);

  if (checks.count("hamiltonian")) {
    const auto a0 = fock::free_hamiltonian(f);
    const auto num = fock::number_operator(f);
    out.check("vacuum_energy", std::abs(a0.coeff(0, 0)), 0.0, Comparison::Equal);
    out.check("hamiltonian_number_commutator", fock::max_abs(fock::OperatorMatrix(a0 * num - num * a0)), 0.0,
              Comparison::Equal);
    if (r.has("states")) {
      const auto& states = r.raw("states");
      if (!states.is_array()) throw SchemaError(r.path("states") + ": expected an array");
      for (std::size_t i = 0; i < states.size(); ++i) {
        const Reader st(states[i], r.path("states") + "[" + std::to_string(i) + "]");
        st.allow({"occupation", "expect"});
        const auto& occ = st.raw("occupation");
        if (!occ.is_array()) throw SchemaError(st.path("occupation") + ": expected an array");
        fock::Occupation o(f.mode_count(), 0);
        for (std::size_t j = 0; j < occ.size(); ++j) {
          const Reader e(occ[j], st.path("occupation") + "[" + std::to_string(j) + "]");
          e.allow({"particle", "mode", "n"});
          const std::size_t p = system.index_of(e.string("particle"));
          const int k = e.integer("mode");
          if (k < 0 || static_cast<std::size_t>(k) >= momenta.size()) throw SchemaError(e.path("mode") + ": out of range");
          const int n = e.integer("n");
          if (n < 0) throw SchemaError(e.path("n") + ": must be >= 0");
          o[f.mode_index(p, k)] += n;
        }
        const auto idx = f.index_of(o);
        if (!idx) throw SchemaError(st.path("occupation") + ": state is outside the truncated basis");
        const double energy = a0.coeff(static_cast<Eigen::Index>(*idx), static_cast<Eigen::Index>(*idx)).real();
        out.check("energy[" + std::to_string(i) + "]", energy, st.number("expect"), Comparison::Equal);
      }
    }
  }

  if (checks.count("gamma")) {
    const auto id = fock::identity(f);
    const auto m = static_cast<Eigen::Index>(f.mode_count());
    double functor = 0.0, unitary = 0.0, vacuum = 0.0;
    const double ident = fock::max_abs_diff(fock::gamma(f, Eigen::MatrixXcd::Identity(m, m)), id);
    for (int i = 0; i < unitaries; ++i) {
      const auto U = mode_unitary(rng, f);
      const auto V = mode_unitary(rng, f);
      const auto gu = fock::gamma(f, U);
      const auto gv = fock::gamma(f, V);
      functor = std::max(functor, fock::max_abs_diff(fock::OperatorMatrix(gu * gv), fock::gamma(f, U * V)));
      unitary = std::max(unitary, fock::max_abs_diff(fock::OperatorMatrix(gu.adjoint() * gu), id));
      vacuum = std::max(vacuum, std::abs(gu.coeff(0, 0) - 1.0));
    }
    out.check("gamma_identity", ident, tol["gamma"]);
    out.check("gamma_functoriality", functor, tol["gamma"]);
    out.check("gamma_unitarity", unitary, tol["gamma"]);
    out.check("gamma_vacuum", vacuum, tol["gamma"]);
  }

  if (checks.count("spectrum")) {
    const auto W = fock::gamma(f, mode_unitary(rng, f));
    std::vector<fock::Complex> h(momenta.size());
    for (auto& v : h) v = rng.normal();
    std::vector<fock::OperatorMatrix> ops{fock::free_hamiltonian(f), fock::number_operator(f)};
    bool has_field = false;
    for (const auto& p : system.particles) {
      bool ok = true;
      for (std::size_t k = 0; k < momenta.size(); ++k) ok = ok && f.mode(f.mode_index(system.index_of(p.name), k)).mu > 0.0;
      if (ok) {
        ops.push_back(fock::smeared_field(f, p.name, h, 0.0));
        has_field = true;
        break;
      }
    }
    const auto rep = fock::transport_representation(W, ops, tol["gamma"]);
    out.check("spectrum_hamiltonian", rep.spectrum_defect[0], tol["spectrum"]);
    out.check("spectrum_all_ops", *std::max_element(rep.spectrum_defect.begin(), rep.spectrum_defect.end()),
              tol["spectrum"]);
    out.check("commutator_spectra", rep.commutator_defect, tol["spectrum"]);
    out.details["transported_ops"] = has_field ? "A0, N, Phi(h)" : "A0, N";
  }

  if (checks.count("registry")) {
    const auto m = static_cast<Eigen::Index>(f.mode_count());
    const auto U = mode_unitary(rng, f);
    const auto V = mode_unitary(rng, f);
    fock::CategoryRegistry reg;
    for (double e : {0.0, 1.0, 2.0}) reg.add_theory(e, {{}, "free"});
    reg.add_morphism(0.0, 0.0, fock::gamma(f, Eigen::MatrixXcd::Identity(m, m)));
    reg.add_morphism(0.0, 1.0, fock::gamma(f, U));
    reg.add_morphism(1.0, 2.0, fock::gamma(f, V));
    reg.add_morphism(0.0, 2.0, fock::gamma(f, V * U));
    const auto good = reg.check_groupoid(tol["registry"]);
    out.check("registry_identity", good.identity_defect, tol["registry"]);
    out.check("registry_composition", good.composition_defect, tol["registry"]);

    fock::CategoryRegistry bad;
    for (double e : {0.0, 1.0, 2.0}) bad.add_theory(e, {{}, "free"});
    bad.add_morphism(0.0, 1.0, fock::gamma(f, U));
    bad.add_morphism(1.0, 2.0, fock::gamma(f, V));
    bad.add_morphism(0.0, 2.0, fock::gamma(f, mode_unitary(rng, f)));
    out.check("registry_counterexample_detected", bad.check_groupoid(tol["registry"]).composition_defect,
              tol["registry"], Comparison::AtLeast);
    out.details["registry_triples"] = good.triples_checked;
  }
}

}  // namespace regularframe::scenario::detail
