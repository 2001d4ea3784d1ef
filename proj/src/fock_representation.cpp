#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "regularframe/errors.hpp"
#include "regularframe/fock.hpp"

namespace regularframe::fock {

namespace {

// Sorted eigenvalues when self-adjoint, sorted singular values otherwise.
Eigen::VectorXd spectrum(const Eigen::MatrixXcd& a) {
  if (a.size() == 0) return {};
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  Eigen::VectorXd v;
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
    const Eigen::MatrixXcd sym = 0.5 * (a + a.adjoint());
    v = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(sym, Eigen::EigenvaluesOnly).eigenvalues();
  } else {
    v = Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues();
  }
  std::sort(v.begin(), v.end());
  return v;
}

double spectrum_gap(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const auto sa = spectrum(a);
  const auto sb = spectrum(b);
  if (sa.size() != sb.size()) return INFINITY;
  return sa.size() ? (sa - sb).cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

RepresentationReport transport_representation(const OperatorMatrix& W, const std::vector<OperatorMatrix>& ops,
                                              double tol) {
  if (W.rows() != W.cols() || W.rows() == 0) throw ConfigError("transport operator must be square");
  const Eigen::Index dim = W.rows();
  RepresentationReport r;
  Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(dim);
  vac[0] = 1.0;
  r.vacuum_defect = (W * vac - vac).cwiseAbs().maxCoeff();
  if (!(r.vacuum_defect <= tol)) throw VacuumError("W does not fix the vacuum (defect " + std::to_string(r.vacuum_defect) + ")");
  const OperatorMatrix Wd = W.adjoint();
  r.isometry_defect = max_abs_diff(OperatorMatrix(W * Wd * W), W);
  if (!(r.isometry_defect <= tol)) {
    throw UnitarityError("W is not a partial isometry (defect " + std::to_string(r.isometry_defect) + ")");
  }

  // Orthonormal bases of the final space (Q) and of the initial space (R = W^dagger Q).
  const Eigen::MatrixXcd dense_w(W);
  const Eigen::MatrixXcd range = dense_w * dense_w.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (range + range.adjoint()));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
  }
  Eigen::MatrixXcd Q(dim, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) Q.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]);
  const Eigen::MatrixXcd R = dense_w.adjoint() * Q;

  std::vector<Eigen::MatrixXcd> before, after;
  for (const auto& a : ops) {
    if (a.rows() != dim || a.cols() != dim) throw ConfigError("operator shape does not match W");
    OperatorMatrix t = W * a * Wd;
    const Eigen::MatrixXcd da(a);
    const Eigen::MatrixXcd dt(t);
    before.push_back(R.adjoint() * da * R);
    after.push_back(Q.adjoint() * dt * Q);
    r.spectrum_defect.push_back(spectrum_gap(before.back(), after.back()));
    r.transported.push_back(std::move(t));
  }
  const std::complex<double> i(0.0, 1.0);
  for (std::size_t a = 0; a < ops.size(); ++a) {
    for (std::size_t b = a + 1; b < ops.size(); ++b) {
      const Eigen::MatrixXcd ca = i * (before[a] * before[b] - before[b] * before[a]);
      const Eigen::MatrixXcd cb = i * (after[a] * after[b] - after[b] * after[a]);
      r.commutator_defect = std::max(r.commutator_defect, spectrum_gap(ca, cb));
    }
  }
  return r;
}

void CategoryRegistry::add_theory(double energy, TheoryRecord record) {
  if (!(energy >= 0.0) || !std::isfinite(energy)) throw RegistryError("energy must be finite and >= 0");
  if (!theories_.emplace(energy, std::move(record)).second) {
    throw RegistryError("duplicate energy " + std::to_string(energy));
  }
}

void CategoryRegistry::add_morphism(double from, double to, OperatorMatrix u) {
  if (!theories_.count(from) || !theories_.count(to)) throw RegistryError("morphism between unregistered energies");
  if (morphisms_.count({from, to})) throw RegistryError("morphism already registered");
  if (u.rows() != u.cols()) throw RegistryError("morphism must be square");
  if (!morphisms_.empty() && morphisms_.begin()->second.rows() != u.rows()) {
    throw RegistryError("morphism dimension differs from the registered ones");
  }
  OperatorMatrix id(u.rows(), u.cols());
  id.setIdentity();
  const double defect = max_abs_diff(OperatorMatrix(u.adjoint() * u), id);
  if (!(defect <= 1e-10)) throw UnitarityError("morphism is not unitary (defect " + std::to_string(defect) + ")");
  morphisms_.emplace(std::make_pair(from, to), std::move(u));
}

GroupoidReport CategoryRegistry::check_groupoid(double tol) const {
  GroupoidReport r;
  r.tolerance = tol;
  if (morphisms_.empty()) return r;
  const Eigen::Index dim = morphisms_.begin()->second.rows();
  OperatorMatrix id(dim, dim);
  id.setIdentity();
  auto get = [&](double a, double b) -> const OperatorMatrix* {
    auto it = morphisms_.find({a, b});
    if (it != morphisms_.end()) return &it->second;
    return a == b ? &id : nullptr;
  };
  for (const auto& [key, u] : morphisms_) {
    if (key.first != key.second) continue;
    ++r.identities_checked;
    r.identity_defect = std::max(r.identity_defect, max_abs_diff(u, id));
  }
  for (const auto& [e1, t1] : theories_) {
    for (const auto& [e2, t2] : theories_) {
      for (const auto& [e3, t3] : theories_) {
        if (e1 == e2 && e2 == e3) continue;
        const auto* m12 = get(e1, e2);
        const auto* m23 = get(e2, e3);
        const auto* m13 = get(e1, e3);
        if (!m12 || !m23 || !m13) continue;
        ++r.triples_checked;
        r.composition_defect = std::max(r.composition_defect, max_abs_diff(OperatorMatrix(*m23 * *m12), *m13));
      }
    }
  }
  return r;
}

}  // namespace regularframe::fock
