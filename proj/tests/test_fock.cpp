#include <doctest.h>

#include <algorithm>
#include <functional>
#include <cmath>
#include <numeric>

#include "regularframe/errors.hpp"
#include "regularframe/fock.hpp"
#include "regularframe/rng.hpp"

using namespace regularframe;
using namespace regularframe::fock;
using Dense = Eigen::MatrixXcd;

namespace {

Particle boson(const std::string& name, double m, const std::string& conj = "") {
  return {name, conj.empty() ? name : conj, m, Statistics::Boson, "0"};
}
Particle fermion(const std::string& name, double m, const std::string& conj) {
  return {name, conj, m, Statistics::Fermion, "1/2"};
}

std::vector<Vec3> line_momenta(int k) {
  std::vector<Vec3> p;
  for (int i = 0; i < k; ++i) p.push_back(Vec3(i, 0, 0));
  return p;
}

Dense dense(const OperatorMatrix& a) { return Dense(a); }

// brute-force count of occupation vectors with sum <= N
std::size_t count_states(int bosons, int fermions, int N) {
  std::size_t count = 0;
  std::vector<int> occ(bosons + fermions, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == occ.size()) {
      ++count;
      return;
    }
    int cap = static_cast<int>(i) < bosons ? left : std::min(left, 1);
    for (int v = 0; v <= cap; ++v) rec(i + 1, left - v);
  };
  rec(0, N);
  return count;
}

Complex permanent_or_det(const Dense& a, bool det) {
  std::vector<int> perm(a.rows());
  std::iota(perm.begin(), perm.end(), 0);
  Complex sum = 0.0;
  do {
    Complex term = 1.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) term *= a(i, perm[i]);
    if (det) {
      int inversions = 0;
      for (std::size_t i = 0; i < perm.size(); ++i)
        for (std::size_t j = i + 1; j < perm.size(); ++j) inversions += perm[i] > perm[j];
      if (inversions % 2) term = -term;
    }
    sum += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return sum;
}

std::vector<int> repeated(const Occupation& occ) {
  std::vector<int> out;
  for (std::size_t k = 0; k < occ.size(); ++k)
    for (int r = 0; r < occ[k]; ++r) out.push_back(static_cast<int>(k));
  return out;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// <m| Gamma(U) |n> from the permanent (bosons) or determinant (fermions)
Complex gamma_oracle(const TruncatedFock& f, const Dense& U, std::size_t row, std::size_t col, bool fermions) {
  auto r = repeated(f.occupation(row)), c = repeated(f.occupation(col));
  if (r.size() != c.size()) return 0.0;
  if (r.empty()) return 1.0;
  Dense sub(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) sub(i, j) = U(r[i], c[j]);
  double norm = 1.0;
  for (int v : f.occupation(row)) norm *= factorial(v);
  for (int v : f.occupation(col)) norm *= factorial(v);
  return permanent_or_det(sub, fermions) / std::sqrt(norm);
}

}  // namespace

TEST_CASE("particle systems") {
  auto d = validate_particle_system({{boson("photon", 0.0)}});
  CHECK(d.self_conjugate == std::vector<std::string>{"photon"});
  CHECK(validate_particle_system({{fermion("e-", 0.5, "e+"), fermion("e+", 0.5, "e-")}}).self_conjugate.empty());

  auto bad = [](ParticleSystem s) { CHECK_THROWS_AS(validate_particle_system(s), ParticleSystemError); };
  bad({{boson("a", 1, "b"), boson("b", 1, "c"), boson("c", 1, "a")}});
  bad({{fermion("e-", 0.5, "e+"), fermion("e+", 0.6, "e-")}});
  bad({{fermion("e-", 0.5, "e+"), boson("e+", 0.5, "e-")}});
  bad({{boson("a", 1, "ghost")}});
  bad({{boson("a", 1), boson("a", 1)}});
  bad({{boson("a", -1)}});

  auto sys = particle_system_from_json(
      nlohmann::json::parse(R"([{"name":"e-","conj":"e+","mass":0.5,"stats":"fermion","spin":0.5},
                                {"name":"e+","conj":"e-","mass":0.5,"stats":"fermion","spin":"-1/2"}])"),
      "system");
  CHECK(sys.particles.size() == 2);
  CHECK(sys.particles[0].spin == "1/2");
  CHECK(sys.index_of("e+") == 1);
  CHECK_THROWS_AS(sys.index_of("mu"), ParticleSystemError);
  auto round = particle_system_from_json(nlohmann::json::parse(particle_system_to_json(sys).dump()), "system");
  CHECK(particle_system_to_json(round) == particle_system_to_json(sys));
  try {
    particle_system_from_json(nlohmann::json::parse(R"([{"name":"x","stats":"anyon"}])"), "system");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("system[0].stats") != std::string::npos);
  }
}

TEST_CASE("occupation basis size and order") {
  for (int b : {1, 2, 4}) {
    for (int N : {0, 1, 3}) {
      TruncatedFock f({{boson("phi", 1.0)}}, line_momenta(b), N);
      CHECK(f.dimension() == count_states(b, 0, N));
      CHECK(f.dimension() == fock_dimension(b, 0, N));
    }
  }
  TruncatedFock mixed({{fermion("e-", 1, "e+"), fermion("e+", 1, "e-")}}, line_momenta(2), 3);
  CHECK(mixed.dimension() == count_states(0, 4, 3));
  CHECK(fock_dimension(3, 2, 3) == count_states(3, 2, 3));

  TruncatedFock f({{boson("phi", 1.0)}}, line_momenta(3), 3);
  CHECK(std::all_of(f.occupation(0).begin(), f.occupation(0).end(), [](int v) { return v == 0; }));
  for (std::size_t i = 1; i < f.dimension(); ++i) {
    const auto& a = f.occupation(i - 1);
    const auto& b = f.occupation(i);
    int ta = std::accumulate(a.begin(), a.end(), 0), tb = std::accumulate(b.begin(), b.end(), 0);
    CHECK(ta <= tb);
    if (ta == tb) CHECK(std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end()));
    CHECK(f.index_of(b) == i);
  }
  CHECK_FALSE(f.index_of({4, 0, 0}).has_value());
}

TEST_CASE("ladder operators") {
  TruncatedFock f({{boson("phi", 1.0)}}, line_momenta(1), 3);
  Dense up = dense(ladder(f, Ladder::Create, 0));
  CHECK(up(*f.index_of({1}), 0) == Complex(1.0));
  CHECK(std::abs(up(*f.index_of({2}), *f.index_of({1})) - std::sqrt(2.0)) < 1e-15);
  CHECK(up.col(*f.index_of({3})).norm() == 0.0);  // beyond the cutoff
  CHECK((dense(ladder(f, Ladder::Annihilate, 0)) - up.adjoint()).norm() == 0.0);

  TruncatedFock ff({{fermion("e-", 1, "e+"), fermion("e+", 1, "e-")}}, line_momenta(1), 2);
  Dense c0 = dense(ladder(ff, Ladder::Create, 0)), c1 = dense(ladder(ff, Ladder::Create, 1));
  CHECK((c0 * c0).norm() == 0.0);
  CHECK((c0 * c1 + c1 * c0).norm() == 0.0);
  CHECK(c0(*ff.index_of({1, 0}), 0) == Complex(1.0));
  CHECK((c1 * c0)(*ff.index_of({1, 1}), 0) == Complex(-1.0));
}

TEST_CASE("canonical relations on the guarded subspace") {
  TruncatedFock bos({{boson("phi", 1.0)}}, line_momenta(4), 3);
  TruncatedFock fer({{fermion("e-", 1, "e+"), fermion("e+", 1, "e-")}}, line_momenta(2), 3);
  CHECK(algebra_defect(bos) <= 1e-14);
  CHECK(algebra_defect(fer) <= 1e-14);

  // dense check of [a_j, a_k^dagger] = delta on columns with sum n <= 2
  std::vector<Eigen::Index> guarded;
  for (std::size_t s = 0; s < bos.dimension(); ++s) {
    const auto& o = bos.occupation(s);
    if (std::accumulate(o.begin(), o.end(), 0) <= 2) guarded.push_back(static_cast<Eigen::Index>(s));
  }
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t k = 0; k < 4; ++k) {
      Dense a = dense(ladder(bos, Ladder::Annihilate, j)), ad = dense(ladder(bos, Ladder::Create, k));
      Dense comm = a * ad - ad * a;
      for (auto c : guarded) {
        for (Eigen::Index r = 0; r < comm.rows(); ++r) {
          Complex want = (j == k && r == c) ? 1.0 : 0.0;
          CHECK(std::abs(comm(r, c) - want) <= 1e-14);
        }
      }
    }
  }
}

TEST_CASE("free Hamiltonian") {
  TruncatedFock f({{boson("phi", 4.0)}}, {Vec3(0, 0, 0), Vec3(3, 0, 0)}, 3);
  Dense H = dense(free_hamiltonian(f));
  CHECK(H(0, 0) == Complex(0.0));
  CHECK(H(*f.index_of({0, 2}), *f.index_of({0, 2})) == Complex(10.0));
  CHECK(H(*f.index_of({1, 0}), *f.index_of({1, 0})) == Complex(4.0));
  Dense N = dense(number_operator(f));
  CHECK((H * N - N * H).norm() == 0.0);

  TruncatedFock unit({{boson("phi", 1.0)}}, line_momenta(1), 2);
  CHECK(dense(free_hamiltonian(unit))(1, 1) == Complex(1.0));
}

TEST_CASE("smeared fields") {
  TruncatedFock f({{boson("phi", 1.0)}}, line_momenta(1), 2);
  Dense phi = dense(smeared_field(f, "phi", {1.0}, 0.0));
  Dense expect = Dense::Zero(3, 3);
  expect(1, 0) = expect(0, 1) = 1.0;
  expect(2, 1) = expect(1, 2) = std::sqrt(2.0);
  CHECK((phi - expect).cwiseAbs().maxCoeff() < 1e-15);

  TruncatedFock self({{boson("phi", 0.7)}}, line_momenta(3), 3, 0.5);
  Dense s = dense(smeared_field(self, "phi", {0.3, -1.0, 2.0}, 0.0));
  CHECK((s - s.adjoint()).norm() < 1e-14);

  TruncatedFock pair({{fermion("e-", 0.5, "e+"), fermion("e+", 0.5, "e-")}}, line_momenta(2), 2);
  std::vector<Complex> h{{0.4, 1.0}, {-2.0, 0.1}};
  Dense em = dense(smeared_field(pair, "e-", h, 0.9)), ep = dense(smeared_field(pair, "e+", h, 0.9));
  CHECK((em.adjoint() - ep).norm() < 1e-14);
  CHECK(em.norm() > 0.0);
  CHECK_THROWS_AS(smeared_field(pair, "mu", h, 0.0), ParticleSystemError);
}

TEST_CASE("second quantization of mode unitaries") {
  TruncatedFock f({{boson("phi", 1.0)}}, line_momenta(3), 3);
  const auto I = Dense::Identity(3, 3);
  CHECK(max_abs_diff(gamma(f, I), identity(f)) < 1e-15);

  Eigen::Vector3d theta(0.3, -1.1, 2.0);
  Dense D = Dense::Zero(3, 3);
  for (int k = 0; k < 3; ++k) D(k, k) = std::polar(1.0, theta(k));
  Dense GD = dense(gamma(f, D));
  for (std::size_t s = 0; s < f.dimension(); ++s) {
    double phase = 0.0;
    for (int k = 0; k < 3; ++k) phase += f.occupation(s)[k] * theta(k);
    CHECK(std::abs(GD(s, s) - std::polar(1.0, phase)) < 1e-13);
    CHECK(std::abs(GD.col(s).norm() - 1.0) < 1e-13);
  }

  CounterRng rng(21);
  Dense U = random_unitary(rng, 3), V = random_unitary(rng, 3);
  Dense GU = dense(gamma(f, U));
  for (std::size_t r = 0; r < f.dimension(); ++r)
    for (std::size_t c = 0; c < f.dimension(); ++c) CHECK(std::abs(GU(r, c) - gamma_oracle(f, U, r, c, false)) < 1e-12);
  CHECK(max_abs_diff(gamma(f, U * V), OperatorMatrix((gamma(f, U) * gamma(f, V)).pruned())) < 1e-10);
  CHECK((GU.adjoint() * GU - Dense::Identity(f.dimension(), f.dimension())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(GU(0, 0) - 1.0) < 1e-15);

  TruncatedFock ff({{fermion("e-", 1, "e+"), fermion("e+", 1, "e-")}}, line_momenta(2), 3);
  Dense W = random_unitary(rng, 4);
  Dense GW = dense(gamma(ff, W));
  for (std::size_t r = 0; r < ff.dimension(); ++r)
    for (std::size_t c = 0; c < ff.dimension(); ++c) CHECK(std::abs(GW(r, c) - gamma_oracle(ff, W, r, c, true)) < 1e-12);

  Dense notU = 2.0 * I;
  CHECK_THROWS_AS(gamma(f, notU), UnitarityError);
  TruncatedFock mixed({{boson("phi", 1.0), fermion("psi", 1.0, "psi")}}, line_momenta(1), 2);
  CHECK_THROWS_AS(gamma(mixed, random_unitary(rng, 2)), ConfigError);
}

TEST_CASE("representation transport") {
  TruncatedFock f({{boson("phi", 4.0)}}, {Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(0, 4, 0), Vec3(1, 2, 2)}, 3);
  CounterRng rng(31);
  std::vector<OperatorMatrix> ops{free_hamiltonian(f), number_operator(f), smeared_field(f, "phi", {1, 0.5, -1, 2}, 0.0),
                                  ladder(f, Ladder::Create, 1)};
  auto rep = transport_representation(identity(f), ops);
  for (std::size_t i = 0; i < ops.size(); ++i) CHECK(max_abs_diff(rep.transported[i], ops[i]) == 0.0);

  Dense U = random_unitary(rng, 4);
  auto W = gamma(f, U);
  rep = transport_representation(W, ops, 1e-10);
  for (double d : rep.spectrum_defect) CHECK(d < 1e-9);
  CHECK(rep.commutator_defect < 1e-9);
  CHECK(rep.vacuum_defect < 1e-12);

  // eigenvalue multiset of A0 by an independent dense solve
  Dense moved = dense(rep.transported[0]);
  Eigen::SelfAdjointEigenSolver<Dense> a(dense(ops[0])), b(moved);
  CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9);
  Eigen::Index idx = *f.index_of({0, 2, 0, 0});
  Eigen::VectorXcd state = dense(W).col(idx);
  CHECK(((moved * state) - 10.0 * state).norm() < 1e-9);

  // swapping the vacuum out
  const auto n = static_cast<Eigen::Index>(f.dimension());
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
  perm.setIdentity();
  std::swap(perm.indices()(0), perm.indices()(1));
  Dense P = perm.toDenseMatrix().cast<Complex>();
  CHECK_THROWS_AS(transport_representation(OperatorMatrix(P.sparseView()), ops), VacuumError);
  Dense shrink = Dense::Identity(n, n);
  shrink(1, 1) = 0.5;
  CHECK_THROWS_AS(transport_representation(OperatorMatrix(shrink.sparseView()), ops), UnitarityError);

  // a genuine partial isometry: projection fixing the vacuum
  Dense proj = Dense::Identity(n, n);
  proj(2, 2) = 0.0;
  CHECK_NOTHROW(transport_representation(OperatorMatrix(proj.sparseView()), ops));
}

TEST_CASE("category registry") {
  CounterRng rng(41);
  auto sparse = [](const Dense& d) { return OperatorMatrix(d.sparseView()); };
  const Dense I = Dense::Identity(3, 3);
  Dense m12 = random_unitary(rng, 3), m23 = random_unitary(rng, 3);

  CategoryRegistry reg;
  reg.add_theory(0.0, {{1.0}, "free"});
  CHECK_THROWS_AS(reg.add_theory(0.0, {}), RegistryError);
  CHECK_THROWS_AS(reg.add_theory(-1.0, {}), RegistryError);
  reg.add_theory(1.0, {});
  reg.add_theory(2.0, {});
  CHECK_THROWS_AS(reg.add_morphism(0.0, 5.0, sparse(I)), RegistryError);
  reg.add_morphism(0.0, 0.0, sparse(I));
  reg.add_morphism(0.0, 1.0, sparse(m12));
  reg.add_morphism(1.0, 2.0, sparse(m23));
  reg.add_morphism(0.0, 2.0, sparse(m23 * m12));
  CHECK_THROWS_AS(reg.add_morphism(0.0, 1.0, sparse(m12)), RegistryError);
  CHECK_THROWS_AS(reg.add_morphism(2.0, 0.0, sparse(Dense::Identity(4, 4))), RegistryError);
  CHECK_THROWS_AS(reg.add_morphism(2.0, 0.0, sparse(2.0 * I)), UnitarityError);
  auto ok = reg.check_groupoid();
  CHECK(ok.pass());
  CHECK(ok.identities_checked == 1);  // unregistered self-morphisms are implicit identities
  CHECK(ok.triples_checked >= 1);

  CategoryRegistry broken;
  for (double e : {0.0, 1.0, 2.0}) broken.add_theory(e, {});
  broken.add_morphism(0.0, 1.0, sparse(m12));
  broken.add_morphism(1.0, 2.0, sparse(m23));
  broken.add_morphism(0.0, 2.0, sparse(m12 * m23));
  auto bad = broken.check_groupoid();
  CHECK_FALSE(bad.pass());
  CHECK(bad.composition_defect > 1e-10);
}
