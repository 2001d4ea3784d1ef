#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "regularframe/metric.hpp"

namespace regularframe::fock {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::SparseMatrix<Complex>;

enum class Statistics { Boson, Fermion };

struct Particle {
  std::string name;
  std::string conj;  // anti-particle label; equal to name when self-conjugate
  double mass = 0.0;
  Statistics stats = Statistics::Boson;
  std::string spin = "none";  // metadata only: 0, 1/2, -1/2, 1, -1, none
};

struct ParticleSystem {
  std::vector<Particle> particles;

  std::optional<std::size_t> find(const std::string& name) const;
  /// Throws ParticleSystemError for an unknown label.
  std::size_t index_of(const std::string& name) const;
};

struct SystemDiagnostics {
  std::vector<std::string> self_conjugate;
};

/// Involution, mass and statistics symmetry under conjugation, unique labels.
/// Throws ParticleSystemError.
SystemDiagnostics validate_particle_system(const ParticleSystem& s);

/// [{"name", "conj", "mass", "stats": "boson"|"fermion", "spin"}]
ParticleSystem particle_system_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::ordered_json particle_system_to_json(const ParticleSystem& s);

struct Mode {
  std::size_t particle = 0;
  std::size_t k = 0;  // momentum index
  Vec3 p = Vec3::Zero();
  double mu = 0.0;
  Statistics stats = Statistics::Boson;
};

using Occupation = std::vector<int>;

/// Occupation basis with sum n <= max_total over the modes (particle, k),
/// particle-major. Graded lexicographic: by total, then descending in the
/// first mode; the vacuum is index 0.
class TruncatedFock {
 public:
  TruncatedFock(ParticleSystem system, std::vector<Vec3> momenta, int max_total, double cell = 1.0);

  std::size_t dimension() const { return basis_.size(); }
  std::size_t mode_count() const { return modes_.size(); }
  const Mode& mode(std::size_t i) const { return modes_.at(i); }
  std::size_t mode_index(std::size_t particle, std::size_t k) const;
  const Occupation& occupation(std::size_t state) const { return basis_.at(state); }
  std::optional<std::size_t> index_of(const Occupation& occ) const;
  int max_total() const { return max_total_; }
  double cell() const { return cell_; }
  const ParticleSystem& system() const { return system_; }
  const std::vector<Vec3>& momenta() const { return momenta_; }

 private:
  ParticleSystem system_;
  std::vector<Vec3> momenta_;
  int max_total_;
  double cell_;
  std::vector<Mode> modes_;
  std::vector<Occupation> basis_;
  std::map<Occupation, std::size_t> lookup_;
};

/// Closed-form size of the basis: bosonic and fermionic mode counts, cutoff N.
std::size_t fock_dimension(std::size_t bosons, std::size_t fermions, int max_total);

enum class Ladder { Create, Annihilate };

/// a_k^dagger drops amplitudes beyond the cutoff; fermions carry the
/// Jordan-Wigner sign over the fermionic modes before k. a_k is the adjoint.
OperatorMatrix ladder(const TruncatedFock& fock, Ladder kind, std::size_t mode);
OperatorMatrix identity(const TruncatedFock& fock);
OperatorMatrix number_operator(const TruncatedFock& fock);
/// Diagonal, sum_k n_k mu_k.
OperatorMatrix free_hamiltonian(const TruncatedFock& fock);

/// Phi_{0,p}(h) = sum_k (cell / sqrt(mu_k)) (e^{i mu_k t} h_k a^dagger_{conj p,k} + e^{-i mu_k t} conj(h_k) a_{p,k}).
/// Its adjoint is Phi_{0,conj p}(h). Throws ParticleSystemError for unknown p.
OperatorMatrix smeared_field(const TruncatedFock& fock, const std::string& particle, const std::vector<Complex>& h,
                             double t);

/// Second quantization of a unitary on the mode space (mode_count square):
/// Gamma(U)|n> = prod_k (b_k^dagger)^{n_k} / sqrt(n_k!) |0>, b_k^dagger = sum_j U_jk a_j^dagger.
/// U must not mix bosonic and fermionic modes. Throws UnitarityError / ConfigError.
OperatorMatrix gamma(const TruncatedFock& fock, const Eigen::MatrixXcd& U);

/// Max entry of (anti)commutator defects [a_j, a_k^dagger] - delta and [a_j, a_k]
/// (anticommutators for fermion pairs), on the columns with sum n <= N - 1.
double algebra_defect(const TruncatedFock& fock);

double max_abs(const OperatorMatrix& a);
double max_abs_diff(const OperatorMatrix& a, const OperatorMatrix& b);

struct RepresentationReport {
  std::vector<OperatorMatrix> transported;  // W A W^dagger
  std::vector<double> spectrum_defect;       // per op
  double commutator_defect = 0.0;            // worst over pairs i < j
  double isometry_defect = 0.0;              // |W W^dagger W - W|_max
  double vacuum_defect = 0.0;
};

/// W must fix the vacuum (VacuumError) and be a partial isometry (UnitarityError), both to `tol`.
/// Spectra are compared on the transported subspace: eigenvalues for
/// self-adjoint operators, singular values otherwise.
RepresentationReport transport_representation(const OperatorMatrix& W, const std::vector<OperatorMatrix>& ops,
                                              double tol = 1e-10);

struct TheoryRecord {
  std::vector<double> masses;
  std::string couplings;
};

struct GroupoidReport {
  std::size_t identities_checked = 0;
  std::size_t triples_checked = 0;
  double identity_defect = 0.0;
  double composition_defect = 0.0;
  double tolerance = 1e-10;

  bool pass() const { return identity_defect <= tolerance && composition_defect <= tolerance; }
};

/// Energy-indexed theories with morphisms between them. Unregistered
/// self-morphisms count as the identity.
class CategoryRegistry {
 public:
  void add_theory(double energy, TheoryRecord record);
  void add_morphism(double from, double to, OperatorMatrix u);
  GroupoidReport check_groupoid(double tol = 1e-10) const;

  const std::map<double, TheoryRecord>& theories() const { return theories_; }
  const std::map<std::pair<double, double>, OperatorMatrix>& morphisms() const { return morphisms_; }

 private:
  std::map<double, TheoryRecord> theories_;
  std::map<std::pair<double, double>, OperatorMatrix> morphisms_;
};

}  // namespace regularframe::fock
