#include "regularframe/fock.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "regularframe/errors.hpp"
#include "regularframe/parallel.hpp"

namespace regularframe::fock {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<std::size_t> ParticleSystem::find(const std::string& name) const {
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (particles[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParticleSystem::index_of(const std::string& name) const {
  if (auto i = find(name)) return *i;
  throw ParticleSystemError("unknown particle '" + name + "'");
}

SystemDiagnostics validate_particle_system(const ParticleSystem& s) {
  SystemDiagnostics d;
  std::set<std::string> seen;
  for (const auto& p : s.particles) {
    if (p.name.empty()) throw ParticleSystemError("particle with an empty label");
    if (!seen.insert(p.name).second) throw ParticleSystemError("duplicate particle '" + p.name + "'");
    if (!(p.mass >= 0.0) || !std::isfinite(p.mass)) throw ParticleSystemError("mass of '" + p.name + "' must be finite and >= 0");
  }
  for (const auto& p : s.particles) {
    const auto ci = s.find(p.conj);
    if (!ci) throw ParticleSystemError("conjugate of '" + p.name + "' is unknown ('" + p.conj + "')");
    const auto& q = s.particles[*ci];
    if (q.conj != p.name) {
      throw ParticleSystemError("conjugation is not an involution: " + p.name + " -> " + q.name + " -> " + q.conj);
    }
    if (q.mass != p.mass) throw ParticleSystemError("mass of '" + p.name + "' differs from its conjugate");
    if (q.stats != p.stats) throw ParticleSystemError("statistics of '" + p.name + "' differ from its conjugate");
    if (p.conj == p.name) d.self_conjugate.push_back(p.name);
  }
  return d;
}

namespace {

std::string spin_string(const json& v, const std::string& where) {
  static const std::set<std::string> allowed{"0", "1/2", "-1/2", "1", "-1", "none"};
  if (v.is_null()) return "none";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (allowed.count(s)) return s;
  } else if (v.is_number()) {
    const double x = v.get<double>();
    if (x == 0.0) return "0";
    if (x == 0.5) return "1/2";
    if (x == -0.5) return "-1/2";
    if (x == 1.0) return "1";
    if (x == -1.0) return "-1";
  }
  throw SchemaError(where + ": spin must be one of 0, 1/2, -1/2, 1, -1, none");
}

}  // namespace

ParticleSystem particle_system_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw SchemaError(where + ": expected an array of particles");
  ParticleSystem s;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const auto& e = j[i];
    if (!e.is_object()) throw SchemaError(w + ": expected an object");
    if (!e.contains("name") || !e["name"].is_string()) throw SchemaError(w + ".name: expected a string");
    Particle p;
    p.name = e["name"].get<std::string>();
    p.conj = p.name;
    if (e.contains("conj")) {
      if (!e["conj"].is_string()) throw SchemaError(w + ".conj: expected a string");
      p.conj = e["conj"].get<std::string>();
    }
    if (e.contains("mass")) {
      if (!e["mass"].is_number()) throw SchemaError(w + ".mass: expected a number");
      p.mass = e["mass"].get<double>();
    }
    if (e.contains("stats")) {
      const auto& st = e["stats"];
      if (st == "boson") p.stats = Statistics::Boson;
      else if (st == "fermion") p.stats = Statistics::Fermion;
      else throw SchemaError(w + ".stats: expected \"boson\" or \"fermion\"");
    }
    if (e.contains("spin")) p.spin = spin_string(e["spin"], w + ".spin");
    s.particles.push_back(p);
  }
  return s;
}

ordered_json particle_system_to_json(const ParticleSystem& s) {
  ordered_json out = ordered_json::array();
  for (const auto& p : s.particles) {
    out.push_back({{"name", p.name},
                   {"conj", p.conj},
                   {"mass", p.mass},
                   {"stats", p.stats == Statistics::Boson ? "boson" : "fermion"},
                   {"spin", p.spin}});
  }
  return out;
}

namespace {

void enumerate(const std::vector<Mode>& modes, std::size_t i, int left, Occupation& cur, std::vector<Occupation>& out) {
  if (i == modes.size()) {
    if (left == 0) out.push_back(cur);
    return;
  }
  const int cap = modes[i].stats == Statistics::Fermion ? std::min(left, 1) : left;
  for (int v = cap; v >= 0; --v) {
    cur[i] = v;
    enumerate(modes, i + 1, left - v, cur, out);
  }
  cur[i] = 0;
}

int total(const Occupation& o) {
  int t = 0;
  for (int v : o) t += v;
  return t;
}

}  // namespace

TruncatedFock::TruncatedFock(ParticleSystem system, std::vector<Vec3> momenta, int max_total, double cell)
    : system_(std::move(system)), momenta_(std::move(momenta)), max_total_(max_total), cell_(cell) {
  validate_particle_system(system_);
  if (max_total < 0) throw ConfigError("occupation cutoff must be >= 0");
  if (!(cell > 0.0)) throw ConfigError("momentum cell must be positive");
  if (momenta_.empty()) throw ConfigError("Fock space needs at least one mode");
  for (std::size_t a = 0; a < system_.particles.size(); ++a) {
    const auto& part = system_.particles[a];
    for (std::size_t k = 0; k < momenta_.size(); ++k) {
      modes_.push_back({a, k, momenta_[k], std::sqrt(part.mass * part.mass + momenta_[k].squaredNorm()), part.stats});
    }
  }
  Occupation cur(modes_.size(), 0);
  for (int n = 0; n <= max_total_; ++n) enumerate(modes_, 0, n, cur, basis_);
  for (std::size_t i = 0; i < basis_.size(); ++i) lookup_.emplace(basis_[i], i);
}

std::size_t TruncatedFock::mode_index(std::size_t particle, std::size_t k) const {
  if (particle >= system_.particles.size() || k >= momenta_.size()) throw ConfigError("mode index out of range");
  return particle * momenta_.size() + k;
}

std::optional<std::size_t> TruncatedFock::index_of(const Occupation& occ) const {
  auto it = lookup_.find(occ);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t fock_dimension(std::size_t bosons, std::size_t fermions, int max_total) {
  auto binom = [](std::size_t n, std::size_t k) {
    if (k > n) return std::size_t{0};
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  std::size_t count = 0;
  for (int n = 0; n <= max_total; ++n) {
    for (std::size_t f = 0; f <= std::min<std::size_t>(n, fermions); ++f) {
      const std::size_t b = static_cast<std::size_t>(n) - f;
      const std::size_t with_bosons = bosons == 0 ? (b == 0 ? 1 : 0) : binom(b + bosons - 1, bosons - 1);
      count += binom(fermions, f) * with_bosons;
    }
  }
  return count;
}

namespace {

OperatorMatrix from_triplets(std::size_t dim, const std::vector<Eigen::Triplet<Complex>>& t) {
  OperatorMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

OperatorMatrix ladder(const TruncatedFock& fock, Ladder kind, std::size_t mode) {
  if (mode >= fock.mode_count()) throw ConfigError("mode index out of range");
  const bool fermion = fock.mode(mode).stats == Statistics::Fermion;
  std::vector<Eigen::Triplet<Complex>> trip;
  for (std::size_t s = 0; s < fock.dimension(); ++s) {
    Occupation occ = fock.occupation(s);
    if (total(occ) + 1 > fock.max_total()) continue;  // dropped at the cutoff
    const int n = occ[mode];
    double amp = 0.0;
    if (fermion) {
      if (n == 1) continue;
      int parity = 0;
      for (std::size_t j = 0; j < mode; ++j) {
        if (fock.mode(j).stats == Statistics::Fermion) parity += occ[j];
      }
      amp = parity % 2 ? -1.0 : 1.0;
    } else {
      amp = std::sqrt(static_cast<double>(n + 1));
    }
    occ[mode] = n + 1;
    const auto target = fock.index_of(occ);
    if (!target) continue;
    trip.emplace_back(static_cast<Eigen::Index>(*target), static_cast<Eigen::Index>(s), amp);
  }
  OperatorMatrix create = from_triplets(fock.dimension(), trip);
  if (kind == Ladder::Create) return create;
  return OperatorMatrix(create.adjoint());
}

OperatorMatrix identity(const TruncatedFock& fock) {
  OperatorMatrix id(static_cast<Eigen::Index>(fock.dimension()), static_cast<Eigen::Index>(fock.dimension()));
  id.setIdentity();
  return id;
}

namespace {

template <class F>
OperatorMatrix diagonal(const TruncatedFock& fock, F value) {
  std::vector<Eigen::Triplet<Complex>> trip;
  for (std::size_t s = 0; s < fock.dimension(); ++s) {
    const double v = value(fock.occupation(s));
    if (v != 0.0) trip.emplace_back(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s), v);
  }
  return from_triplets(fock.dimension(), trip);
}

}  // namespace

OperatorMatrix number_operator(const TruncatedFock& fock) {
  return diagonal(fock, [](const Occupation& o) { return static_cast<double>(total(o)); });
}

OperatorMatrix free_hamiltonian(const TruncatedFock& fock) {
  return diagonal(fock, [&](const Occupation& o) {
    double e = 0.0;
    for (std::size_t k = 0; k < o.size(); ++k) e += o[k] * fock.mode(k).mu;
    return e;
  });
}

OperatorMatrix smeared_field(const TruncatedFock& fock, const std::string& particle, const std::vector<Complex>& h,
                             double t) {
  const auto& sys = fock.system();
  const std::size_t p = sys.index_of(particle);
  const std::size_t pbar = sys.index_of(sys.particles[p].conj);
  if (h.size() != fock.momenta().size()) throw ConfigError("test function needs one amplitude per momentum");
  OperatorMatrix phi(static_cast<Eigen::Index>(fock.dimension()), static_cast<Eigen::Index>(fock.dimension()));
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k] == Complex(0.0)) continue;
    const std::size_t ma = fock.mode_index(p, k);
    const std::size_t mc = fock.mode_index(pbar, k);
    const double mu = fock.mode(ma).mu;
    if (!(mu > 0.0)) throw ConfigError("smeared field needs mu > 0 on every smeared mode");
    const double c = fock.cell() / std::sqrt(mu);
    const Complex up = c * std::polar(1.0, mu * t) * h[k];
    const Complex down = c * std::polar(1.0, -mu * t) * std::conj(h[k]);
    phi += up * ladder(fock, Ladder::Create, mc) + down * ladder(fock, Ladder::Annihilate, ma);
  }
  return phi;
}

OperatorMatrix gamma(const TruncatedFock& fock, const Eigen::MatrixXcd& U) {
  const auto m = static_cast<Eigen::Index>(fock.mode_count());
  if (U.rows() != m || U.cols() != m) throw ConfigError("mode unitary has the wrong size");
  const double unit = (U.adjoint() * U - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (!(unit <= 1e-12)) throw UnitarityError("mode matrix is not unitary (defect " + std::to_string(unit) + ")");
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < m; ++k) {
      if (fock.mode(j).stats != fock.mode(k).stats && std::abs(U(j, k)) > 1e-14) {
        throw ConfigError("mode unitary mixes bosonic and fermionic modes");
      }
    }
  }
  std::vector<OperatorMatrix> up(fock.mode_count());
  std::vector<OperatorMatrix> b(fock.mode_count());
  for (std::size_t j = 0; j < fock.mode_count(); ++j) up[j] = ladder(fock, Ladder::Create, j);
  for (Eigen::Index k = 0; k < m; ++k) {
    OperatorMatrix sum(static_cast<Eigen::Index>(fock.dimension()), static_cast<Eigen::Index>(fock.dimension()));
    for (Eigen::Index j = 0; j < m; ++j) {
      if (U(j, k) != Complex(0.0)) sum += U(j, k) * up[j];
    }
    b[k] = sum;
  }
  const auto dim = static_cast<Eigen::Index>(fock.dimension());
  std::vector<Eigen::VectorXcd> columns(fock.dimension());
  parallel_for(fock.dimension(), [&](std::size_t s) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v[0] = 1.0;
    const auto& occ = fock.occupation(s);
    for (Eigen::Index k = m - 1; k >= 0; --k) {
      double fact = 1.0;
      for (int r = 0; r < occ[k]; ++r) {
        v = b[k] * v;
        fact *= r + 1;
      }
      if (occ[k] > 1) v /= std::sqrt(fact);
    }
    columns[s] = std::move(v);
  });
  std::vector<Eigen::Triplet<Complex>> trip;
  for (std::size_t s = 0; s < columns.size(); ++s) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      if (columns[s][r] != Complex(0.0)) trip.emplace_back(r, static_cast<Eigen::Index>(s), columns[s][r]);
    }
  }
  return from_triplets(fock.dimension(), trip);
}

double max_abs(const OperatorMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (OperatorMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

double max_abs_diff(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ConfigError("operator shapes differ");
  return max_abs(OperatorMatrix(a - b));
}

double algebra_defect(const TruncatedFock& fock) {
  const std::size_t modes = fock.mode_count();
  std::vector<OperatorMatrix> create(modes), annihilate(modes);
  for (std::size_t j = 0; j < modes; ++j) {
    create[j] = ladder(fock, Ladder::Create, j);
    annihilate[j] = ladder(fock, Ladder::Annihilate, j);
  }
  const OperatorMatrix id = identity(fock);
  std::vector<bool> guarded(fock.dimension());
  for (std::size_t s = 0; s < fock.dimension(); ++s) guarded[s] = total(fock.occupation(s)) <= fock.max_total() - 1;
  auto guarded_max = [&](const OperatorMatrix& a) {
    double m = 0.0;
    for (int k = 0; k < a.outerSize(); ++k) {
      if (!guarded[k]) continue;
      for (OperatorMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
    }
    return m;
  };
  double worst = 0.0;
  for (std::size_t j = 0; j < modes; ++j) {
    for (std::size_t k = 0; k < modes; ++k) {
      const bool anti = fock.mode(j).stats == Statistics::Fermion && fock.mode(k).stats == Statistics::Fermion;
      const double s = anti ? 1.0 : -1.0;
      OperatorMatrix mixed = annihilate[j] * create[k];
      OperatorMatrix mixed_r = create[k] * annihilate[j];
      mixed += s * mixed_r;
      if (j == k) mixed -= id;
      OperatorMatrix lower = annihilate[j] * annihilate[k];
      OperatorMatrix lower_r = annihilate[k] * annihilate[j];
      lower += s * lower_r;
      worst = std::max({worst, guarded_max(mixed), guarded_max(lower)});
    }
  }
  return worst;
}

}  // namespace regularframe::fock
