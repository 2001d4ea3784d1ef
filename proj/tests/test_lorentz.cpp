#include <doctest.h>

#include <cmath>

#include "regularframe/errors.hpp"
#include "regularframe/lorentz.hpp"
#include "regularframe/metric.hpp"
#include "regularframe/rng.hpp"

using namespace regularframe;
using namespace regularframe::lorentz;

namespace {

Mat4 diag4(double a, double b, double c, double d) { return Vec4(a, b, c, d).asDiagonal(); }

// Lorentzian by Sylvester: congruent to eta.
Mat4 random_lorentzian(CounterRng& rng) {
  Mat4 m = Mat4::Identity();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) += 0.3 * (rng.uniform() - 0.5);
  return m.transpose() * minkowski_matrix() * m;
}

Mat3 random_spd(CounterRng& rng, double cond) {
  Mat3 a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat3> qr(a);
  Mat3 q = qr.householderQ();
  Vec3 ev(1.0, std::sqrt(cond) * rng.uniform() + 1.0, cond);
  Mat3 g = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (g + g.transpose());
}

class Skewed : public MetricField {
 public:
  explicit Skewed(double off) : off_(off) {}
  std::string family() const override { return "skewed"; }
  nlohmann::ordered_json to_json() const override { return {}; }

 protected:
  Mat4 raw(const SpacetimePoint&) const override {
    Mat4 g = minkowski_matrix();
    g(0, 1) = off_;
    return g;
  }

 private:
  double off_;
};

class Euclidean : public MetricField {
 public:
  std::string family() const override { return "euclid"; }
  nlohmann::ordered_json to_json() const override { return {}; }

 protected:
  Mat4 raw(const SpacetimePoint&) const override { return Mat4::Identity(); }
};

}  // namespace

TEST_CASE("metric families evaluate to their defining matrices") {
  auto mink = make_minkowski();
  CHECK(mink->evaluate({3.0, {1.0, -2.0, 5.0}}) == diag4(-1, 1, 1, 1));

  DiagPolyParams dp;
  dp.diag[0] = {{-1.0, 0, 0}, {-1.0, 2, 0}};
  auto poly = make_diag_poly(dp);
  CHECK((poly->evaluate({1.0, {0, 0, 0}}) - diag4(-2, 1, 1, 1)).norm() == 0.0);

  // a(t0) = 1 + eps * tanh(0) = 1; pick eps and t so that a = 2 exactly
  FrwParams fp;
  fp.eps = 1.0;
  fp.shape = FrwShape::Gauss;  // gauss(0) = 1
  auto frw = make_frw(fp);
  CHECK(fp.scale(0.0) == doctest::Approx(2.0));
  CHECK((frw->evaluate({0.0, {0, 0, 0}}) - diag4(-1, 4, 4, 4)).norm() < 1e-14);
}

TEST_CASE("evaluate symmetrizes small asymmetry and rejects large") {
  Skewed tiny(1e-16);
  Mat4 g = tiny.evaluate({});
  CHECK(g(0, 1) == g(1, 0));
  Skewed big(0.1);
  CHECK_THROWS_AS(big.evaluate({}), EvaluationError);
  SpacetimePoint bad{std::nan(""), {0, 0, 0}};
  CHECK_THROWS_AS(make_minkowski()->evaluate(bad), EvaluationError);
}

TEST_CASE("normal vector examples and identities") {
  Vec4 n = normal_vector(diag4(-1, 1, 1, 1));
  CHECK((n - Vec4(-1, 0, 0, 0)).norm() == 0.0);
  Mat4 g = diag4(-4, 9, 1, 1);
  n = normal_vector(g);
  CHECK((n - Vec4(-0.25, 0, 0, 0)).norm() < 1e-15);
  CHECK(n.dot(g * n) == doctest::Approx(-0.25));
  CHECK_THROWS_AS(normal_vector(Mat4::Zero()), SingularMetricError);

  CounterRng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Mat4 gr = random_lorentzian(rng);
    Vec4 nr = normal_vector(gr);
    Mat4 inv = gr.inverse();  // dense oracle
    for (int i = 1; i < 4; ++i) CHECK(std::abs((gr * nr)(i)) < 1e-12);
    CHECK(std::abs(nr.dot(gr * nr) - inv(0, 0)) < 1e-12);
  }
}

TEST_CASE("block decomposition and congruence reassembly") {
  BlockForm b = block_decompose(diag4(-1, 1, 1, 1));
  CHECK(b.lapse2 == -1.0);
  CHECK(b.spatial == Mat3::Identity());
  b = block_decompose(diag4(-4, 9, 1, 1));
  CHECK(b.lapse2 == doctest::Approx(-0.25));
  CHECK((b.spatial - Vec3(9, 1, 1).asDiagonal().toDenseMatrix()).norm() < 1e-15);

  CounterRng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    Mat4 g = random_lorentzian(rng);
    // spatial block must be SPD for the decomposition to exist
    Eigen::SelfAdjointEigenSolver<Mat3> es(g.bottomRightCorner<3, 3>());
    if (es.eigenvalues().minCoeff() <= 0.0 || g.inverse()(0, 0) >= 0.0) continue;
    BlockForm bf = block_decompose(g);
    Mat4 M = Mat4::Identity();
    M.col(0) = g.inverse().col(0);
    Mat4 oracle = M.transpose() * g * M;
    Mat4 assembled = Mat4::Zero();
    assembled(0, 0) = bf.lapse2;
    assembled.bottomRightCorner<3, 3>() = bf.spatial;
    CHECK((assembled - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_AS(block_decompose(diag4(1, 1, 1, 1)), NotGloballyHyperbolicHereError);
  Mat4 bad = diag4(-1, 1, -1, 1);
  CHECK_THROWS_AS(block_decompose(bad), SignatureError);
}

TEST_CASE("spd_power examples and semigroup law") {
  Mat3 g = Vec3(4, 1, 1).asDiagonal();
  Mat3 r = spd_power(g, 0.5);
  CHECK((r - Mat3(Vec3(2, 1, 1).asDiagonal())).norm() < 1e-15);

  CounterRng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    Mat3 s = random_spd(rng, trial % 2 ? 1e6 : 10.0);
    CHECK(spd_power(s, 0.0) == Mat3::Identity());
    CHECK(spd_power(s, 1.0) == s);
    Mat3 half = spd_power(s, 0.5);
    CHECK((half * half - s).norm() < 1e-10 * std::max(1.0, s.norm()));
    double a = rng.uniform() * 0.5, bb = rng.uniform() * 0.5;
    Mat3 lhs = spd_power(s, a) * spd_power(s, bb);
    CHECK((lhs - spd_power(s, a + bb)).norm() < 1e-9 * std::max(1.0, s.norm()));
  }
  CHECK_THROWS_AS(spd_power(Mat3(Vec3(1, -1, 1).asDiagonal()), 0.5), SignatureError);
}

TEST_CASE("symmetric eigen ordering and sign convention") {
  Mat3 a;
  a << 2, 1, 0, 1, 2, 0, 0, 0, 5;
  SymmetricEigen3 e = symmetric_eigen(a);
  CHECK(e.values(0) <= e.values(1));
  CHECK(e.values(1) <= e.values(2));
  for (int c = 0; c < 3; ++c) {
    int k = 0;
    while (std::abs(e.vectors(k, c)) < 1e-14) ++k;
    CHECK(e.vectors(k, c) > 0.0);
    CHECK((a * e.vectors.col(c) - e.values(c) * e.vectors.col(c)).norm() < 1e-13);
  }
}

TEST_CASE("check_regular diagnostics") {
  std::vector<SpacetimePoint> sample;
  for (int i = 0; i < 5; ++i) sample.push_back({-2.0 + i, {0.5 * i, -1.0, 3.0}});
  auto rep = check_regular(*make_minkowski(), sample);
  CHECK(rep.pass);
  CHECK(rep.failures == 0);
  CHECK(rep.lapse_margin == doctest::Approx(1.0));

  Euclidean eu;
  rep = check_regular(eu, sample);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.points[0].lorentzian);

  DiagPolyParams dp;
  dp.diag[0] = {{-1.0, 0, 0}, {1.0, 2, 0}};
  auto poly = make_diag_poly(dp);
  CHECK(poly->evaluate({2.0, {0, 0, 0}})(0, 0) == 3.0);
  std::vector<SpacetimePoint> at2{{2.0, {0, 0, 0}}};
  rep = check_regular(*poly, at2);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.points[0].lapse_negative);
}

TEST_CASE("metric schema errors carry key paths") {
  using nlohmann::json;
  auto msg = [](const json& j) {
    try {
      metric_from_json(j);
    } catch (const SchemaError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg(json{{"family", "nope"}}).find("metric.family") != std::string::npos);
  CHECK(msg(json{{"family", "frw"}, {"params", {{"eps", "x"}}}}).find("metric.params.eps") != std::string::npos);
  CHECK(msg(json{{"family", "frw"}, {"params", json::object()}}).find("metric.params.eps") != std::string::npos);
  CHECK(msg(json{{"family", "frw"}, {"params", {{"eps", 0.1}, {"shape", "cube"}}}}).find("shape") !=
        std::string::npos);
  auto m = metric_from_json(json{{"family", "frw"}, {"params", {{"eps", 0.1}, {"t0", 2.0}}}});
  CHECK(m->family() == "frw");
  auto again = metric_from_json(json::parse(m->to_json().dump()));
  CHECK(again->to_json() == m->to_json());
}
