#include <doctest.h>

#include <cmath>
#include <random>

#include "skewfib/fibration.hpp"
#include "skewfib/linespace.hpp"

using namespace skewfib;

namespace {
constexpr double kPi = 3.14159265358979323846;

fib::OrientedLine lineWithDirection(Vec3 u) {
  return {UnitVec3::normalize(u), {0, 0, 0}};
}
}  // namespace

TEST_CASE("qForm hand examples") {
  // det with columns (zeta1, u, zeta2) = det[[1,0,0],[0,0,1],[0,1,0]] = -1
  lines::TangentTS2 t{lineWithDirection({0, 0, 1}), {1, 0, 0}, {0, 1, 0}};
  CHECK(lines::qForm(t) == doctest::Approx(-1.0));

  t.zeta1 = {0, 0, 0};
  CHECK(lines::qForm(t) == doctest::Approx(0.0));

  t.zeta1 = {1, 0, 0};
  t.zeta2 = {1, 0, 0};  // repeated column: a null vector of the (2,2) form
  CHECK(lines::qForm(t) == doctest::Approx(0.0));
}

TEST_CASE("qForm rejects non-tangent input") {
  lines::TangentTS2 t{lineWithDirection({0, 0, 1}), {1, 0, 0.5}, {0, 1, 0}};
  CHECK_THROWS_AS(lines::qForm(t), NonTangent);
}

TEST_CASE("qForm has signature (2,2) at random bases") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 u{dist(rng), dist(rng), dist(rng)};
    if (norm(u) < 0.1) u = {1, 0, 0};
    std::array<double, 4> ev =
        lines::qFormEigenvalues(lineWithDirection(u));
    CHECK(ev[0] < -1e-9);
    CHECK(ev[1] < -1e-9);
    CHECK(ev[2] > 1e-9);
    CHECK(ev[3] > 1e-9);
  }
}

TEST_CASE("chart hand examples") {
  fib::FibrationSpec hopf = fib::makeHopf(1);
  lines::Chart c = lines::chart(hopf, {0, 0});
  CHECK(norm(c.u - Vec3{0, 0, 1}) < 1e-14);
  CHECK(norm(c.v) < 1e-14);

  c = lines::chart(hopf, {1, 0});
  CHECK(norm(c.u - UnitVec3::normalize({0, 1, 1}).vec()) < 1e-14);
  CHECK(norm(c.v - Vec3{1, 0, 0}) < 1e-14);

  lines::Chart cc = lines::chart(fib::makeCappedAtan(), {1, 0});
  double n = std::sqrt(1.0 + kPi * kPi / 16.0);
  CHECK(norm(cc.u - (1.0 / n) * Vec3{0, kPi / 4, 1}) < 1e-12);
}

TEST_CASE("chart differentials match finite differences") {
  fib::FibrationSpec capped = fib::makeCappedAtan();
  for (Vec2 p : {Vec2{1, 0}, Vec2{-0.4, 2.3}, Vec2{3, -3}}) {
    lines::Chart c = lines::chart(capped, p);
    const double h = 1e-6;
    for (int k = 0; k < 2; ++k) {
      Vec2 e = (k == 0) ? Vec2{1, 0} : Vec2{0, 1};
      lines::Chart cp = lines::chart(capped, p + h * e);
      lines::Chart cm = lines::chart(capped, p + (-h) * e);
      Vec3 fd_u = (1.0 / (2 * h)) * (cp.u - cm.u);
      Vec3 fd_v = (1.0 / (2 * h)) * (cp.v - cm.v);
      CHECK(norm(c.du[static_cast<std::size_t>(k)] - fd_u) < 1e-7);
      CHECK(norm(c.dv[static_cast<std::size_t>(k)] - fd_v) < 1e-7);
    }
  }
}

TEST_CASE("pullbackQ hand examples") {
  fib::FibrationSpec hopf = fib::makeHopf(1);
  CHECK(lines::pullbackQ(hopf, {0, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(lines::pullbackQ(hopf, {0, 0}, {0, 0}) == doctest::Approx(0.0));
  CHECK(lines::pullbackQ(fib::makeDegenerate(3), {0, 0}, {0.3, -0.8}) ==
        doctest::Approx(0.0));
}

TEST_CASE("dropped dv terms do not change the determinant") {
  // det(du h, u, dv_full h) equals det(du h, u, h): the paper-style
  // cancellation, checked term by term numerically
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> dist(-4.0, 4.0);
  for (const fib::FibrationSpec& spec :
       {fib::makeHopf(1), fib::makeCappedAtan(), fib::makeDegenerate(3),
        fib::makeGlued()}) {
    for (int i = 0; i < 50; ++i) {
      Vec2 p{dist(rng), dist(rng)};
      Vec2 h{dist(rng), dist(rng)};
      lines::Chart c = lines::chart(spec, p);
      double full = lines::pullbackQFull(c, p, h);
      double simple = lines::pullbackQ(c, h);
      CHECK(std::abs(full - simple) <=
            1e-10 * (1.0 + std::abs(full) + std::abs(simple)));
    }
  }
}

TEST_CASE("claim identity across the BMap catalog") {
  fib::GridSpec grid;  // 21x21 over [-5,5]^2
  for (const fib::FibrationSpec& spec :
       {fib::makeHopf(1), fib::makeHopf(-1), fib::makeDegenerate(3),
        fib::makeDegenerate(5), fib::makeCappedAtan(), fib::makeGlued()}) {
    Certificate cert = lines::verifyClaim(spec, grid);
    INFO("spec ", spec.label());
    CHECK(cert.pass());
    CHECK(cert.margin <= 1e-6);
  }
}

TEST_CASE("hopf pullback closed form") {
  // for hopf(+1), f*Q(h) = |h|^2 / (1 + |p|^2): the chart differential
  // contracts horizontal displacements by the direction normalization
  fib::FibrationSpec hopf = fib::makeHopf(1);
  for (Vec2 p : {Vec2{0, 0}, Vec2{1, 0}, Vec2{-2, 3}}) {
    for (Vec2 h : {Vec2{1, 0}, Vec2{0.6, -0.8}}) {
      double expected = dot(h, h) / (1.0 + dot(p, p));
      CHECK(lines::pullbackQ(hopf, p, h) ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("definitenessOnM verdicts") {
  fib::GridSpec grid;
  Certificate hopf = lines::definitenessOnM(fib::makeHopf(1), grid);
  CHECK(hopf.pass());
  CHECK(hopf.sigma == 1);

  Certificate hopfneg = lines::definitenessOnM(fib::makeHopf(-1), grid);
  CHECK(hopfneg.pass());
  CHECK(hopfneg.sigma == -1);

  Certificate deg = lines::definitenessOnM(fib::makeDegenerate(3), grid);
  CHECK_FALSE(deg.pass());

  Certificate glued = lines::definitenessOnM(fib::makeGlued(), grid);
  CHECK_FALSE(glued.pass());
}

TEST_CASE("definiteness agrees with the eigenvalue check over the catalog") {
  fib::GridSpec grid;
  for (const fib::FibrationSpec& spec :
       {fib::makeHopf(1), fib::makeDegenerate(3), fib::makeCappedAtan(),
        fib::makeGlued()}) {
    // definitenessOnM itself throws InconsistentChecks on disagreement
    Certificate d = lines::definitenessOnM(spec, grid);
    Certificate nd = fib::certifyNondegenerate(spec, grid);
    CHECK(d.verdict == nd.verdict);
  }
}

TEST_CASE("chart rejects near-horizontal fibers") {
  // a B-map with |B| ~ 1e7 makes <u,V0> ~ 1e-7 < 1e-6
  fib::FibrationSpec steep(
      "steep", fib::BRep{fib::Frame::standard(),
                         fib::BMap::expressions(
                             expr::parse("1e7 + 0*p1", {"p1", "p2"}),
                             expr::parse("0*p2", {"p1", "p2"}))});
  CHECK_THROWS_AS(lines::chart(steep, {0, 0}), NearHorizontalFiber);
}
