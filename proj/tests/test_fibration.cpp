#include <doctest.h>

#include <cmath>
#include <random>

#include "skewfib/fibration.hpp"

using namespace skewfib;

namespace {
constexpr double kPi = 3.14159265358979323846;
const SolverConfig kCfg;

double pointLineDistance(Vec3 x, const fib::OrientedLine& l) {
  Vec3 d = x - l.v;
  return norm(d - dot(d, l.u) * l.u.vec());
}
}  // namespace

TEST_CASE("evalB hand examples") {
  fib::Jet2 j = fib::evalB(fib::makeHopf(1), {3, -2});
  CHECK(norm(j.value - Vec2{2, 3}) < 1e-15);
  CHECK(j.jacobian.a11 == 0.0);
  CHECK(j.jacobian.a12 == -1.0);
  CHECK(j.jacobian.a21 == 1.0);
  CHECK(j.jacobian.a22 == 0.0);

  j = fib::evalB(fib::makeDegenerate(3), {0, 0});
  CHECK(norm(j.value) == 0.0);
  CHECK(std::abs(j.jacobian.a11) + std::abs(j.jacobian.a12) +
            std::abs(j.jacobian.a21) + std::abs(j.jacobian.a22) ==
        0.0);

  j = fib::evalB(fib::makeCappedAtan(), {1, 0});
  CHECK(norm(j.value - Vec2{0, kPi / 4}) < 1e-14);
  CHECK(j.jacobian.det() == doctest::Approx(kPi / 8).epsilon(1e-12));
}

TEST_CASE("capped jet against finite differences") {
  fib::FibrationSpec capped = fib::makeCappedAtan();
  for (Vec2 p : {Vec2{1, 0}, Vec2{0.3, -1.2}, Vec2{-2, 4}, Vec2{1e-5, 1e-5}}) {
    fib::Jet2 j = fib::evalB(capped, p);
    std::vector<double> fd = fdJacobian(
        [&](const std::vector<double>& q) {
          Vec2 b = capped.brep().bmap.value({q[0], q[1]});
          return std::vector<double>{b.x, b.y};
        },
        {p.x, p.y}, 1e-6);
    CHECK(std::abs(j.jacobian.a11 - fd[0]) < 1e-7);
    CHECK(std::abs(j.jacobian.a12 - fd[1]) < 1e-7);
    CHECK(std::abs(j.jacobian.a21 - fd[2]) < 1e-7);
    CHECK(std::abs(j.jacobian.a22 - fd[3]) < 1e-7);
  }
}

TEST_CASE("evalB rejects VField specs") {
  fib::FibrationSpec pl = fib::makePlanarLinear();
  CHECK_THROWS_AS(fib::evalB(pl, {0, 0}), WrongRepresentation);
}

TEST_CASE("builtin parameter validation") {
  CHECK_THROWS_AS(fib::makeDegenerate(2), ConfigError);  // k must be odd
  CHECK_THROWS_AS(fib::makeDegenerate(1), ConfigError);  // and > 1
  CHECK_THROWS_AS(fib::makeHopf(0), ConfigError);
}

TEST_CASE("solveBase hand examples") {
  fib::FibrationSpec hopf = fib::makeHopf(1);
  Vec2 p = fib::solveBase(hopf, {2.5, -1.25, 0}, kCfg);
  CHECK(norm(p - Vec2{2.5, -1.25}) < 1e-12);  // z = 0 is the base plane

  p = fib::solveBase(fib::makeDegenerate(3), {-1, 3, 2}, kCfg);
  CHECK(norm(p - Vec2{1, 1}) < 1e-9);

  p = fib::solveBase(hopf, {1, 0, 1}, kCfg);
  CHECK(norm(p - Vec2{0.5, -0.5}) < 1e-12);
}

TEST_CASE("roundtrip reconstruction over the catalog") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (const fib::FibrationSpec& spec :
       {fib::makeHopf(1), fib::makeHopf(-1), fib::makeDegenerate(3),
        fib::makeDegenerate(5), fib::makeCappedAtan(), fib::makeGlued()}) {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      Vec2 p{dist(rng), dist(rng)};
      double z = dist(rng);
      Vec2 B = spec.brep().bmap.value(p);
      Vec3 x{p.x + z * B.x, p.y + z * B.y, z};
      worst = std::max(worst, norm(fib::solveBase(spec, x, kCfg) - p));
    }
    INFO("spec ", spec.label());
    CHECK(worst <= 1e-10);
  }
}

TEST_CASE("direction hand examples") {
  UnitVec3 u = fib::direction(fib::makeHopf(1), {1, 0, 0}, kCfg);
  CHECK(norm(u.vec() - Vec3{0, std::sqrt(0.5), std::sqrt(0.5)}) < 1e-12);

  u = fib::direction(fib::makePlanarTwist(expr::parse("y", {"y"})), {0, 2, 5}, kCfg);
  CHECK(norm(u.vec() - Vec3{std::sin(2.0), 0, std::cos(2.0)}) < 1e-9);

  u = fib::direction(fib::makeDegenerate(3), {-1, 3, 2}, kCfg);
  CHECK(norm(u.vec() - (1.0 / std::sqrt(3.0)) * Vec3{-1, 1, 1}) < 1e-9);
}

TEST_CASE("direction consistency on the base plane") {
  for (const fib::FibrationSpec& spec :
       {fib::makeHopf(1), fib::makeDegenerate(3), fib::makeCappedAtan(),
        fib::makeGlued()}) {
    for (Vec2 p : {Vec2{0.7, -1.3}, Vec2{-4, 2}, Vec2{0, 0}}) {
      Vec2 B = spec.brep().bmap.value(p);
      double n = std::sqrt(1.0 + dot(B, B));
      UnitVec3 u = fib::direction(spec, {p.x, p.y, 0}, kCfg);
      CHECK(norm(u.vec() - Vec3{B.x / n, B.y / n, 1.0 / n}) <= 1e-10);
    }
  }
}

TEST_CASE("lineThrough hand examples") {
  fib::OrientedLine l = fib::lineThrough(fib::makeHopf(1), {0, 0, 0}, kCfg);
  CHECK(norm(l.u.vec() - Vec3{0, 0, 1}) < 1e-12);
  CHECK(norm(l.v) < 1e-12);

  CHECK(fib::baseFiberDistance(fib::makeCappedAtan(), {1, 0}) ==
        doctest::Approx(1.0).epsilon(1e-12));

  l = fib::lineThrough(fib::makePlanarLinear(), {0, 1, 0}, kCfg);
  CHECK(norm(l.u.vec() - UnitVec3::normalize({-1, 0, 1}).vec()) < 1e-9);
  CHECK(norm(l.v - Vec3{0, 1, 0}) < 1e-9);
  CHECK(std::abs(dot(l.u, l.v)) <= 1e-10);
}

TEST_CASE("lines pass through their defining points") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (const fib::FibrationSpec& spec :
       {fib::makeHopf(1), fib::makeCappedAtan(), fib::makePlanarLinear()}) {
    for (int i = 0; i < 50; ++i) {
      Vec3 x{dist(rng), dist(rng), dist(rng)};
      CHECK(pointLineDistance(x, fib::lineThrough(spec, x, kCfg)) <= 1e-8);
    }
  }
}

TEST_CASE("certifySkew verdicts") {
  fib::GridSpec grid;  // 21x21 over [-5,5]^2
  Certificate hopf = fib::certifySkew(fib::makeHopf(1), grid);
  CHECK(hopf.pass());
  CHECK(hopf.sigma == 1);
  CHECK(hopf.margin == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(fib::certifySkew(fib::makeHopf(-1), grid).sigma == -1);

  Certificate glued = fib::certifySkew(fib::makeGlued(), grid);
  CHECK_FALSE(glued.pass());
  REQUIRE_FALSE(glued.witnesses.empty());
  // the parallel pair lives in the closed left half-plane
  CHECK(glued.witnesses[0].data[0] <= 0.0);
  CHECK(glued.witnesses[0].data[2] <= 0.0);

  CHECK(fib::certifySkew(fib::makeDegenerate(3), grid).pass());
}

TEST_CASE("certifySkew pair budget is deterministic in the seed") {
  fib::GridSpec grid;
  fib::FibrationSpec capped = fib::makeCappedAtan();
  Certificate a = fib::certifySkew(capped, grid, 5000, 42);
  Certificate b = fib::certifySkew(capped, grid, 5000, 42);
  CHECK(a.pass());
  CHECK(a.margin == b.margin);
}

TEST_CASE("certifyNondegenerate verdicts") {
  fib::GridSpec grid;
  Certificate hopf = fib::certifyNondegenerate(fib::makeHopf(1), grid);
  CHECK(hopf.pass());
  CHECK(hopf.sigma == 1);
  // hopf discriminant is exactly -4 everywhere; margin reports max Delta
  CHECK(hopf.margin == doctest::Approx(-4.0).epsilon(1e-12));

  Certificate deg = fib::certifyNondegenerate(fib::makeDegenerate(3), grid);
  CHECK_FALSE(deg.pass());
  REQUIRE_FALSE(deg.witnesses.empty());
  CHECK(norm(Vec2{deg.witnesses[0].data[0], deg.witnesses[0].data[1]}) < 1e-12);

  Certificate capped = fib::certifyNondegenerate(fib::makeCappedAtan(), grid);
  CHECK(capped.pass());
  CHECK(capped.sigma == 1);
}

TEST_CASE("nondegenerate implies skew with matching sigma") {
  fib::GridSpec grid;
  for (const fib::FibrationSpec& spec :
       {fib::makeHopf(1), fib::makeHopf(-1), fib::makeDegenerate(3),
        fib::makeCappedAtan(), fib::makeGlued()}) {
    Certificate nd = fib::certifyNondegenerate(spec, grid);
    Certificate sk = fib::certifySkew(spec, grid);
    INFO("spec ", spec.label());
    if (nd.pass()) {
      CHECK(sk.pass());
      CHECK(sk.sigma == nd.sigma);
    }
  }
}

TEST_CASE("implicit-solve Jacobian determinant closed form") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int k : {3, 5}) {
    fib::FibrationSpec spec = fib::makeDegenerate(k);
    for (int i = 0; i < 100; ++i) {
      Vec2 p{dist(rng), dist(rng)};
      double z = dist(rng);
      Mat2 dB = fib::evalB(spec, p).jacobian;
      Mat2 J = Mat2::identity() + z * dB;
      double expected =
          1.0 + k * k * z * z * std::pow(p.x * p.y, k - 1);
      CHECK(std::abs(J.det() - expected) <= 1e-8);
    }
  }
}

TEST_CASE("certifyCovering verdicts") {
  std::vector<double> radii{1, 2, 5, 10, 20};
  Certificate capped = fib::certifyCovering(fib::makeCappedAtan(), radii);
  CHECK(capped.pass());
  REQUIRE(capped.series.size() == radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i)
    CHECK(capped.series[i] == doctest::Approx(radii[i]).epsilon(1e-9));

  Certificate hopf = fib::certifyCovering(fib::makeHopf(1), radii);
  CHECK(hopf.pass());
  for (std::size_t i = 1; i < hopf.series.size(); ++i)
    CHECK(hopf.series[i] >= hopf.series[i - 1]);

  // negative control: B(p) = -p sends every fiber through (0,0,1), so the
  // fiber distance stays bounded by 1
  fib::FibrationSpec bent("negative-control",
                          fib::BRep{fib::Frame::standard(),
                                    fib::BMap::expressions(
                                        expr::parse("-p1", {"p1", "p2"}),
                                        expr::parse("-p2", {"p1", "p2"}))});
  Certificate neg = fib::certifyCovering(bent, radii);
  CHECK_FALSE(neg.pass());
  for (double d : neg.series) CHECK(d <= 1.0 + 1e-9);
}

TEST_CASE("directionImage circumcenters") {
  fib::DirectionImage img =
      fib::directionImage(fib::makeHopf(1), fib::GridSpec{41, 20.0});
  CHECK(norm(img.circumcenter.vec() - Vec3{0, 0, 1}) <= 1e-4);
  CHECK(std::abs(img.radius - kPi / 2) <= 0.05);

  img = fib::directionImage(fib::makeDegenerate(3), fib::GridSpec{21, 5.0});
  CHECK(norm(img.circumcenter.vec() - Vec3{0, 0, 1}) <= 1e-4);
}

TEST_CASE("continuity at infinity") {
  Certificate hopf = fib::probeContinuityAtInfinity(
      fib::makeHopf(1), UnitVec3({0, 0, 1}), {{1, 0, 0}}, {10, 100, 1000, 10000},
      kCfg);
  CHECK(hopf.pass());
  CHECK(hopf.series.back() < 0.01);

  Certificate twist = fib::probeContinuityAtInfinity(
      fib::makePlanarTwist(expr::parse("y", {"y"})), UnitVec3({0, 0, 1}),
      {{0, 1, 0}}, {10, 100, 1000, 10000}, kCfg);
  CHECK_FALSE(twist.pass());
  CHECK(twist.series.back() == doctest::Approx(1.0).epsilon(1e-6));

  Certificate axis = fib::probeContinuityAtInfinity(
      fib::makeCappedAtan(), UnitVec3({0, 0, 1}), {{0, 0, 0}}, {10, 100}, kCfg);
  CHECK(axis.pass());
  CHECK(axis.series.back() <= 1e-9);
}

TEST_CASE("verifyLineField") {
  fib::Grid3Spec grid{9, 5.0, {}};
  Certificate pl = fib::verifyLineField(fib::makePlanarLinear(), grid, kCfg);
  CHECK(pl.pass());
  CHECK(pl.margin <= 1e-9);

  Certificate tw = fib::verifyLineField(fib::makePlanarTwist(expr::parse("y", {"y"})),
                                        grid, kCfg);
  CHECK(tw.pass());
  CHECK(tw.margin <= 1e-9);

  // radial rays are straight lines even though they do not fiber R^3
  fib::FibrationSpec radial = fib::makeVField(
      expr::parse("x", {"x", "y", "z"}), expr::parse("y", {"x", "y", "z"}),
      expr::parse("z", {"x", "y", "z"}), "radial");
  fib::Grid3Spec off{9, 5.0, {0.5, 0.5, 0.5}};  // avoid the origin
  CHECK(fib::verifyLineField(radial, off, kCfg).pass());
}

TEST_CASE("expression BMap jets match finite differences on a grid") {
  fib::FibrationSpec spec("expr-hopf-like",
                          fib::BRep{fib::Frame::standard(),
                                    fib::BMap::expressions(
                                        expr::parse("-p2 - p1*p2/8", {"p1", "p2"}),
                                        expr::parse("p1 + p2^2/9", {"p1", "p2"}))});
  for (Vec2 p : fib::GridSpec{21, 3.0}.points()) {
    fib::Jet2 j = fib::evalB(spec, p);
    std::vector<double> fd = fdJacobian(
        [&](const std::vector<double>& q) {
          Vec2 b = spec.brep().bmap.value({q[0], q[1]});
          return std::vector<double>{b.x, b.y};
        },
        {p.x, p.y}, 1e-5);
    CHECK(std::abs(j.jacobian.a11 - fd[0]) <= 1e-5);
    CHECK(std::abs(j.jacobian.a12 - fd[1]) <= 1e-5);
    CHECK(std::abs(j.jacobian.a21 - fd[2]) <= 1e-5);
    CHECK(std::abs(j.jacobian.a22 - fd[3]) <= 1e-5);
  }
}

TEST_CASE("recordSigma traps contradictions") {
  fib::FibrationSpec hopf = fib::makeHopf(1);
  hopf.recordSigma(1);
  CHECK(hopf.cachedSigma() == 1);
  CHECK_NOTHROW(hopf.recordSigma(1));
  CHECK_THROWS_AS(hopf.recordSigma(-1), InconsistentChecks);
}
