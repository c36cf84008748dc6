#include "skewfib/fibration.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "skewfib/parallel.hpp"

namespace skewfib::fib {

namespace {
constexpr double kOrthoTol = 1e-12;

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}
}  // namespace

Frame::Frame(Vec3 origin, UnitVec3 e1, UnitVec3 e2, UnitVec3 e3)
    : origin_(origin), e1_(e1), e2_(e2), e3_(e3) {
  if (std::abs(dot(e1, e2)) > kOrthoTol || std::abs(dot(e1, e3)) > kOrthoTol ||
      std::abs(dot(e2, e3)) > kOrthoTol)
    throw DomainError("Frame: axes not orthogonal");
  if (std::abs(det3(e1.vec(), e2.vec(), e3.vec()) - 1.0) > 1e-12)
    throw DomainError("Frame: axes not right-handed");
}

Frame Frame::standard() {
  return Frame({0, 0, 0}, UnitVec3({1, 0, 0}), UnitVec3({0, 1, 0}), UnitVec3({0, 0, 1}));
}

Vec3 Frame::world(Vec2 p, double height) const {
  return origin_ + p.x * e1_.vec() + p.y * e2_.vec() + height * e3_.vec();
}

Vec3 Frame::toFrame(Vec3 world_point) const {
  Vec3 d = world_point - origin_;
  return {dot(d, e1_), dot(d, e2_), dot(d, e3_)};
}

Vec3 Frame::worldVector(Vec3 f) const {
  return f.x * e1_.vec() + f.y * e2_.vec() + f.z * e3_.vec();
}

Vec3 Frame::frameVector(Vec3 w) const { return {dot(w, e1_), dot(w, e2_), dot(w, e3_)}; }

OrientedLine lineFromPointDirection(Vec3 a, UnitVec3 u) {
  Vec3 v = a - dot(a, u) * u.vec();
  return OrientedLine{u, v};
}

// ---------------------------------------------------------------------------
// BMap

BMap BMap::hopf(int sigma) {
  if (sigma != 1 && sigma != -1) throw ConfigError("hopf: sigma must be +-1");
  BMap b;
  b.kind_ = Kind::Hopf;
  b.sigma_ = sigma;
  return b;
}

BMap BMap::degenerate(int k) {
  if (k <= 1 || k % 2 == 0) throw ConfigError("degenerate: k must be odd and > 1");
  BMap b;
  b.kind_ = Kind::Degenerate;
  b.k_ = k;
  return b;
}

BMap BMap::capped(expr::Expr f) {
  if (f.variableCount() != 1) throw ConfigError("capped: f must use the single variable s");
  double f0 = f.eval({0.0});
  if (std::abs(f0) > 1e-12) throw ConfigError("capped: f(0) must be 0");
  expr::Dual d0 = f.evalDual({0.0});
  if (!(d0.partials[0] > 0.0)) throw ConfigError("capped: f'(0) must be positive");
  BMap b;
  b.kind_ = Kind::Capped;
  b.f_ = std::move(f);
  b.f_prime0_ = d0.partials[0];
  return b;
}

BMap BMap::cappedAtan() { return capped(expr::parse("atan(s)", {"s"})); }

BMap BMap::glued() {
  BMap b;
  b.kind_ = Kind::Glued;
  return b;
}

BMap BMap::expressions(expr::Expr b1, expr::Expr b2) {
  if (b1.variableCount() != 2 || b2.variableCount() != 2)
    throw ConfigError("expression B-map components must use variables (p1, p2)");
  BMap b;
  b.kind_ = Kind::Expressions;
  b.b1_ = std::move(b1);
  b.b2_ = std::move(b2);
  return b;
}

BMap BMap::hopfCombo(std::shared_ptr<const FibrationSpec> base, double t, int sigma) {
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("homotopy parameter must lie in [0,1]");
  if (!base || !base->isBMap()) throw WrongRepresentation("homotopy needs a B-map base");
  BMap b;
  b.kind_ = Kind::HopfCombo;
  b.base_ = std::move(base);
  b.t_ = t;
  b.sigma_ = sigma;
  return b;
}

BMap BMap::rebased(std::shared_ptr<const FibrationSpec> base, Frame new_frame,
                   SolverConfig cfg) {
  if (!base) throw ConfigError("rebased: missing base spec");
  BMap b;
  b.kind_ = Kind::Rebased;
  b.base_ = std::move(base);
  b.new_frame_ = new_frame;
  b.rebase_cfg_ = cfg;
  return b;
}

Vec2 BMap::value(Vec2 p) const {
  switch (kind_) {
    case Kind::Hopf:
      return static_cast<double>(sigma_) * perp(p);
    case Kind::Degenerate: {
      auto powk = [&](double v) {
        double acc = 1.0;
        for (int i = 0; i < k_; ++i) acc *= v;
        return acc;
      };
      return {-powk(p.y), powk(p.x)};
    }
    case Kind::Capped: {
      double s = norm(p);
      if (s < 1e-8) return f_prime0_ * perp(p);
      double f = f_.eval({s});
      return (f / s) * perp(p);
    }
    case Kind::Glued:
      if (p.x >= 0.0) return {-p.y, p.x * p.x * p.x};
      return {-p.y, 0.0};
    case Kind::Expressions:
      return {b1_.eval({p.x, p.y}), b2_.eval({p.x, p.y})};
    case Kind::HopfCombo: {
      Vec2 vb = base_->brep().bmap.value(p);
      return (1.0 - t_) * vb + (t_ * sigma_) * perp(p);
    }
    case Kind::Rebased: {
      UnitVec3 u = direction(*base_, new_frame_->world(p, 0.0), rebase_cfg_);
      double c = dot(u, new_frame_->e3());
      if (c < 1e-6) throw NearHorizontalFiber(c);
      return {dot(u, new_frame_->e1()) / c, dot(u, new_frame_->e2()) / c};
    }
  }
  throw WrongRepresentation("bad B-map kind");
}

Jet2 BMap::jet(Vec2 p) const {
  switch (kind_) {
    case Kind::Hopf: {
      double s = static_cast<double>(sigma_);
      return {s * perp(p), s * Mat2::rot90()};
    }
    case Kind::Degenerate: {
      auto powi = [](double v, int e) {
        double acc = 1.0;
        for (int i = 0; i < e; ++i) acc *= v;
        return acc;
      };
      double kk = static_cast<double>(k_);
      Mat2 jac{0.0, -kk * powi(p.y, k_ - 1), kk * powi(p.x, k_ - 1), 0.0};
      return {{-powi(p.y, k_), powi(p.x, k_)}, jac};
    }
    case Kind::Capped: {
      double s = norm(p);
      if (s < 1e-7)
        return {f_prime0_ * perp(p), f_prime0_ * Mat2::rot90()};
      expr::Dual fd = f_.evalDual({s});
      double f = fd.value, fp = fd.partials[0];
      double s3 = s * s * s;
      Mat2 jac{p.x * p.y * (f - s * fp) / s3,
               (-p.y * p.y * s * fp - p.x * p.x * f) / s3,
               (p.x * p.x * s * fp + p.y * p.y * f) / s3,
               p.x * p.y * (s * fp - f) / s3};
      return {(f / s) * perp(p), jac};
    }
    case Kind::Glued: {
      // p1 >= 0 branch is the closed one; at the kink its Jacobian agrees
      // with the flat branch
      if (p.x >= 0.0)
        return {{-p.y, p.x * p.x * p.x}, Mat2{0.0, -1.0, 3.0 * p.x * p.x, 0.0}};
      return {{-p.y, 0.0}, Mat2{0.0, -1.0, 0.0, 0.0}};
    }
    case Kind::Expressions: {
      expr::Dual d1 = b1_.evalDual({p.x, p.y});
      expr::Dual d2 = b2_.evalDual({p.x, p.y});
      return {{d1.value, d2.value},
              Mat2{d1.partials[0], d1.partials[1], d2.partials[0], d2.partials[1]}};
    }
    case Kind::HopfCombo: {
      Jet2 jb = base_->brep().bmap.jet(p);
      double s = static_cast<double>(sigma_);
      return {(1.0 - t_) * jb.value + (t_ * s) * perp(p),
              (1.0 - t_) * jb.jacobian + (t_ * s) * Mat2::rot90()};
    }
    case Kind::Rebased: {
      double h = rebase_cfg_.fd_step;
      Vec2 fx1 = value({p.x + h, p.y}), fx0 = value({p.x - h, p.y});
      Vec2 fy1 = value({p.x, p.y + h}), fy0 = value({p.x, p.y - h});
      Mat2 jac{(fx1.x - fx0.x) / (2 * h), (fy1.x - fy0.x) / (2 * h),
               (fx1.y - fx0.y) / (2 * h), (fy1.y - fy0.y) / (2 * h)};
      return {value(p), jac};
    }
  }
  throw WrongRepresentation("bad B-map kind");
}

std::string BMap::describe() const {
  switch (kind_) {
    case Kind::Hopf: return sigma_ > 0 ? "hopf(+1)" : "hopf(-1)";
    case Kind::Degenerate: return "degenerate(k=" + std::to_string(k_) + ")";
    case Kind::Capped: return "capped(" + f_.print() + ")";
    case Kind::Glued: return "glued";
    case Kind::Expressions: return "exprs(" + b1_.print() + ", " + b2_.print() + ")";
    case Kind::HopfCombo:
      return "homotopy(t=" + fmt(t_) + ", base=" + base_->label() + ")";
    case Kind::Rebased: return "rebased(" + base_->label() + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// FibrationSpec

FibrationSpec::FibrationSpec(std::string label, BRep rep)
    : label_(std::move(label)), brep_(std::move(rep)) {}

FibrationSpec::FibrationSpec(std::string label, VFieldRep rep)
    : label_(std::move(label)), vrep_(std::move(rep)) {}

FibrationSpec::FibrationSpec(const FibrationSpec& other)
    : label_(other.label_), brep_(other.brep_), vrep_(other.vrep_) {
  sigma_cache_.store(other.sigma_cache_.load());
}

const BRep& FibrationSpec::brep() const {
  if (!brep_) throw WrongRepresentation(label_ + " is not B-map represented");
  return *brep_;
}

const VFieldRep& FibrationSpec::vrep() const {
  if (!vrep_) throw WrongRepresentation(label_ + " is not V-field represented");
  return *vrep_;
}

void FibrationSpec::recordSigma(int sigma) const {
  int expected = 0;
  if (sigma_cache_.compare_exchange_strong(expected, sigma)) return;
  if (expected != sigma)
    throw InconsistentChecks("orientation changed between checks on " + label_);
}

FibrationSpec makeHopf(int sigma) {
  return FibrationSpec(sigma > 0 ? "hopf(+1)" : "hopf(-1)",
                       BRep{Frame::standard(), BMap::hopf(sigma)});
}

FibrationSpec makeDegenerate(int k) {
  return FibrationSpec("degenerate(k=" + std::to_string(k) + ")",
                       BRep{Frame::standard(), BMap::degenerate(k)});
}

FibrationSpec makeCappedAtan() {
  return FibrationSpec("capped(atan)", BRep{Frame::standard(), BMap::cappedAtan()});
}

FibrationSpec makeGlued() {
  return FibrationSpec("glued", BRep{Frame::standard(), BMap::glued()});
}

FibrationSpec makePlanarLinear() {
  VFieldRep rep{{expr::parse("-y", {"x", "y", "z"}), expr::parse("0", {"x", "y", "z"}),
                 expr::parse("1", {"x", "y", "z"})}};
  return FibrationSpec("planar_linear", std::move(rep));
}

FibrationSpec makePlanarTwist(expr::Expr f) {
  if (f.variableCount() != 1)
    throw ConfigError("planar_twist: f must be parsed over the single variable y");
  std::string src = f.print();
  VFieldRep rep{{expr::parse("sin(" + src + ")", {"x", "y", "z"}),
                 expr::parse("0", {"x", "y", "z"}),
                 expr::parse("cos(" + src + ")", {"x", "y", "z"})}};
  return FibrationSpec("planar_twist(" + src + ")", std::move(rep));
}

FibrationSpec makeVField(expr::Expr vx, expr::Expr vy, expr::Expr vz, std::string label) {
  if (vx.variableCount() != 3 || vy.variableCount() != 3 || vz.variableCount() != 3)
    throw ConfigError("V-field components must be parsed over (x, y, z)");
  VFieldRep rep{{std::move(vx), std::move(vy), std::move(vz)}};
  return FibrationSpec(std::move(label), std::move(rep));
}

// ---------------------------------------------------------------------------
// grids

std::vector<Vec2> GridSpec::points() const {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = (n == 1) ? 0.0 : -extent + 2.0 * extent * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      double y = (n == 1) ? 0.0 : -extent + 2.0 * extent * j / (n - 1);
      pts.push_back({x, y});
    }
  }
  return pts;
}

std::string GridSpec::describe() const {
  return std::to_string(n) + "x" + std::to_string(n) + " over [-" + fmt(extent) + "," +
         fmt(extent) + "]^2";
}

std::vector<Vec3> Grid3Spec::points() const {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n) * n * n);
  auto coord = [&](int i) { return (n == 1) ? 0.0 : -extent + 2.0 * extent * i / (n - 1); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        pts.push_back(offset + Vec3{coord(i), coord(j), coord(k)});
  return pts;
}

std::string Grid3Spec::describe() const {
  return std::to_string(n) + "^3 over [-" + fmt(extent) + "," + fmt(extent) +
         "]^3 + offset (" + fmt(offset.x) + "," + fmt(offset.y) + "," + fmt(offset.z) + ")";
}

// ---------------------------------------------------------------------------
// evaluation

Jet2 evalB(const FibrationSpec& spec, Vec2 p) { return spec.brep().bmap.jet(p); }

Vec2 solveBaseFrameCoords(const BRep& rep, Vec3 fc, const SolverConfig& cfg,
                          const Vec2* hint) {
  Vec2 target{fc.x, fc.y};
  double z = fc.z;
  // Absolute residuals are unreachable once |target| is large; scale keeps
  // the stop criterion meaningful across the whole plane.
  SolverConfig local = cfg;
  local.residual_tol = cfg.residual_tol * (1.0 + norm(target));

  auto stageSolve = [&](double zj, Vec2 start) {
    auto F = [&](Vec2 p) { return p + zj * rep.bmap.value(p) - target; };
    auto J = [&](Vec2 p) { return Mat2::identity() + zj * rep.bmap.jet(p).jacobian; };
    return newton2(F, J, start, local);
  };

  // The scaled stop criterion can leave a residual well above rounding when
  // |target| is large; a few extra full steps drive it to the floor.
  auto polish = [&](Vec2 p) {
    auto F = [&](Vec2 q) { return q + z * rep.bmap.value(q) - target; };
    auto J = [&](Vec2 q) { return Mat2::identity() + z * rep.bmap.jet(q).jacobian; };
    double best = norm(F(p));
    for (int it = 0; it < 3 && best > 0.0; ++it) {
      Vec2 q;
      try {
        q = p - solve2(J(p), F(p));
      } catch (const Error&) {
        break;
      }
      double r = norm(F(q));
      if (!(r < best)) break;
      p = q;
      best = r;
    }
    return p;
  };

  if (hint) {
    try {
      return polish(stageSolve(z, *hint));
    } catch (const Error&) {
      // fall through to continuation
    }
  }

  auto continuation = [&](int stages) {
    Vec2 p = target;
    for (int j = 1; j <= stages; ++j) p = stageSolve(z * j / stages, p);
    return p;
  };

  if (z == 0.0) return target;
  int m = std::max(1, static_cast<int>(std::ceil(std::abs(z))));
  try {
    return polish(continuation(m));
  } catch (const NoConvergence&) {
    SolverConfig retry = local;
    retry.max_iters = local.max_iters * 2;
    local = retry;
    return polish(continuation(4 * m));
  }
}

Vec2 solveBase(const FibrationSpec& spec, Vec3 x, const SolverConfig& cfg) {
  const BRep& rep = spec.brep();
  return solveBaseFrameCoords(rep, rep.frame.toFrame(x), cfg);
}

namespace {
Vec3 vfieldRaw(const VFieldRep& rep, Vec3 x) {
  std::vector<double> pt{x.x, x.y, x.z};
  return {rep.components[0].eval(pt), rep.components[1].eval(pt), rep.components[2].eval(pt)};
}

UnitVec3 directionFromBase(const BRep& rep, Vec2 b_value) {
  double n = std::sqrt(1.0 + dot(b_value, b_value));
  Vec3 u_frame{b_value.x / n, b_value.y / n, 1.0 / n};
  return UnitVec3::normalize(rep.frame.worldVector(u_frame));
}
}  // namespace

UnitVec3 direction(const FibrationSpec& spec, Vec3 x, const SolverConfig& cfg) {
  if (spec.isBMap()) {
    const BRep& rep = spec.brep();
    Vec2 p = solveBaseFrameCoords(rep, rep.frame.toFrame(x), cfg);
    return directionFromBase(rep, rep.bmap.value(p));
  }
  return UnitVec3::normalize(vfieldRaw(spec.vrep(), x));
}

UnitVec3 directionWithHint(const FibrationSpec& spec, Vec3 x, const SolverConfig& cfg,
                           std::optional<Vec2>& hint) {
  if (!spec.isBMap()) return direction(spec, x, cfg);
  const BRep& rep = spec.brep();
  const Vec2* h = hint ? &*hint : nullptr;
  Vec2 p = solveBaseFrameCoords(rep, rep.frame.toFrame(x), cfg, h);
  hint = p;
  return directionFromBase(rep, rep.bmap.value(p));
}

OrientedLine lineThrough(const FibrationSpec& spec, Vec3 x, const SolverConfig& cfg) {
  if (spec.isBMap()) {
    const BRep& rep = spec.brep();
    Vec2 p = solveBaseFrameCoords(rep, rep.frame.toFrame(x), cfg);
    UnitVec3 u = directionFromBase(rep, rep.bmap.value(p));
    return lineFromPointDirection(rep.frame.world(p, 0.0), u);
  }
  return lineFromPointDirection(x, direction(spec, x, cfg));
}

double baseFiberDistance(const FibrationSpec& spec, Vec2 p) {
  const BRep& rep = spec.brep();
  UnitVec3 u = directionFromBase(rep, rep.bmap.value(p));
  Vec3 a = rep.frame.world(p, 0.0);
  return norm(a - dot(a, u) * u.vec());
}

// ---------------------------------------------------------------------------
// certificates

Certificate certifySkew(const FibrationSpec& spec, const GridSpec& grid,
                        std::size_t pair_budget, std::uint64_t seed) {
  const BRep& rep = spec.brep();
  std::vector<Vec2> pts = grid.points();
  const std::size_t n = pts.size();
  std::vector<Vec2> bvals =
      par::mapIndex<Vec2>(n, [&](std::size_t i) { return rep.bmap.value(pts[i]); });

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  const std::size_t total = n * (n - 1) / 2;
  if (pair_budget == 0 || pair_budget >= total) {
    pairs.reserve(total);
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
    pairs.reserve(pair_budget);
    while (pairs.size() < pair_budget) {
      std::uint32_t i = pick(rng), j = pick(rng);
      if (i != j) pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }

  // normalized pair determinant D / |p-q|^2
  std::vector<double> m = par::mapIndex<double>(pairs.size(), [&](std::size_t k) {
    auto [i, j] = pairs[k];
    Vec2 w = pts[i] - pts[j];
    double w2 = dot(w, w);
    if (w2 < 1e-24) return 1e300;  // coincident grid points, ignore
    return det2(w, bvals[i] - bvals[j]) / w2;
  });

  constexpr double kZero = 1e-12;
  double min_signed = 1e300, max_signed = -1e300, min_abs = 1e300;
  std::size_t min_abs_idx = 0, min_idx = 0, max_idx = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] >= 1e299) continue;
    if (m[k] < min_signed) { min_signed = m[k]; min_idx = k; }
    if (m[k] > max_signed) { max_signed = m[k]; max_idx = k; }
    if (std::abs(m[k]) < min_abs) { min_abs = std::abs(m[k]); min_abs_idx = k; }
  }

  Certificate cert;
  cert.property = "skew";
  cert.grid = grid.describe() + ", " + std::to_string(pairs.size()) + " pairs";
  cert.tolerances = "zero threshold " + fmt(kZero) + " on det(p-q, B(p)-B(q))/|p-q|^2";
  cert.margin = min_abs;

  auto witnessFor = [&](std::size_t k) {
    auto [i, j] = pairs[k];
    return Witness{"pair", {pts[i].x, pts[i].y, pts[j].x, pts[j].y}, m[k]};
  };

  if (min_signed > kZero) {
    cert.verdict = Verdict::Pass;
    cert.sigma = 1;
  } else if (max_signed < -kZero) {
    cert.verdict = Verdict::Pass;
    cert.sigma = -1;
  } else {
    cert.verdict = Verdict::Fail;
    cert.witnesses.push_back(witnessFor(min_abs_idx));
    if (min_signed < -kZero && max_signed > kZero) {
      cert.witnesses.push_back(witnessFor(min_idx));
      cert.witnesses.push_back(witnessFor(max_idx));
    }
  }
  if (cert.verdict == Verdict::Pass) spec.recordSigma(cert.sigma);
  return cert;
}

Certificate certifyNondegenerate(const FibrationSpec& spec, const GridSpec& grid) {
  const BRep& rep = spec.brep();
  std::vector<Vec2> pts = grid.points();
  const std::size_t n = pts.size();

  struct PointCheck {
    double delta;
    double det_s;
    int sigma;
  };
  std::vector<PointCheck> checks = par::mapIndex<PointCheck>(n, [&](std::size_t i) {
    Mat2 dB = rep.bmap.jet(pts[i]).jacobian;
    double tr = dB.trace();
    double delta = tr * tr - 4.0 * dB.det();
    double off = 0.5 * (dB.a22 - dB.a11);
    double det_s = dB.a21 * (-dB.a12) - off * off;
    double tr_s = dB.a21 - dB.a12;
    return PointCheck{delta, det_s, tr_s > 0 ? 1 : (tr_s < 0 ? -1 : 0)};
  });

  Certificate cert;
  cert.property = "nondegenerate";
  cert.grid = grid.describe();
  cert.tolerances = "discriminant must be < 0 at every grid point";

  double max_delta = -1e300;
  int sigma = 0;
  bool sigma_consistent = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = checks[i];
    // Delta = -4 det S algebraically; disagreement is an internal bug
    double scale = 1.0 + std::abs(c.delta);
    if (std::abs(c.delta + 4.0 * c.det_s) > 1e-9 * scale)
      throw InconsistentChecks("discriminant vs quadratic-form determinant");
    max_delta = std::max(max_delta, c.delta);
    if (c.delta < 0.0) {
      if (sigma == 0) sigma = c.sigma;
      else if (c.sigma != sigma) sigma_consistent = false;
    }
  }
  cert.margin = max_delta;
  if (max_delta < 0.0 && sigma_consistent) {
    cert.verdict = Verdict::Pass;
    cert.sigma = sigma;
    spec.recordSigma(sigma);
  } else {
    cert.verdict = Verdict::Fail;
    // report the failing points nearest the origin first: the most central
    // witness is the canonical one when the failure set is a curve
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < n; ++i)
      if (!(checks[i].delta < 0.0)) bad.push_back(i);
    std::stable_sort(bad.begin(), bad.end(), [&](std::size_t a, std::size_t b) {
      return dot(pts[a], pts[a]) < dot(pts[b], pts[b]);
    });
    if (bad.size() > 10) bad.resize(10);
    for (std::size_t i : bad)
      cert.witnesses.push_back({"point", {pts[i].x, pts[i].y}, checks[i].delta});
    if (!sigma_consistent)
      cert.witnesses.push_back({"orientation-flip", {}, 0.0});
  }
  return cert;
}

Certificate certifyCovering(const FibrationSpec& spec, const std::vector<double>& radii,
                            double threshold, int samples_per_radius) {
  if (radii.size() < 2) throw ConfigError("covering check needs at least two radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw ConfigError("radii must be increasing");

  Certificate cert;
  cert.property = "covering";
  cert.grid = std::to_string(radii.size()) + " radii x " +
              std::to_string(samples_per_radius) + " angles";
  cert.tolerances = "minima nondecreasing, final minimum >= " + fmt(threshold);

  std::vector<double> minima(radii.size());
  for (std::size_t r = 0; r < radii.size(); ++r) {
    std::vector<double> d = par::mapIndex<double>(
        static_cast<std::size_t>(samples_per_radius), [&](std::size_t k) {
          double ang = 2.0 * 3.14159265358979323846 * static_cast<double>(k) /
                       samples_per_radius;
          Vec2 p{radii[r] * std::cos(ang), radii[r] * std::sin(ang)};
          return baseFiberDistance(spec, p);
        });
    minima[r] = *std::min_element(d.begin(), d.end());
  }
  cert.series = minima;

  bool nondecreasing = true;
  std::size_t bad = 0;
  for (std::size_t i = 1; i < minima.size(); ++i) {
    if (minima[i] < minima[i - 1] - 1e-9) {
      nondecreasing = false;
      bad = i;
      break;
    }
  }
  cert.margin = minima.back();
  if (nondecreasing && minima.back() >= threshold) {
    cert.verdict = Verdict::Pass;
  } else {
    cert.verdict = Verdict::Fail;
    if (!nondecreasing)
      cert.witnesses.push_back({"radius", {radii[bad]}, minima[bad]});
    else
      cert.witnesses.push_back({"radius", {radii.back()}, minima.back()});
  }
  return cert;
}

DirectionImage directionImage(const FibrationSpec& spec, const GridSpec& grid,
                              double cap_tol) {
  const BRep& rep = spec.brep();
  std::vector<Vec2> pts = grid.points();
  std::vector<Vec3> raw = par::mapIndex<Vec3>(pts.size(), [&](std::size_t i) {
    return directionFromBase(rep, rep.bmap.value(pts[i])).vec();
  });
  std::vector<UnitVec3> samples;
  samples.reserve(raw.size());
  for (const Vec3& w : raw) samples.emplace_back(UnitVec3::normalize(w));
  SphericalCap cap = minEnclosingCap(samples, cap_tol);
  return DirectionImage{std::move(samples), cap.center, cap.radius};
}

Certificate probeContinuityAtInfinity(const FibrationSpec& spec, const UnitVec3& u,
                                      const std::vector<Vec3>& offsets,
                                      const std::vector<double>& radii,
                                      const SolverConfig& cfg, double angle_threshold) {
  if (offsets.empty() || radii.size() < 2)
    throw ConfigError("continuity probe needs offsets and at least two radii");

  Certificate cert;
  cert.property = "continuity-at-infinity";
  cert.grid = std::to_string(offsets.size()) + " offsets x " +
              std::to_string(radii.size()) + " radii";
  cert.tolerances = "final angle <= " + fmt(angle_threshold) + " rad, nonincreasing";

  bool pass = true;
  double worst_final = 0.0;
  for (const Vec3& w : offsets) {
    std::vector<double> angles = par::mapIndex<double>(radii.size(), [&](std::size_t k) {
      Vec3 x = radii[k] * u.vec() + w;
      return angleBetween(direction(spec, x, cfg), u);
    });
    for (double a : angles) cert.series.push_back(a);
    bool mono = true;
    for (std::size_t k = 1; k < angles.size(); ++k)
      if (angles[k] > angles[k - 1] + 1e-6) mono = false;
    worst_final = std::max(worst_final, angles.back());
    if (!(mono && angles.back() <= angle_threshold)) {
      pass = false;
      cert.witnesses.push_back({"offset", {w.x, w.y, w.z}, angles.back()});
    }
  }
  cert.margin = worst_final;
  cert.verdict = pass ? Verdict::Pass : Verdict::Fail;
  return cert;
}

Certificate verifyLineField(const FibrationSpec& spec, const Grid3Spec& grid,
                            const SolverConfig& cfg, double residual_tol) {
  const VFieldRep& rep = spec.vrep();
  std::vector<Vec3> pts = grid.points();
  double h = cfg.fd_step;

  std::vector<double> res = par::mapIndex<double>(pts.size(), [&](std::size_t i) {
    Vec3 x = pts[i];
    Vec3 v = UnitVec3::normalize(vfieldRaw(rep, x)).vec();
    Vec3 vp = UnitVec3::normalize(vfieldRaw(rep, x + h * v)).vec();
    Vec3 vm = UnitVec3::normalize(vfieldRaw(rep, x - h * v)).vec();
    return norm((1.0 / (2.0 * h)) * (vp - vm));
  });

  Certificate cert;
  cert.property = "line-field";
  cert.grid = grid.describe();
  cert.tolerances = "max |(dV)V| <= " + fmt(residual_tol) + " (step " + fmt(h) + ")";
  std::size_t worst = 0;
  for (std::size_t i = 1; i < res.size(); ++i)
    if (res[i] > res[worst]) worst = i;
  cert.margin = res[worst];
  if (res[worst] <= residual_tol) {
    cert.verdict = Verdict::Pass;
  } else {
    cert.verdict = Verdict::Fail;
    cert.witnesses.push_back(
        {"point", {pts[worst].x, pts[worst].y, pts[worst].z}, res[worst]});
  }
  return cert;
}

void vfieldJet(const FibrationSpec& spec, Vec3 x, Vec3& v_unit,
               std::array<std::array<double, 3>, 3>& dv) {
  const VFieldRep& rep = spec.vrep();
  std::vector<double> pt{x.x, x.y, x.z};
  expr::Dual w[3] = {rep.components[0].evalDual(pt), rep.components[1].evalDual(pt),
                     rep.components[2].evalDual(pt)};
  expr::Dual n2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
  expr::Dual n = expr::sqrt(n2);
  expr::Dual v[3] = {w[0] / n, w[1] / n, w[2] / n};
  v_unit = {v[0].value, v[1].value, v[2].value};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      dv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          v[i].partials[static_cast<std::size_t>(j)];
}

}  // namespace skewfib::fib
