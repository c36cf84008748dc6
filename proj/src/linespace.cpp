#include "skewfib/linespace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skewfib/parallel.hpp"

namespace skewfib::lines {

namespace {
constexpr double kTangentTol = 1e-8;
constexpr double kPi = 3.14159265358979323846;

Vec3 embed(Vec2 h) { return {h.x, h.y, 0.0}; }

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}
}  // namespace

double qForm(const TangentTS2& t) {
  const Vec3 u = t.base.u.vec();
  if (std::abs(dot(t.zeta1, u)) > kTangentTol || std::abs(dot(t.zeta2, u)) > kTangentTol)
    throw NonTangent();
  return det3(t.zeta1, u, t.zeta2);
}

std::array<double, 4> qFormEigenvalues(const fib::OrientedLine& line) {
  const Vec3 u = line.u.vec();
  // orthonormal basis of u-perp
  Vec3 seed = std::abs(u.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e = UnitVec3::normalize(cross(u, seed)).vec();
  Vec3 f = cross(u, e);

  // tangent basis (e,0), (f,0), (0,e), (0,f); bilinear form from polarization
  std::array<std::pair<Vec3, Vec3>, 4> basis{
      std::pair{e, Vec3{}}, {f, Vec3{}}, {Vec3{}, e}, {Vec3{}, f}};
  std::vector<double> gram(16, 0.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      gram[static_cast<std::size_t>(4 * i + j)] =
          0.5 * (det3(basis[static_cast<std::size_t>(i)].first, u,
                      basis[static_cast<std::size_t>(j)].second) +
                 det3(basis[static_cast<std::size_t>(j)].first, u,
                      basis[static_cast<std::size_t>(i)].second));
  std::vector<double> ev = symEigenvalues(4, gram);
  return {ev[0], ev[1], ev[2], ev[3]};
}

Chart chart(const fib::FibrationSpec& spec, Vec2 p) {
  fib::Jet2 jet = fib::evalB(spec, p);
  Vec2 B = jet.value;
  double n2 = 1.0 + dot(B, B);
  double n = std::sqrt(n2);
  if (1.0 / n < 1e-6) throw NearHorizontalFiber(1.0 / n);

  Chart c;
  c.u = {B.x / n, B.y / n, 1.0 / n};
  c.u_vertical = 1.0 / n;

  Vec3 pe = embed(p);
  c.v = pe - dot(pe, c.u) * c.u;

  for (int k = 0; k < 2; ++k) {
    Vec2 h = (k == 0) ? Vec2{1, 0} : Vec2{0, 1};
    Vec2 dBh{jet.jacobian.a11 * h.x + jet.jacobian.a12 * h.y,
             jet.jacobian.a21 * h.x + jet.jacobian.a22 * h.y};
    double dn = dot(B, dBh) / n;
    Vec3 w{B.x, B.y, 1.0};
    Vec3 dw{dBh.x, dBh.y, 0.0};
    Vec3 du = (1.0 / n) * dw - (dn / n2) * w;
    c.du[static_cast<std::size_t>(k)] = du;
    c.dv[static_cast<std::size_t>(k)] =
        embed(h) - dot(embed(h), c.u) * c.u - dot(pe, du) * c.u - dot(pe, c.u) * du;
  }
  return c;
}

Vec3 applyColumns(const std::array<Vec3, 2>& cols, Vec2 h) {
  return h.x * cols[0] + h.y * cols[1];
}

Vec3 dvFull(const Chart& c, Vec2 p, Vec2 h) {
  Vec3 pe = embed(p);
  Vec3 duh = applyColumns(c.du, h);
  return embed(h) - dot(embed(h), c.u) * c.u - dot(pe, duh) * c.u - dot(pe, c.u) * duh;
}

double pullbackQ(const Chart& c, Vec2 h) {
  return det3(applyColumns(c.du, h), c.u, embed(h));
}

double pullbackQ(const fib::FibrationSpec& spec, Vec2 p, Vec2 h) {
  return pullbackQ(chart(spec, p), h);
}

double pullbackQFull(const Chart& c, Vec2 p, Vec2 h) {
  return det3(applyColumns(c.du, h), c.u, dvFull(c, p, h));
}

namespace {
std::vector<Vec2> directionSet(int directions) {
  std::vector<Vec2> hs;
  hs.reserve(static_cast<std::size_t>(directions));
  for (int k = 0; k < directions; ++k) {
    double a = kPi * static_cast<double>(k) / directions;  // lines, not rays
    hs.push_back({std::cos(a), std::sin(a)});
  }
  return hs;
}
}  // namespace

Certificate verifyClaim(const fib::FibrationSpec& spec, const fib::GridSpec& grid,
                        int directions) {
  std::vector<Vec2> pts = grid.points();
  std::vector<Vec2> hs = directionSet(directions);

  struct PointErr {
    double err;      // scaled discrepancy
    double q, rhs;   // worst pair at this point
    int hidx;
  };
  std::vector<PointErr> errs = par::mapIndex<PointErr>(pts.size(), [&](std::size_t i) {
    fib::Jet2 jet = fib::evalB(spec, pts[i]);
    Chart c = chart(spec, pts[i]);
    PointErr worst{-1.0, 0.0, 0.0, 0};
    for (std::size_t k = 0; k < hs.size(); ++k) {
      Vec2 h = hs[k];
      Vec2 dBh{jet.jacobian.a11 * h.x + jet.jacobian.a12 * h.y,
               jet.jacobian.a21 * h.x + jet.jacobian.a22 * h.y};
      // the chart satisfies <u,V0>^2 det(h, dB h) = det(du h, u, h) exactly
      double q = c.u_vertical * c.u_vertical * det2(h, dBh);
      double rhs = pullbackQ(c, h);
      double scale = std::max({std::abs(q), std::abs(rhs), 1e-3});
      double err = std::abs(q - rhs) / scale;
      if (err > worst.err) worst = {err, q, rhs, static_cast<int>(k)};
    }
    return worst;
  });

  Certificate cert;
  cert.property = "claim-identity";
  cert.grid = grid.describe() + " x " + std::to_string(directions) + " directions";
  cert.tolerances = "relative error <= 1e-06 (absolute 1e-09 near zeros)";
  std::size_t worst = 0;
  for (std::size_t i = 1; i < errs.size(); ++i)
    if (errs[i].err > errs[worst].err) worst = i;
  const PointErr& w = errs[worst];
  double abs_err = std::abs(w.q - w.rhs);
  bool ok = (w.err <= 1e-6) || (abs_err <= 1e-9);
  cert.margin = w.err;
  cert.verdict = ok ? Verdict::Pass : Verdict::Fail;
  if (!ok)
    cert.witnesses.push_back(
        {"point-direction",
         {pts[worst].x, pts[worst].y, hs[static_cast<std::size_t>(w.hidx)].x,
          hs[static_cast<std::size_t>(w.hidx)].y, w.q, w.rhs},
         w.err});
  return cert;
}

Certificate definitenessOnM(const fib::FibrationSpec& spec, const fib::GridSpec& grid) {
  std::vector<Vec2> pts = grid.points();
  std::vector<Vec2> hs = directionSet(8);

  struct PointRange {
    double lo, hi;  // signed range of f*Q over directions
  };
  std::vector<PointRange> ranges = par::mapIndex<PointRange>(pts.size(), [&](std::size_t i) {
    Chart c = chart(spec, pts[i]);
    PointRange r{1e300, -1e300};
    for (Vec2 h : hs) {
      double q = pullbackQ(c, h);
      r.lo = std::min(r.lo, q);
      r.hi = std::max(r.hi, q);
    }
    return r;
  });

  constexpr double kZero = 1e-12;
  double lo = 1e300, hi = -1e300;
  std::size_t lo_idx = 0, hi_idx = 0;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].lo < lo) { lo = ranges[i].lo; lo_idx = i; }
    if (ranges[i].hi > hi) { hi = ranges[i].hi; hi_idx = i; }
  }

  Certificate cert;
  cert.property = "definiteness-on-M";
  cert.grid = grid.describe() + " x 8 directions";
  cert.tolerances = "min |f*Q| > " + fmt(kZero) + ", single sign";
  if (lo > kZero) {
    cert.verdict = Verdict::Pass;
    cert.sigma = 1;
    cert.margin = lo;
  } else if (hi < -kZero) {
    cert.verdict = Verdict::Pass;
    cert.sigma = -1;
    cert.margin = -hi;
  } else {
    cert.verdict = Verdict::Fail;
    cert.margin = std::min(std::abs(lo), std::abs(hi));
    std::size_t bad = std::abs(lo) <= std::abs(hi) ? lo_idx : hi_idx;
    cert.witnesses.push_back({"point", {pts[bad].x, pts[bad].y},
                              std::abs(lo) <= std::abs(hi) ? lo : hi});
  }

  Certificate nd = fib::certifyNondegenerate(spec, grid);
  if (nd.verdict != cert.verdict)
    throw InconsistentChecks("definiteness on M disagrees with the eigenvalue check");
  if (cert.pass()) spec.recordSigma(cert.sigma);
  return cert;
}

}  // namespace skewfib::lines
