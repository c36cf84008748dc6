#include "skewfib/contact.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "skewfib/parallel.hpp"

namespace skewfib::contact {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::vector<std::string> xyz() { return {"x", "y", "z"}; }

// orthonormal pair spanning the plane perpendicular to n
std::pair<Vec3, Vec3> perpBasis(Vec3 n) {
  Vec3 seed = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e = UnitVec3::normalize(cross(n, seed)).vec();
  Vec3 f = UnitVec3::normalize(cross(n, e)).vec();
  return {e, f};
}
}  // namespace

// ---------------------------------------------------------------------------
// OneForm

OneForm::OneForm(expr::Expr a, expr::Expr b, expr::Expr c, std::string label)
    : coeff_{std::move(a), std::move(b), std::move(c)}, label_(std::move(label)) {
  for (const auto& e : coeff_)
    if (e.variableCount() != 3)
      throw ConfigError("one-form coefficients must be parsed over (x, y, z)");
}

OneForm OneForm::standardTight() {
  return OneForm(expr::parse("-y", xyz()), expr::parse("x", xyz()),
                 expr::parse("1", xyz()), "dz + r^2 dtheta");
}

OneForm OneForm::planarTight() {
  return OneForm(expr::parse("-y", xyz()), expr::parse("0", xyz()),
                 expr::parse("1", xyz()), "dz - y dx");
}

OneForm OneForm::overtwisted() {
  // sin(r)/r with the series branch through r = 0 so dual evaluation stays
  // finite on the axis
  const std::string sinc =
      "piecewise(x^2 + y^2 - 1e-12, sin(sqrt(x^2 + y^2)) / sqrt(x^2 + y^2),"
      " 1 - (x^2 + y^2)/6)";
  return OneForm(expr::parse("-y * " + sinc, xyz()), expr::parse("x * " + sinc, xyz()),
                 expr::parse("cos(sqrt(x^2 + y^2 + 1e-300))", xyz()),
                 "cos r dz + r sin r dtheta");
}

Vec3 OneForm::coefficients(Vec3 x) const {
  std::vector<double> pt{x.x, x.y, x.z};
  return {coeff_[0].eval(pt), coeff_[1].eval(pt), coeff_[2].eval(pt)};
}

double OneForm::starAlphaDAlpha(Vec3 x) const {
  std::vector<double> pt{x.x, x.y, x.z};
  expr::Dual a = coeff_[0].evalDual(pt);
  expr::Dual b = coeff_[1].evalDual(pt);
  expr::Dual c = coeff_[2].evalDual(pt);
  double n2 = a.value * a.value + b.value * b.value + c.value * c.value;
  if (n2 < 1e-24) throw DomainError("one-form vanishes at a sampled point");
  return a.value * (c.partials[1] - b.partials[2]) +
         b.value * (a.partials[2] - c.partials[0]) +
         c.value * (b.partials[0] - a.partials[1]);
}

// ---------------------------------------------------------------------------
// contact function

Vec3 curlV(const fib::FibrationSpec& spec, Vec3 x, const SolverConfig& cfg) {
  const double h = cfg.fd_step;
  auto V = [&](Vec3 p) { return fib::direction(spec, p, cfg).vec(); };
  Vec3 dx = (1.0 / (2 * h)) * (V({x.x + h, x.y, x.z}) - V({x.x - h, x.y, x.z}));
  Vec3 dy = (1.0 / (2 * h)) * (V({x.x, x.y + h, x.z}) - V({x.x, x.y - h, x.z}));
  Vec3 dz = (1.0 / (2 * h)) * (V({x.x, x.y, x.z + h}) - V({x.x, x.y, x.z - h}));
  return {dy.z - dz.y, dz.x - dx.z, dx.y - dy.x};
}

double contactFunction(const fib::FibrationSpec& spec, Vec3 x, const SolverConfig& cfg) {
  Vec3 v = fib::direction(spec, x, cfg).vec();
  double c_fd = dot(curlV(spec, x, cfg), v);
  if (!spec.isBMap()) {
    Vec3 v_exact;
    std::array<std::array<double, 3>, 3> dv{};
    fib::vfieldJet(spec, x, v_exact, dv);
    Vec3 curl_ad{dv[2][1] - dv[1][2], dv[0][2] - dv[2][0], dv[1][0] - dv[0][1]};
    double c_ad = dot(curl_ad, v_exact);
    if (std::abs(c_fd - c_ad) > 1e-4 * (1.0 + std::abs(c_ad)))
      throw InconsistentChecks("finite-difference curl vs exact curl: " + fmt(c_fd) +
                               " vs " + fmt(c_ad));
  }
  return c_fd;
}

double contactTraceLocal(const fib::FibrationSpec& spec, Vec3 x, const SolverConfig& cfg) {
  const double h = cfg.fd_step;
  Vec3 v = fib::direction(spec, x, cfg).vec();
  auto [e1, e2] = perpBasis(v);
  auto dV = [&](Vec3 dir) {
    return (1.0 / (2 * h)) * (fib::direction(spec, x + h * dir, cfg).vec() -
                              fib::direction(spec, x - h * dir, cfg).vec());
  };
  return det3(e1, dV(e1), v) + det3(e2, dV(e2), v);
}

Certificate certifyContact(const fib::FibrationSpec& spec, const fib::Grid3Spec& grid,
                           const SolverConfig& cfg, double margin_threshold) {
  std::vector<Vec3> pts = grid.points();
  std::vector<double> c = par::mapIndex<double>(
      pts.size(), [&](std::size_t i) { return contactFunction(spec, pts[i], cfg); });

  Certificate cert;
  cert.property = "contact";
  cert.grid = grid.describe();
  cert.tolerances = "|c| >= " + fmt(margin_threshold) + ", single sign";

  std::size_t worst = 0;
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < c.size(); ++i) {
    lo = std::min(lo, c[i]);
    hi = std::max(hi, c[i]);
    // ties broken toward the origin so the witness of a vanishing locus is
    // its most central point
    if (std::abs(c[i]) < std::abs(c[worst]) ||
        (std::abs(c[i]) == std::abs(c[worst]) &&
         dot(pts[i], pts[i]) < dot(pts[worst], pts[worst])))
      worst = i;
  }
  cert.margin = std::abs(c[worst]);
  bool one_sign = (lo > 0.0) || (hi < 0.0);
  if (one_sign && cert.margin >= margin_threshold) {
    cert.verdict = Verdict::Pass;
    cert.sigma = lo > 0.0 ? 1 : -1;
  } else {
    cert.verdict = Verdict::Fail;
    Vec3 w = pts[worst];
    cert.witnesses.push_back({"point", {w.x, w.y, w.z}, c[worst]});
    cert.witnesses.push_back({"d-alpha-norm", {w.x, w.y, w.z}, norm(curlV(spec, w, cfg))});
  }
  return cert;
}

Certificate certifyContact(const OneForm& form, const fib::Grid3Spec& grid,
                           double margin_threshold) {
  std::vector<Vec3> pts = grid.points();
  std::vector<double> c = par::mapIndex<double>(
      pts.size(), [&](std::size_t i) { return form.starAlphaDAlpha(pts[i]); });

  Certificate cert;
  cert.property = "contact-form:" + form.label();
  cert.grid = grid.describe();
  cert.tolerances = "|*(a^da)| >= " + fmt(margin_threshold) + ", single sign";
  std::size_t worst = 0;
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < c.size(); ++i) {
    lo = std::min(lo, c[i]);
    hi = std::max(hi, c[i]);
    if (std::abs(c[i]) < std::abs(c[worst])) worst = i;
  }
  cert.margin = std::abs(c[worst]);
  if ((lo > 0.0 || hi < 0.0) && cert.margin >= margin_threshold) {
    cert.verdict = Verdict::Pass;
    cert.sigma = lo > 0.0 ? 1 : -1;
  } else {
    cert.verdict = Verdict::Fail;
    cert.witnesses.push_back({"point", {pts[worst].x, pts[worst].y, pts[worst].z},
                              c[worst]});
  }
  return cert;
}

// ---------------------------------------------------------------------------
// characteristic foliation

std::pair<Vec3, Vec3> sphereSingularities(const fib::FibrationSpec& spec, double r,
                                          const SolverConfig& cfg) {
  if (!(r > 0.0)) throw PreconditionFailed("sphere radius must be positive");
  Vec3 u0 = fib::direction(spec, {0, 0, 0}, cfg).vec();
  return {r * u0, -1.0 * r * u0};
}

Vec3 charFoliationField(const fib::FibrationSpec& spec, Vec3 x, double r,
                        const SolverConfig& cfg) {
  if (std::abs(norm(x) - r) > 1e-8)
    throw PreconditionFailed("point not on the sphere of radius " + fmt(r));
  Vec3 xhat = (1.0 / norm(x)) * x;
  return cross(xhat, fib::direction(spec, x, cfg).vec());
}

FoliationLeaf integrateLeaf(const fib::FibrationSpec& spec, double r, Vec3 x0,
                            const SolverConfig& cfg, double arc_step, int max_steps,
                            double longitude_limit, int store_stride) {
  if (std::abs(norm(x0) - r) > 1e-8)
    throw PreconditionFailed("leaf start not on the sphere");
  Vec3 u0 = fib::direction(spec, {0, 0, 0}, cfg).vec();
  auto [e, f] = perpBasis(u0);

  std::optional<Vec2> hint;
  auto field = [&](Vec3 x) {
    Vec3 xs = (r / norm(x)) * x;
    Vec3 xhat = (1.0 / r) * xs;
    return cross(xhat, fib::directionWithHint(spec, xs, cfg, hint).vec());
  };

  FoliationLeaf leaf;
  leaf.radius = r;
  Vec3 x = (r / norm(x0)) * x0;
  double prev_ang = std::atan2(dot(x, f), dot(x, e));
  double longitude = 0.0;

  auto record = [&](bool force) {
    if (force || leaf.steps % store_stride == 0) {
      leaf.points.push_back(x);
      leaf.longitudes.push_back(longitude);
    }
  };
  record(true);

  leaf.termination = LeafTermination::MaxSteps;
  for (int s = 0; s < max_steps; ++s) {
    Vec3 X = field(x);
    double nX = norm(X);
    if (!std::isfinite(nX)) throw FieldBlowup(static_cast<double>(s) * arc_step);
    if (nX < kEpsStop) {
      leaf.termination = dot(x, u0) >= 0.0 ? LeafTermination::SingularityPlus
                                           : LeafTermination::SingularityMinus;
      break;
    }
    // shrink toward the singularity so the local spiral stays resolved
    double h = std::min(arc_step, 0.2 * r * nX);
    auto unit = [&](Vec3 p) {
      Vec3 X2 = field(p);
      double n2 = norm(X2);
      return (n2 < 1e-300) ? Vec3{} : (1.0 / n2) * X2;
    };
    leaf.prev_longitude = longitude;
    leaf.prev_polar = std::acos(std::clamp(dot(x, u0) / r, -1.0, 1.0));
    Vec3 k1 = unit(x);
    Vec3 k2 = unit(x + (h / 2) * k1);
    Vec3 k3 = unit(x + (h / 2) * k2);
    Vec3 k4 = unit(x + h * k3);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    x = (r / norm(x)) * x;
    ++leaf.steps;

    double ang = std::atan2(dot(x, f), dot(x, e));
    double d = ang - prev_ang;
    if (d > kPi) d -= 2 * kPi;
    if (d < -kPi) d += 2 * kPi;
    longitude += d;
    prev_ang = ang;
    record(false);

    if (longitude_limit > 0.0 && std::abs(longitude) >= longitude_limit) {
      leaf.termination = LeafTermination::LongitudeWrap;
      break;
    }
  }
  leaf.longitude = longitude;
  double ch = std::clamp(dot(x, u0) / r, -1.0, 1.0);
  leaf.polar = std::acos(ch);
  if (leaf.points.back().x != x.x || leaf.points.back().y != x.y ||
      leaf.points.back().z != x.z)
    record(true);
  return leaf;
}

std::string to_string(LeafTermination t) {
  switch (t) {
    case LeafTermination::SingularityPlus: return "singularity+";
    case LeafTermination::SingularityMinus: return "singularity-";
    case LeafTermination::LongitudeWrap: return "longitude-wrap";
    case LeafTermination::MaxSteps: return "max-steps";
  }
  return "?";
}

namespace {
// Fibonacci sphere sampling for the simple-foliation precondition.
void checkSimpleFoliation(const fib::FibrationSpec& spec, double r, Vec3 u0,
                          const SolverConfig& cfg) {
  const int n = 2000;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<double> defect = par::mapIndex<double>(n, [&](std::size_t i) {
    double zc = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / n;
    double rho = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    double ang = golden * static_cast<double>(i);
    Vec3 xhat{rho * std::cos(ang), rho * std::sin(ang), zc};
    double axis_dist = std::acos(std::clamp(std::abs(dot(xhat, u0)), 0.0, 1.0));
    if (axis_dist < 0.15) return 1.0;  // near the expected singularities: fine
    Vec3 X = cross(xhat, fib::direction(spec, r * xhat, cfg).vec());
    return norm(X);  // sin of the tangency angle
  });
  for (std::size_t i = 0; i < defect.size(); ++i)
    if (defect[i] < std::sin(0.02))
      throw PreconditionFailed(
          "characteristic foliation is not simple: extra singularity detected "
          "(tangency defect " + fmt(defect[i]) + ")");
}

FoliationLeaf meridianLeaf(const fib::FibrationSpec& spec, double r, double phi, Vec3 u0,
                           Vec3 e, const SolverConfig& cfg, double arc_step,
                           int max_steps) {
  Vec3 x0 = r * (std::cos(phi) * u0 + std::sin(phi) * e);
  return integrateLeaf(spec, r, x0, cfg, arc_step, max_steps, 2 * kPi, 16);
}

ReturnMapRecord recordFromLeaf(const FoliationLeaf& leaf, double phi, Vec3 u0) {
  ReturnMapRecord rec;
  rec.phi = phi;
  rec.winding = leaf.longitude >= 0 ? 1 : -1;
  (void)u0;
  if (leaf.termination == LeafTermination::LongitudeWrap) {
    // interpolate the polar angle to longitude exactly +-2 pi using the last
    // integration step
    double ret = leaf.polar;
    double l1 = std::abs(leaf.prev_longitude), l2 = std::abs(leaf.longitude);
    if (l2 > l1) {
      double w = std::clamp((2 * kPi - l1) / (l2 - l1), 0.0, 1.0);
      ret = leaf.prev_polar + w * (leaf.polar - leaf.prev_polar);
    }
    rec.ret = ret;
    rec.status = "returned";
    rec.margin = std::abs(ret - phi);
  } else {
    rec.ret = leaf.polar;
    rec.status = to_string(leaf.termination);
    rec.margin = 1e300;  // terminated leaves are not closed
  }
  return rec;
}
}  // namespace

ScanResult scanClosedLeaves(const fib::FibrationSpec& spec, double r, int samples,
                            const SolverConfig& cfg, double step_scale, int max_steps) {
  if (samples < 2) throw ConfigError("meridian scan needs at least two samples");
  Vec3 u0 = fib::direction(spec, {0, 0, 0}, cfg).vec();
  auto [e, f] = perpBasis(u0);
  (void)f;
  checkSimpleFoliation(spec, r, u0, cfg);

  ScanResult out;
  out.radius = r;
  out.samples = samples;
  out.arc_step = step_scale * r;

  const double lo = 0.15, hi = kPi - 0.15;
  std::vector<double> phis(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i)
    phis[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (samples - 1);

  out.leaves = par::mapIndex<FoliationLeaf>(phis.size(), [&](std::size_t i) {
    return meridianLeaf(spec, r, phis[i], u0, e, cfg, out.arc_step, max_steps);
  });
  out.records.reserve(phis.size());
  for (std::size_t i = 0; i < phis.size(); ++i)
    out.records.push_back(recordFromLeaf(out.leaves[i], phis[i], u0));

  out.min_margin = 1e300;
  for (const auto& rec : out.records)
    if (rec.status == "returned") out.min_margin = std::min(out.min_margin, rec.margin);

  // closed-leaf candidate: near-fixed point of the return map plus a sign
  // change of R(phi) - phi in a bracket of returned samples
  for (std::size_t i = 0; i + 1 < out.records.size(); ++i) {
    const auto& a = out.records[i];
    const auto& b = out.records[i + 1];
    if (a.status != "returned" || b.status != "returned") continue;
    double ga = a.ret - a.phi, gb = b.ret - b.phi;
    if (ga * gb > 0.0) continue;
    if (std::min(std::abs(ga), std::abs(gb)) > kAngleTol) continue;
    // bisect to refine
    double pa = a.phi, pb = b.phi;
    for (int it = 0; it < 40 && (pb - pa) > 1e-5; ++it) {
      double pm = 0.5 * (pa + pb);
      FoliationLeaf leaf = meridianLeaf(spec, r, pm, u0, e, cfg, out.arc_step, max_steps);
      ReturnMapRecord rm = recordFromLeaf(leaf, pm, u0);
      if (rm.status != "returned") break;
      double gm = rm.ret - rm.phi;
      if (ga * gm <= 0.0) pb = pm; else { pa = pm; ga = gm; }
    }
    out.closed_candidate = true;
    out.candidate_phi = 0.5 * (pa + pb);
    break;
  }
  out.verdict = out.closed_candidate ? "closed-leaf candidate" : "no closed leaf found";
  return out;
}

HeightCriticalReport heightCriticalDiagnostic(const fib::FibrationSpec& spec,
                                              const std::vector<Vec3>& curve, double r,
                                              const SolverConfig& cfg) {
  if (curve.size() < 8) throw DegenerateCurve();
  for (const Vec3& p : curve)
    if (std::abs(norm(p) - r) > 1e-6 * std::max(1.0, r))
      throw PreconditionFailed("curve sample off the sphere");

  Vec3 u0 = fib::direction(spec, {0, 0, 0}, cfg).vec();
  std::size_t qi = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (dot(curve[i], u0) > dot(curve[qi], u0)) qi = i;

  HeightCriticalReport rep;
  rep.q = curve[qi];
  rep.height = dot(rep.q, u0);

  Vec3 uq = fib::direction(spec, rep.q, cfg).vec();
  Vec3 nrm = cross(u0, rep.q);
  double nn = norm(nrm);
  if (nn > 1e-12) {
    Vec3 nhat = (1.0 / nn) * nrm;
    rep.fiber_plane_angle = std::asin(std::clamp(std::abs(dot(uq, nhat)), 0.0, 1.0));
  }
  Vec3 cr = cross(uq, u0);
  double ncr = norm(cr);
  if (ncr < 1e-10) {
    rep.fiber_parallel_to_axis = true;
    rep.fiber_axis_distance = norm(rep.q - dot(rep.q, u0) * u0);
  } else {
    rep.fiber_axis_distance = std::abs(dot(rep.q, cr)) / ncr;
  }

  auto defectAt = [&](std::size_t i) {
    std::size_t n = curve.size();
    Vec3 tan = curve[(i + 1) % n] - curve[(i + n - 1) % n];
    double tn = norm(tan);
    if (tn < 1e-14) return 0.0;
    return std::abs(dot((1.0 / tn) * tan, fib::direction(spec, curve[i], cfg).vec()));
  };
  rep.tangency_defect_q = defectAt(qi);
  for (std::size_t i = 0; i < curve.size(); ++i)
    rep.max_tangency_defect = std::max(rep.max_tangency_defect, defectAt(i));

  if (rep.max_tangency_defect > kAngleTol)
    rep.conclusion = "curve is not Legendrian (tangency defect " +
                     fmt(rep.max_tangency_defect) + ")";
  else if (rep.fiber_parallel_to_axis || rep.fiber_axis_distance < 1e-6)
    rep.conclusion = "fiber through the critical point intersects or is parallel to the "
                     "distinguished fiber: contradiction hypothesis met";
  else
    rep.conclusion = "fiber through the critical point misses the distinguished fiber by " +
                     fmt(rep.fiber_axis_distance);
  return rep;
}

LiftResult legendrianLift(const fib::FibrationSpec& spec,
                          const std::function<Vec2(double)>& gamma, double t0, double t1,
                          int steps, double z0, const SolverConfig& cfg) {
  if (steps < 2) throw ConfigError("lift needs at least two steps");
  const fib::Frame frame =
      spec.isBMap() ? spec.brep().frame : fib::Frame::standard();
  const double dt = (t1 - t0) / steps;
  const double gh = 1e-6 * std::max(1.0, std::abs(t1 - t0));

  std::optional<Vec2> hint;
  auto gammaDot = [&](double t) {
    Vec2 a = gamma(t + gh), b = gamma(t - gh);
    return (1.0 / (2 * gh)) * (a - b);
  };
  auto zdot = [&](double t, double z) {
    Vec3 x = frame.world(gamma(t), z);
    Vec3 v = frame.frameVector(fib::directionWithHint(spec, x, cfg, hint).vec());
    if (v.z < kEpsTrans) throw LostTransversality(t);
    Vec2 gd = gammaDot(t);
    return -(gd.x * v.x + gd.y * v.y) / v.z;  // z' = -<g', V_h>/<V,u*>
  };

  LiftResult out;
  out.t.reserve(static_cast<std::size_t>(steps) + 1);
  out.gamma.reserve(out.t.capacity());
  out.z.reserve(out.t.capacity());
  double z = z0;
  out.t.push_back(t0);
  out.gamma.push_back(gamma(t0));
  out.z.push_back(z0);
  for (int i = 0; i < steps; ++i) {
    double t = t0 + dt * i;
    double k1 = zdot(t, z);
    double k2 = zdot(t + dt / 2, z + dt / 2 * k1);
    double k3 = zdot(t + dt / 2, z + dt / 2 * k2);
    double k4 = zdot(t + dt, z + dt * k3);
    z += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    double tn = t0 + dt * (i + 1);
    out.t.push_back(tn);
    out.gamma.push_back(gamma(tn));
    out.z.push_back(z);
  }

  // a-posteriori residual: z' from a 5-point stencil of the stored lift
  std::size_t n = out.z.size();
  out.residual.assign(n, 0.0);
  auto zdotStencil = [&](std::size_t i) {
    if (i >= 2 && i + 2 < n)
      return (out.z[i - 2] - 8 * out.z[i - 1] + 8 * out.z[i + 1] - out.z[i + 2]) /
             (12 * dt);
    if (i == 0) return (out.z[1] - out.z[0]) / dt;
    if (i + 1 == n) return (out.z[n - 1] - out.z[n - 2]) / dt;
    return (out.z[i + 1] - out.z[i - 1]) / (2 * dt);
  };
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 x = frame.world(out.gamma[i], out.z[i]);
    Vec3 v = frame.frameVector(fib::direction(spec, x, cfg).vec());
    Vec2 gd = gammaDot(out.t[i]);
    Vec3 tangent{gd.x, gd.y, zdotStencil(i)};
    double tn = norm(tangent);
    double res = std::abs(dot(tangent, v)) / std::max(tn, 1e-12);
    out.residual[i] = res;
    // boundary stencils are low order; exclude them from the headline figure
    if (i >= 2 && i + 2 < n) out.max_residual = std::max(out.max_residual, res);
  }
  return out;
}

OvertwistedReport overtwistedDemo() {
  auto W = [](Vec3 x) -> Vec3 {
    double r = std::sqrt(x.x * x.x + x.y * x.y);
    double s = r < 1e-8 ? 1.0 - r * r / 6.0 : std::sin(r) / r;
    return {-x.y * s, x.x * s, std::cos(r)};
  };

  OvertwistedReport rep;
  // the field is vertical exactly on the cylinder r = pi
  for (int k = 0; k < 64; ++k) {
    double a = 2 * kPi * k / 64;
    Vec3 x{kPi * std::cos(a), kPi * std::sin(a), 0.0};
    rep.vertical_defect = std::max(rep.vertical_defect,
                                   norm(cross(W(x), Vec3{0, 0, 1})));
  }

  rep.interior_point = {2, 0, 0};
  rep.interior_direction = W(rep.interior_point);  // unit by construction
  // extend the interior line until it meets r = pi: 4 + (t sin 2)^2 = pi^2
  double s2 = rep.interior_direction.y;  // sin 2
  rep.cross_t = std::sqrt(kPi * kPi - 4.0) / s2;
  rep.cross_point = rep.interior_point + rep.cross_t * rep.interior_direction;
  rep.pierce_y = rep.cross_point.y;
  rep.expected_y = std::sqrt(kPi * kPi - 4.0);
  rep.is_fibration = false;
  rep.conclusion =
      "the non-vertical interior line pierces the cylinder r = pi, where every "
      "orthogonal line is vertical: two distinct lines through one point, so the "
      "orthogonal line field is not a fibration";
  return rep;
}

}  // namespace skewfib::contact
