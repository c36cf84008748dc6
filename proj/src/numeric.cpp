#include "skewfib/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "skewfib/parallel.hpp"

namespace skewfib {

UnitVec3::UnitVec3(Vec3 w) : v_(w) {
  double n = norm(w);
  if (std::abs(n - 1.0) > 1e-12)
    throw DomainError("UnitVec3: vector not unit, |w| = " + std::to_string(n));
}

UnitVec3 UnitVec3::normalize(Vec3 w) {
  double n = norm(w);
  if (!(n > 0.0) || !std::isfinite(n))
    throw DomainError("UnitVec3: cannot normalize zero or non-finite vector");
  return UnitVec3((1.0 / n) * w);
}

double angleBetween(const UnitVec3& a, const UnitVec3& b) {
  // atan2 form stays accurate where acos loses digits
  return std::atan2(norm(cross(a.vec(), b.vec())), dot(a, b));
}

UnitVec3 slerp(const UnitVec3& a, const UnitVec3& b, double t) {
  double ang = angleBetween(a, b);
  if (ang < 1e-15) return a;
  double s = std::sin(ang);
  Vec3 w = (std::sin((1.0 - t) * ang) / s) * a.vec() + (std::sin(t * ang) / s) * b.vec();
  return UnitVec3::normalize(w);
}

Vec2 solve2(const Mat2& m, Vec2 r) {
  double d = m.det();
  if (std::abs(d) < 1e-14)
    throw SingularJacobian("(" + std::to_string(r.x) + ", " + std::to_string(r.y) + ")");
  return {(m.a22 * r.x - m.a12 * r.y) / d, (-m.a21 * r.x + m.a11 * r.y) / d};
}

void symEig2(double a, double b, double c, double& lo, double& hi) {
  double mean = 0.5 * (a + c);
  double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  lo = mean - disc;
  hi = mean + disc;
}

std::vector<double> symEigenvalues(int n, std::vector<double> m) {
  auto at = [&](int i, int j) -> double& { return m[i * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-28) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = 0.5 * std::atan2(2.0 * apq, at(q, q) - at(p, p));
        double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < n; ++k) {
          double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

Vec3 dominantEigenvector3(const std::vector<double>& m) {
  auto mul = [&](Vec3 v) -> Vec3 {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  };
  // shift so the target eigenvalue dominates in magnitude
  double tr = m[0] + m[4] + m[8];
  double bound = std::abs(tr);
  for (double e : m) bound += std::abs(e);
  auto mulShift = [&](Vec3 v) -> Vec3 { return mul(v) + bound * v; };
  Vec3 v{1.0, 0.57, 0.31};  // deterministic, unlikely to be orthogonal to target
  v = (1.0 / norm(v)) * v;
  for (int it = 0; it < 500; ++it) {
    Vec3 w = mulShift(v);
    double n = norm(w);
    if (n == 0.0) break;
    w = (1.0 / n) * w;
    if (norm(w - v) < 1e-15) { v = w; break; }
    v = w;
  }
  return v;
}

void SolverConfig::validate() const {
  if (!(residual_tol > 0.0) || !(fd_step > 0.0) || !(ode_step > 0.0))
    throw ConfigError("solver tolerances must be strictly positive");
  if (max_iters <= 0 || grid_n <= 0 || !(grid_extent > 0.0))
    throw ConfigError("solver iteration/grid parameters must be positive");
}

namespace {
Mat2 fdJacobian2(const Map2& F, Vec2 p, double h) {
  Vec2 fx1 = F({p.x + h, p.y}), fx0 = F({p.x - h, p.y});
  Vec2 fy1 = F({p.x, p.y + h}), fy0 = F({p.x, p.y - h});
  return {(fx1.x - fx0.x) / (2 * h), (fy1.x - fy0.x) / (2 * h),
          (fx1.y - fx0.y) / (2 * h), (fy1.y - fy0.y) / (2 * h)};
}
}  // namespace

Vec2 newton2(const Map2& F, const Jac2& J, Vec2 p0, const SolverConfig& cfg) {
  cfg.validate();
  Vec2 p = p0;
  double res = norm(F(p));
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (res <= cfg.residual_tol) return p;
    Mat2 jac = J ? J(p) : fdJacobian2(F, p, cfg.fd_step);
    Vec2 step = solve2(jac, -1.0 * F(p));
    double lambda = 1.0;
    Vec2 next = p + step;
    double nextRes = norm(F(next));
    for (int halvings = 0; halvings < 30 && !(nextRes < res); ++halvings) {
      lambda *= 0.5;
      next = p + lambda * step;
      nextRes = norm(F(next));
    }
    p = next;
    res = nextRes;
  }
  if (res <= cfg.residual_tol) return p;
  throw NoConvergence(cfg.max_iters, res);
}

Trajectory rk4Path(const OdeField& field, std::vector<double> y0, double t_end,
                   const SolverConfig& cfg, const OdeProjection& project) {
  cfg.validate();
  const std::size_t dim = y0.size();
  auto checked = [&](double t, const std::vector<double>& y) {
    std::vector<double> d = field(t, y);
    double m = 0.0;
    for (double v : d) m = std::max(m, std::abs(v));
    if (!(m <= 1e9)) throw FieldBlowup(t);
    return d;
  };
  double h = (t_end >= 0.0 ? cfg.ode_step : -cfg.ode_step);
  std::size_t nsteps = (t_end == 0.0)
                           ? 0
                           : static_cast<std::size_t>(std::ceil(std::abs(t_end) / cfg.ode_step - 1e-12));
  Trajectory out;
  out.times.reserve(nsteps + 1);
  out.states.reserve(nsteps + 1);
  out.times.push_back(0.0);
  out.states.push_back(y0);
  std::vector<double> y = std::move(y0);
  double t = 0.0;
  for (std::size_t step = 0; step < nsteps; ++step) {
    double hs = h;
    if ((step + 1) == nsteps) hs = t_end - t;  // land exactly on t_end
    std::vector<double> k1 = checked(t, y);
    std::vector<double> tmp(dim);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * hs * k1[i];
    std::vector<double> k2 = checked(t + 0.5 * hs, tmp);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * hs * k2[i];
    std::vector<double> k3 = checked(t + 0.5 * hs, tmp);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = y[i] + hs * k3[i];
    std::vector<double> k4 = checked(t + hs, tmp);
    for (std::size_t i = 0; i < dim; ++i)
      y[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t += hs;
    if (project) project(y);
    out.times.push_back(t);
    out.states.push_back(y);
  }
  return out;
}

std::vector<double> fdJacobian(const MapN& F, const std::vector<double>& x, double h) {
  const std::size_t n = x.size();
  std::vector<double> f0 = F(x);
  const std::size_t m = f0.size();
  std::vector<double> jac(m * n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    std::vector<double> fp = F(xp), fm = F(xm);
    for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (fp[i] - fm[i]) / (2.0 * h);
  }
  return jac;
}

SphericalCap minEnclosingCap(const std::vector<UnitVec3>& samples, double tol) {
  if (samples.empty()) throw DomainError("minEnclosingCap: no samples");
  if (!(tol > 0.0)) throw ConfigError("minEnclosingCap: tol must be positive");
  const std::size_t n = samples.size();

  Vec3 mean{0, 0, 0};
  for (const auto& s : samples) mean = mean + s.vec();
  auto inHemisphereOf = [&](Vec3 dir) {
    double nd = norm(dir);
    if (!(nd > 0.0)) return false;
    for (const auto& s : samples)
      if (!(dot(dir, s.vec()) > 0.0)) return false;
    return true;
  };
  Vec3 sep = mean;
  if (!inHemisphereOf(sep)) {
    bool found = false;
    for (const auto& s : samples) {
      if (inHemisphereOf(s.vec())) { sep = s.vec(); found = true; break; }
    }
    if (!found) throw NotInHemisphere();
  }

  UnitVec3 center = UnitVec3::normalize(norm(mean) > 1e-12 ? mean : sep);
  std::vector<double> dist(n);
  auto farthest = [&]() {
    par::forIndex(n, [&](std::size_t i) { dist[i] = angleBetween(center, samples[i]); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (dist[i] > dist[best]) best = i;
    return best;
  };

  const long max_iter = 20000000;
  for (long k = 1; k <= max_iter; ++k) {
    std::size_t far = farthest();
    double ang = dist[far];
    double move = ang / static_cast<double>(k + 1);
    if (move < tol) break;
    center = slerp(center, samples[far], 1.0 / static_cast<double>(k + 1));
  }
  std::size_t far = farthest();
  return SphericalCap{center, dist[far]};
}

}  // namespace skewfib
