#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "skewfib/errors.hpp"

namespace skewfib {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
// det of the 2x2 matrix with columns a, b
inline double det2(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// multiplication by i, i.e. rotation by +90 degrees
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
// det of the 3x3 matrix with columns a, b, c
inline double det3(Vec3 a, Vec3 b, Vec3 c) { return dot(cross(a, b), c); }

// Unit 3-vector with certified normalization: | |w| - 1 | <= 1e-12.
class UnitVec3 {
 public:
  explicit UnitVec3(Vec3 w);
  static UnitVec3 normalize(Vec3 w);
  Vec3 vec() const { return v_; }
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }

 private:
  Vec3 v_;
};

inline double dot(const UnitVec3& a, Vec3 b) { return dot(a.vec(), b); }
inline double dot(Vec3 a, const UnitVec3& b) { return dot(a, b.vec()); }
inline double dot(const UnitVec3& a, const UnitVec3& b) { return dot(a.vec(), b.vec()); }

// angle between two unit vectors, robust near 0 and pi
double angleBetween(const UnitVec3& a, const UnitVec3& b);

// point at fraction t of the geodesic from a towards b
UnitVec3 slerp(const UnitVec3& a, const UnitVec3& b, double t);

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }
  Vec2 operator*(Vec2 h) const { return {a11 * h.x + a12 * h.y, a21 * h.x + a22 * h.y}; }

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  // rotation by +90 degrees (multiplication by i)
  static Mat2 rot90() { return {0.0, -1.0, 1.0, 0.0}; }
};

inline Mat2 operator+(Mat2 a, Mat2 b) {
  return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
inline Mat2 operator*(double s, Mat2 a) {
  return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
}

// Solves M x = r; throws SingularJacobian when |det M| < 1e-14.
Vec2 solve2(const Mat2& m, Vec2 r);

// eigenvalues of a symmetric 2x2 [[a,b],[b,c]], ascending
void symEig2(double a, double b, double c, double& lo, double& hi);

// eigenvalues of a small dense symmetric matrix (row-major n*n), ascending;
// cyclic Jacobi, adequate for n <= 8
std::vector<double> symEigenvalues(int n, std::vector<double> m);

// largest-eigenvalue unit eigenvector of a symmetric 3x3 (row-major), by
// power iteration with deterministic start
Vec3 dominantEigenvector3(const std::vector<double>& m);

struct SolverConfig {
  double residual_tol = 1e-12;
  int max_iters = 50;
  double fd_step = 1e-5;
  double ode_step = 1e-3;
  // plane grid defaults: grid_n x grid_n over [-grid_extent, grid_extent]^2
  int grid_n = 21;
  double grid_extent = 5.0;

  void validate() const;
};

using Map2 = std::function<Vec2(Vec2)>;
using Jac2 = std::function<Mat2(Vec2)>;

// Damped Newton in the plane. The Jacobian may be empty, in which case it is
// approximated by central differences with cfg.fd_step. Step halving, at most
// 30 halvings per iteration.
Vec2 newton2(const Map2& F, const Jac2& J, Vec2 p0, const SolverConfig& cfg);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
};

using OdeField = std::function<std::vector<double>(double, const std::vector<double>&)>;
using OdeProjection = std::function<void(std::vector<double>&)>;

// Fixed-step RK4 from t=0 to t_end (t_end may be negative). The optional
// projection hook runs after every step (used to renormalize onto spheres).
// Throws FieldBlowup when |derivative| > 1e9.
Trajectory rk4Path(const OdeField& field, std::vector<double> y0, double t_end,
                   const SolverConfig& cfg, const OdeProjection& project = nullptr);

using MapN = std::function<std::vector<double>(const std::vector<double>&)>;

// central-difference Jacobian, row-major m x n, entrywise error O(h^2)
std::vector<double> fdJacobian(const MapN& F, const std::vector<double>& x, double h);

struct SphericalCap {
  UnitVec3 center;
  double radius = 0.0;  // radians
};

// Minimal enclosing geodesic cap by the geodesic Badoiu-Clarkson scheme:
// start at the normalized mean, move toward the farthest sample by 1/(k+1),
// stop when the center moves less than tol. Deterministic given input order.
// Throws NotInHemisphere when no separating direction is found.
SphericalCap minEnclosingCap(const std::vector<UnitVec3>& samples, double tol);

}  // namespace skewfib
