#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skewfib/certificate.hpp"
#include "skewfib/exprlang.hpp"
#include "skewfib/numeric.hpp"

namespace skewfib::fib {

// Right-handed orthonormal frame; e3 is the distinguished vertical.
class Frame {
 public:
  Frame(Vec3 origin, UnitVec3 e1, UnitVec3 e2, UnitVec3 e3);
  static Frame standard();

  Vec3 origin() const { return origin_; }
  const UnitVec3& e1() const { return e1_; }
  const UnitVec3& e2() const { return e2_; }
  const UnitVec3& e3() const { return e3_; }

  Vec3 world(Vec2 p, double height) const;
  Vec3 toFrame(Vec3 world_point) const;   // (xi, eta, z)
  Vec3 worldVector(Vec3 frame_vec) const;
  Vec3 frameVector(Vec3 world_vec) const;

 private:
  Vec3 origin_;
  UnitVec3 e1_, e2_, e3_;
};

// Value of a plane map together with its 2x2 Jacobian.
struct Jet2 {
  Vec2 value;
  Mat2 jacobian;
};

// Oriented line (u, v): unit direction and foot of perpendicular from the
// world origin, <u,v> = 0.
struct OrientedLine {
  UnitVec3 u;
  Vec3 v;
};

OrientedLine lineFromPointDirection(Vec3 point_on_line, UnitVec3 u);

class FibrationSpec;

// Horizontal-direction map on the base plane. The fiber over p is
// t -> p + t B(p) (in frame coordinates, with unit vertical speed).
class BMap {
 public:
  enum class Kind { Hopf, Degenerate, Capped, Glued, Expressions, HopfCombo, Rebased };

  static BMap hopf(int sigma);
  static BMap degenerate(int k);
  static BMap capped(expr::Expr f);  // f in variable "s"; f(0)=0, f' > 0
  static BMap cappedAtan();
  static BMap glued();
  static BMap expressions(expr::Expr b1, expr::Expr b2);  // in (p1, p2)
  // straight-line homotopy endpoint mix: (1-t) B_base + t * sigma * i p
  static BMap hopfCombo(std::shared_ptr<const FibrationSpec> base, double t, int sigma);
  // lazy reparametrization of `base` over a new frame
  static BMap rebased(std::shared_ptr<const FibrationSpec> base, Frame new_frame,
                      SolverConfig cfg);

  Jet2 jet(Vec2 p) const;
  Vec2 value(Vec2 p) const;
  Kind kind() const { return kind_; }
  std::string describe() const;

  int hopfSigma() const { return sigma_; }
  int degenerateK() const { return k_; }
  double comboT() const { return t_; }

 private:
  BMap() = default;
  Kind kind_ = Kind::Hopf;
  int sigma_ = 1;
  int k_ = 3;
  double t_ = 0.0;
  expr::Expr f_, b1_, b2_;
  double f_prime0_ = 0.0;
  std::shared_ptr<const FibrationSpec> base_;
  std::optional<Frame> new_frame_;
  SolverConfig rebase_cfg_;
};

struct BRep {
  Frame frame;
  BMap bmap;
};

struct VFieldRep {
  std::array<expr::Expr, 3> components;  // in (x, y, z); normalized on evaluation
};

// A fibration of R^3 by oriented lines: base plane + B-map, or a unit
// vector field V given by expressions.
class FibrationSpec {
 public:
  FibrationSpec(std::string label, BRep rep);
  FibrationSpec(std::string label, VFieldRep rep);
  FibrationSpec(const FibrationSpec& other);
  FibrationSpec& operator=(const FibrationSpec&) = delete;

  const std::string& label() const { return label_; }
  bool isBMap() const { return brep_.has_value(); }
  const BRep& brep() const;
  const VFieldRep& vrep() const;

  // Orientation is computed once; a later check disagreeing with the cached
  // value is an internal error.
  void recordSigma(int sigma) const;
  int cachedSigma() const { return sigma_cache_.load(); }

 private:
  std::string label_;
  std::optional<BRep> brep_;
  std::optional<VFieldRep> vrep_;
  mutable std::atomic<int> sigma_cache_{0};
};

// catalog
FibrationSpec makeHopf(int sigma);
FibrationSpec makeDegenerate(int k);
FibrationSpec makeCappedAtan();
FibrationSpec makeGlued();
FibrationSpec makePlanarLinear();
FibrationSpec makePlanarTwist(expr::Expr f);  // f in variable "y"
FibrationSpec makeVField(expr::Expr vx, expr::Expr vy, expr::Expr vz, std::string label);

struct GridSpec {
  int n = 21;
  double extent = 5.0;
  std::vector<Vec2> points() const;
  std::string describe() const;
};

struct Grid3Spec {
  int n = 9;
  double extent = 5.0;
  Vec3 offset{};
  std::vector<Vec3> points() const;
  std::string describe() const;
};

// B(p) and dB_p (closed forms for built-ins, dual numbers for expressions)
Jet2 evalB(const FibrationSpec& spec, Vec2 p);

// Base point of the fiber through x: solves p + z B(p) = (xi, eta) in frame
// coordinates by Newton continuation in z with warm starts.
Vec2 solveBase(const FibrationSpec& spec, Vec3 x, const SolverConfig& cfg);
Vec2 solveBaseFrameCoords(const BRep& rep, Vec3 frame_coords, const SolverConfig& cfg,
                          const Vec2* hint = nullptr);

// raw (unnormalized is rejected) V(x) for either representation
UnitVec3 direction(const FibrationSpec& spec, Vec3 x, const SolverConfig& cfg);
// same, reusing/updating a base-point warm start (BMap specs only; harmless otherwise)
UnitVec3 directionWithHint(const FibrationSpec& spec, Vec3 x, const SolverConfig& cfg,
                           std::optional<Vec2>& hint);

OrientedLine lineThrough(const FibrationSpec& spec, Vec3 x, const SolverConfig& cfg);

// distance from the world origin to the fiber through base point p
double baseFiberDistance(const FibrationSpec& spec, Vec2 p);

Certificate certifySkew(const FibrationSpec& spec, const GridSpec& grid,
                        std::size_t pair_budget = 0, std::uint64_t seed = 0);

Certificate certifyNondegenerate(const FibrationSpec& spec, const GridSpec& grid);

Certificate certifyCovering(const FibrationSpec& spec, const std::vector<double>& radii,
                            double threshold = 10.0, int samples_per_radius = 64);

struct DirectionImage {
  std::vector<UnitVec3> samples;
  UnitVec3 circumcenter;
  double radius = 0.0;
};

DirectionImage directionImage(const FibrationSpec& spec, const GridSpec& grid,
                              double cap_tol = 1e-5);

Certificate probeContinuityAtInfinity(const FibrationSpec& spec, const UnitVec3& u,
                                      const std::vector<Vec3>& offsets,
                                      const std::vector<double>& radii,
                                      const SolverConfig& cfg,
                                      double angle_threshold = 0.01);

Certificate verifyLineField(const FibrationSpec& spec, const Grid3Spec& grid,
                            const SolverConfig& cfg, double residual_tol = 1e-6);

// unnormalized field value and the 3x3 Jacobian of the *normalized* field,
// forward-mode exact (VField specs only)
void vfieldJet(const FibrationSpec& spec, Vec3 x, Vec3& v_unit,
               std::array<std::array<double, 3>, 3>& dv);

}  // namespace skewfib::fib
