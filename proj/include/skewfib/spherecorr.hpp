#pragma once

#include <memory>
#include <vector>

#include "skewfib/certificate.hpp"
#include "skewfib/fibration.hpp"
#include "skewfib/numeric.hpp"

namespace skewfib::corr {

// Unit quaternion as an R^4 point: (x1, x2, x3, x4) <-> x4 + x1 i + x2 j + x3 k.
// The central-projection tangent point is (0, 0, 0, 1).
struct Quat {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 1.0;
};

double quatNorm(const Quat& q);
Quat leftMultiplyI(const Quat& q);  // i * q

// c(t) = cos t * q + sin t * (i q): the Hopf great circle through q.
Quat hopfGreatCircle(const Quat& q, double t);

struct ProjectedLine {
  fib::OrientedLine line;
  double residual = 0.0;  // max point-to-line distance over used samples
  int used_samples = 0;
};

// Central projection of great-circle samples from the open upper hemisphere
// (x4 > 1e-3) to R^3, with a least-squares oriented-line fit.
ProjectedLine centralProject(const std::vector<Quat>& circle);

// Moves the circumcenter fiber of a nondegenerate fibration to the vertical
// axis through the origin: translation plus minimal rotation of the base
// plane, with the B-map rebased lazily. Near-normalized inputs are returned
// unchanged.
fib::FibrationSpec normalizeSpec(const fib::FibrationSpec& spec, const fib::GridSpec& grid,
                                 const SolverConfig& cfg);

// B_t = (1-t) B + t H with H(p) = sigma (-p2, p1); sigma from the spec's
// cached orientation (computed on demand).
fib::FibrationSpec homotopyAt(std::shared_ptr<const fib::FibrationSpec> normalized,
                              double t, const fib::GridSpec& grid);

struct HomotopyPath {
  std::vector<double> t_grid;
  std::vector<double> margins;  // min over the grid of lambda_min(sigma S_t)
  int sigma = 0;
  bool pass = false;
  double convexity_slack = 0.0;  // worst violation of the convex lower bound
  std::vector<Certificate> certificates;
};

// Nondegeneracy along the straight-line homotopy to the matching Hopf
// fibration; the per-point margin is checked against its convex lower bound.
HomotopyPath certifyHomotopy(std::shared_ptr<const fib::FibrationSpec> normalized,
                             int t_count, const fib::GridSpec& grid,
                             const SolverConfig& cfg);

// Surjectivity probe of B: pass = every tested target circle |w| = R is fully
// covered ("great-circle type"); fail = coverage stalls, with the stall bound
// refined by bisection and reported as the margin.
Certificate hemisphereCriterion(const fib::FibrationSpec& spec,
                                const std::vector<double>& radii, const SolverConfig& cfg,
                                int targets_per_radius = 16);

}  // namespace skewfib::corr
