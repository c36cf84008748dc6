#pragma once

#include <array>
#include <vector>

#include "skewfib/certificate.hpp"
#include "skewfib/fibration.hpp"
#include "skewfib/numeric.hpp"

namespace skewfib::lines {

// Tangent vector to the oriented-line space at `base`: horizontal and
// vertical components, both perpendicular to the direction u.
struct TangentTS2 {
  fib::OrientedLine base;
  Vec3 zeta1;
  Vec3 zeta2;
};

// Q(zeta) = det(zeta1, u, zeta2); signature (2,2) on the full tangent space.
double qForm(const TangentTS2& t);

// Eigenvalues of the Gram matrix of Q on an orthonormal tangent basis at
// `line` (ascending); expected two negative, two positive.
std::array<double, 4> qFormEigenvalues(const fib::OrientedLine& line);

// Chart data of the map p -> (u(p), v(p)) into line space, in frame
// coordinates of the spec's base plane. Columns are images of e1, e2.
struct Chart {
  Vec3 u;
  Vec3 v;
  std::array<Vec3, 2> du;
  std::array<Vec3, 2> dv;
  double u_vertical = 0.0;  // <u, V0> = 1/sqrt(1+|B|^2)
};

Chart chart(const fib::FibrationSpec& spec, Vec2 p);

Vec3 applyColumns(const std::array<Vec3, 2>& cols, Vec2 h);

// dv_p h by the full four-term product rule (kept separate from the chart's
// stored columns so the cancellation in the determinant can be tested).
Vec3 dvFull(const Chart& c, Vec2 p, Vec2 h);

// f*Q(h) = det(du_p h, u(p), h): only the h term of dv_p h contributes.
double pullbackQ(const fib::FibrationSpec& spec, Vec2 p, Vec2 h);
double pullbackQ(const Chart& c, Vec2 h);
// same determinant with the untruncated dv_p h in the last slot
double pullbackQFull(const Chart& c, Vec2 p, Vec2 h);

// Compares det(h, dB_p h) with <u,V0>^2 * f*Q(h) over grid x directions.
Certificate verifyClaim(const fib::FibrationSpec& spec, const fib::GridSpec& grid,
                        int directions = 8);

// Sign-definiteness of f*Q across grid x directions; cross-checked against
// certifyNondegenerate.
Certificate definitenessOnM(const fib::FibrationSpec& spec, const fib::GridSpec& grid);

}  // namespace skewfib::lines
