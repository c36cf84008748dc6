#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "skewfib/certificate.hpp"
#include "skewfib/fibration.hpp"
#include "skewfib/numeric.hpp"

namespace skewfib::contact {

// thresholds used throughout; every report records them
constexpr double kEpsStop = 1e-6;    // |X| below this counts as a singularity
constexpr double kEpsTrans = 1e-4;   // minimum <V, vertical> along a lift
constexpr double kAngleTol = 1e-3;   // return-map closeness, radians

// One-form alpha = a dx + b dy + c dz with expression coefficients.
class OneForm {
 public:
  OneForm(expr::Expr a, expr::Expr b, expr::Expr c, std::string label);

  static OneForm standardTight();  // dz + r^2 dtheta = -y dx + x dy + dz
  static OneForm planarTight();    // dz - y dx
  // cos r dz + r sin r dtheta in Cartesian form, sin(r)/r extended by its
  // series through r=0
  static OneForm overtwisted();

  Vec3 coefficients(Vec3 x) const;
  // *(alpha ^ d alpha) via exact forward-mode partials
  double starAlphaDAlpha(Vec3 x) const;
  const std::string& label() const { return label_; }

 private:
  std::array<expr::Expr, 3> coeff_;
  std::string label_;
};

// c(x) = <curl V, V> with central-difference curl of the reconstructed unit
// field; expression-defined fields are cross-checked against the exact curl.
double contactFunction(const fib::FibrationSpec& spec, Vec3 x, const SolverConfig& cfg);

Vec3 curlV(const fib::FibrationSpec& spec, Vec3 x, const SolverConfig& cfg);

// sum_i det(e_i, dV e_i, V) over an orthonormal basis of V(x)-perp; agrees
// with contactFunction up to finite-difference error.
double contactTraceLocal(const fib::FibrationSpec& spec, Vec3 x, const SolverConfig& cfg);

Certificate certifyContact(const fib::FibrationSpec& spec, const fib::Grid3Spec& grid,
                           const SolverConfig& cfg, double margin_threshold = 1e-4);
Certificate certifyContact(const OneForm& form, const fib::Grid3Spec& grid,
                           double margin_threshold = 1e-4);

// the two singular points of the characteristic foliation on S_r
std::pair<Vec3, Vec3> sphereSingularities(const fib::FibrationSpec& spec, double r,
                                          const SolverConfig& cfg);

// X(x) = (x/|x|) x V(x), tangent to the sphere, in the contact plane
Vec3 charFoliationField(const fib::FibrationSpec& spec, Vec3 x, double r,
                        const SolverConfig& cfg);

enum class LeafTermination { SingularityPlus, SingularityMinus, LongitudeWrap, MaxSteps };

std::string to_string(LeafTermination t);

struct FoliationLeaf {
  double radius = 0.0;
  std::vector<Vec3> points;        // subsampled trajectory (always ends at the
  std::vector<double> longitudes;  // final state), longitudes aligned
  LeafTermination termination = LeafTermination::MaxSteps;
  double longitude = 0.0;  // accumulated, radians about the singular axis
  double polar = 0.0;      // final polar angle from +u0
  // state one step before termination, for sub-step return interpolation
  double prev_longitude = 0.0;
  double prev_polar = 0.0;
  int steps = 0;
};

// RK4 at unit speed on the normalized X with per-step radial projection;
// the step shrinks near singularities so the stop threshold is reachable.
// longitude_limit > 0 stops the leaf once |longitude| reaches it.
FoliationLeaf integrateLeaf(const fib::FibrationSpec& spec, double r, Vec3 x0,
                            const SolverConfig& cfg, double arc_step,
                            int max_steps = 200000, double longitude_limit = 0.0,
                            int store_stride = 16);

struct ReturnMapRecord {
  double phi = 0.0;     // initial polar angle
  double ret = 0.0;     // polar angle when |longitude| first reaches 2 pi
  int winding = 0;      // sign of the accumulated longitude
  std::string status;   // returned | singularity+ | singularity- | max-steps
  double margin = 0.0;  // |ret - phi| for returned leaves
};

struct ScanResult {
  double radius = 0.0;
  int samples = 0;
  double arc_step = 0.0;
  std::vector<ReturnMapRecord> records;
  std::vector<FoliationLeaf> leaves;
  bool closed_candidate = false;
  double candidate_phi = 0.0;
  double min_margin = 0.0;  // min |R(phi) - phi| over returned leaves
  std::string verdict;
};

// Meridian scan for closed leaves on S_r. Rejects foliations with
// singularities away from the fiber axis (the scan presupposes exactly two).
ScanResult scanClosedLeaves(const fib::FibrationSpec& spec, double r, int samples,
                            const SolverConfig& cfg, double step_scale = 0.005,
                            int max_steps = 200000);

struct HeightCriticalReport {
  Vec3 q{};                         // height-critical sample
  double height = 0.0;              // <q, u0>
  double fiber_plane_angle = 0.0;   // fiber direction vs span(u0, q), radians
  bool fiber_parallel_to_axis = false;
  double fiber_axis_distance = 0.0; // distance between the fiber and l
  double tangency_defect_q = 0.0;   // |<T_q C, V(q)>|
  double max_tangency_defect = 0.0;
  std::string conclusion;
};

HeightCriticalReport heightCriticalDiagnostic(const fib::FibrationSpec& spec,
                                              const std::vector<Vec3>& curve, double r,
                                              const SolverConfig& cfg);

struct LiftResult {
  std::vector<double> t;
  std::vector<Vec2> gamma;
  std::vector<double> z;
  std::vector<double> residual;  // |<(gamma', z'), V>| from a stencil
  double max_residual = 0.0;
};

// Legendrian lift of a plane path: z' = -<gamma', V_h> / <V, vertical>.
LiftResult legendrianLift(const fib::FibrationSpec& spec,
                          const std::function<Vec2(double)>& gamma, double t0, double t1,
                          int steps, double z0, const SolverConfig& cfg);

struct OvertwistedReport {
  double vertical_defect = 0.0;  // max |W x e3| on the circle r = pi, z = 0
  Vec3 interior_point{};
  Vec3 interior_direction{};
  double cross_t = 0.0;     // parameter where the extended line meets r = pi
  Vec3 cross_point{};
  double pierce_y = 0.0;    // y-coordinate at the crossing
  double expected_y = 0.0;  // sqrt(pi^2 - 4)
  bool is_fibration = false;
  std::string conclusion;
};

// The orthogonal line field of cos r dz + r sin r dtheta is vertical on the
// cylinder r = pi yet interior lines pierce it: not a fibration.
OvertwistedReport overtwistedDemo();

}  // namespace skewfib::contact
