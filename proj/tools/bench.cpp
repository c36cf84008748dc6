// Compares the parallel kernels against the serial reference: same results
// required bit-for-bit, wall time reported for both.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "skewfib/contact.hpp"
#include "skewfib/fibration.hpp"
#include "skewfib/linespace.hpp"
#include "skewfib/parallel.hpp"

using namespace skewfib;

namespace {

double timed(const std::function<void()>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool certEqual(const Certificate& a, const Certificate& b) {
  if (a.verdict != b.verdict || a.margin != b.margin || a.sigma != b.sigma) return false;
  if (a.series.size() != b.series.size()) return false;
  for (std::size_t i = 0; i < a.series.size(); ++i)
    if (a.series[i] != b.series[i]) return false;
  return true;
}

int runCase(const std::string& name, const std::function<Certificate()>& kernel) {
  par::setEnabled(false);
  Certificate serial_cert;
  double t_serial = timed([&] { serial_cert = kernel(); });
  par::setEnabled(true);
  Certificate parallel_cert;
  double t_parallel = timed([&] { parallel_cert = kernel(); });

  bool same = certEqual(serial_cert, parallel_cert);
  std::printf("%-28s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  results %s\n",
              name.c_str(), t_serial, t_parallel,
              t_parallel > 0 ? t_serial / t_parallel : 0.0,
              same ? "identical" : "DIFFER");
  return same ? 0 : 1;
}

}  // namespace

int main() {
  SolverConfig cfg;
  fib::GridSpec grid{41, 5.0};
  fib::Grid3Spec grid3{13, 5.0, {}};

  int bad = 0;
  {
    fib::FibrationSpec spec = fib::makeCappedAtan();
    bad += runCase("skew capped 41x41",
                   [&] { return fib::certifySkew(spec, grid); });
    bad += runCase("claim capped 41x41",
                   [&] { return lines::verifyClaim(spec, grid); });
    bad += runCase("contact capped 13^3",
                   [&] { return contact::certifyContact(spec, grid3, cfg); });
  }
  {
    fib::FibrationSpec hopf = fib::makeHopf(1);
    bad += runCase("nondegenerate hopf 41x41",
                   [&] { return fib::certifyNondegenerate(hopf, grid); });
  }
  if (bad) {
    std::printf("FAILURE: %d kernel(s) gave different results in parallel\n", bad);
    return 1;
  }
  std::printf("all kernels: parallel == serial\n");
  return 0;
}
