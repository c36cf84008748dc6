#pragma once

#include <string>
#include <vector>

namespace skewfib {

struct Witness {
  std::string kind;           // "point", "pair", "radius", ...
  std::vector<double> data;   // flattened coordinates
  double value = 0.0;
};

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

// Verdict of a sampled property check. A pass means "no violation found at
// the stated resolution", never a proof; fail carries at least one witness.
struct Certificate {
  std::string property;
  Verdict verdict = Verdict::Inconclusive;
  double margin = 0.0;
  int sigma = 0;  // orientation, when meaningful (+1/-1, 0 = n/a)
  std::vector<Witness> witnesses;
  std::string grid;
  std::string tolerances;
  std::vector<double> series;  // per-radius / per-t diagnostic values

  bool pass() const { return verdict == Verdict::Pass; }
};

}  // namespace skewfib
