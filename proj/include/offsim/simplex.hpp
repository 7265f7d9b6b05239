#pragma once

#include <vector>

namespace offsim {

struct LpResult {
  bool feasible = false;
  bool bounded = true;
  std::vector<double> x;
  double objective = 0.0;
};

// Minimizes c . x subject to A x <= b and x >= 0, via the two-phase primal
// simplex method with Bland's rule (anti-cycling). Sized for small dense
// problems (a handful of variables, tens of rows).
LpResult solve_lp(const std::vector<std::vector<double>>& A,
                  const std::vector<double>& b, const std::vector<double>& c);

}  // namespace offsim
