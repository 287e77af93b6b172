#pragma once

namespace randkol::detail {

// Kahan compensated summation. Accumulation order is fixed by the caller
// (lexicographic for enumerations, trial order for Monte Carlo), which makes
// sums independent of how the work was partitioned.
struct KahanSum {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double x) {
    double y = x - compensation;
    double t = sum + y;
    compensation = (t - sum) - y;
    sum = t;
  }

  double value() const { return sum; }
};

}  // namespace randkol::detail
