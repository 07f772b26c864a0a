#include "nulllab/cutoffs.hpp"

#include <cmath>

namespace nulllab {

namespace {

double glue(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double glue_d1(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

}  // namespace

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = glue(x);
  return a / (a + glue(1.0 - x));
}

double smooth_step_d1(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double a = glue(x);
  const double b = glue(1.0 - x);
  const double den = a + b;
  return (glue_d1(x) * b + a * glue_d1(1.0 - x)) / (den * den);
}

double chi_tilde(double s) { return smooth_step(4.0 * s - 1.0); }
double chi_tilde_d1(double s) { return 4.0 * smooth_step_d1(4.0 * s - 1.0); }

double chi_bump(double s) { return smooth_step(3.0 - 4.0 * std::abs(s)); }

double chi_exterior(double s) { return smooth_step(s - 1.0); }

}  // namespace nulllab
