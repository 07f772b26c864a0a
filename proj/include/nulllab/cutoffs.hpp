#pragma once

namespace nulllab {

/// C-infinity step built from exp(-1/x): 0 for x <= 0, 1 for x >= 1.
double smooth_step(double x);
double smooth_step_d1(double x);

/// 1 for s > 1/2, 0 for s < 1/4.
double chi_tilde(double s);
double chi_tilde_d1(double s);

/// Even bump: 1 for |s| <= 1/2, 0 for |s| >= 3/4.
double chi_bump(double s);

/// 1 for s >= 2, 0 for s <= 1.
double chi_exterior(double s);

}  // namespace nulllab
