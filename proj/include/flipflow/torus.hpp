#pragma once

#include <Eigen/Dense>

#include "flipflow/dynamics.hpp"
#include "flipflow/rng.hpp"

namespace flipflow {

// Everything here works on unit-normalized action radii (sum r_k^2 = 1,
// i.e. the energy-1/2 surface); callers on other surfaces rescale by
// sqrt(2h). Momentum arguments are modal coordinates.

// l1 distance between squared radii: sum |a_k^2 - b_k^2|.
double rho(const TorusVector& a, const TorusVector& b);

struct TorusMetrics {
  Eigen::VectorXd gamma;  // r_k / |beta_k|
  double a_val = 0.0;     // min gamma
  double b_val = 0.0;     // max gamma
  double d_val = 0.0;     // b_val - a_val
  double delta = 0.0;     // b_val^2 - a_val^2
  double c_val = 0.0;     // 1 / max(1, d_val^2)
  int argmin = 0;         // lowest index on ties
  int argmax = 0;
};

// Requires all beta_k nonzero (throws NotInVPlus) and unit normalization.
TorusMetrics metrics(const SystemSpec& spec, const TorusVector& r);

// Roots of z^2 - x z - c (1 - x^2)/4: f_plus + f_minus = x and
// f_plus * f_minus = -c (1 - x^2)/4. Requires 0 < c <= 1; the radicand
// x^2 + c (1 - x^2) = c + (1 - c) x^2 is then nonnegative identically.
double f_plus(double x, double c);
double f_minus(double x, double c);

// Squared-radius image of a flip taken at modal momenta p: returns the new
// radii Psi_k = sqrt(r_k^2 + 4 p1^2 beta_k^2 - 4 p1 beta_k p_k) where
// p1 = sum beta_k p_k. Preserves sum r_k^2 exactly in exact arithmetic.
// Throws MomentumOutsideCube when |p_k| > r_k + cube_slack and
// NegativeRadicand when an image square drops below -1e-12; values in
// [-1e-12, 0) clamp to zero.
TorusVector psi_map(const SystemSpec& spec, const TorusVector& r,
                    const Eigen::VectorXd& p_modal, double cube_slack = 1e-9);

// Momenta (modal) realizing the one-step optimal contraction toward the
// anchor torus: rho(psi_map(r, p'), r_star) = (1 - c) rho(r, r_star) and
// the new spread satisfies delta' <= max(delta - 1, 0). The marked
// momentum sum beta_k p'_k equals f_plus(min gamma, c).
Eigen::VectorXd optimal_flip_momentum(const SystemSpec& spec,
                                      const TorusVector& r);

bool cube_contains(const TorusVector& r, const Eigen::VectorXd& p_modal,
                   double slack = 0.0);

// Uniform draw from the momentum cube {|p_k| <= r_k}.
Eigen::VectorXd sample_cube(const TorusVector& r, Rng& rng);

}  // namespace flipflow
