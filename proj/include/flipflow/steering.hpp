#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "flipflow/dynamics.hpp"
#include "flipflow/rng.hpp"

namespace flipflow {

// Derivative of the flip word with respect to the gap lengths, by central
// finite differences with step 1e-6 * max(1, tau_i). Columns are phase-space
// tangent vectors, one per gap.
Eigen::MatrixXd jacobian_columns(const SystemSpec& spec, const State& psi,
                                 const std::vector<double>& taus);

// Count of singular values above rel_tol times the largest.
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-8);

struct CoveringResult {
  int achieved_rank = 0;
  std::vector<double> witness;  // gap list realizing achieved_rank
  int trials_used = 0;
  bool admissibility_warning = false;  // set when the spec may not be mixing
};

// Samples random gap lists and reports the best Jacobian rank found. Stops
// early once rank k is hit. t_max <= 0 selects one slow period 2 pi /
// omega_min.
CoveringResult verify_local_covering(const SystemSpec& spec, const State& psi,
                                     int k, int trials, Rng& rng,
                                     double t_max = 0.0);

struct FlipTimeResult {
  double t = 0.0;
  double distance = 0.0;
};

// Minimizes || modal momenta of e^{tA} psi - target ||_2 over [0, horizon]
// by a grid scan (lowest index wins ties) plus golden-section refinement to
// 1e-10 * horizon. With required_tol set, throws HorizonTooShort when the
// best distance stays above it.
FlipTimeResult find_flip_time(const SystemSpec& spec, const State& psi,
                              const Eigen::VectorXd& target_p_modal,
                              double horizon, long long grid,
                              std::optional<double> required_tol = {});

struct SteerOptions {
  double eps = 0.05;
  double horizon = 0.0;     // <= 0: 200 slow periods
  long long grid = 20000;   // points per default-horizon scan
  int budget = 0;           // <= 0: ceil(max 1/beta_k^2) + 3
  double eps_delta = 0.0;   // <= 0: 0.5 * eps; spread target for the loop
  double stall_fraction = 0.5;   // hard floor on realized/predicted decrement
  double accept_fraction = 0.9;  // desired decrement before escalating
  int max_retries = 6;           // horizon doublings per flip search
};

struct SteerResult {
  std::vector<double> taus;    // flip gaps, in application order
  double terminal_flow = 0.0;  // free-flow time after the last flip
  State final_state;
  double final_error = 0.0;  // || final_state - target ||_2
  int flips_used = 0;
  std::vector<double> per_step_delta;  // spread after each applied flip
};

// Drives the action radii to the anchor torus by repeated optimally-timed
// flips, then picks the free-flow time bringing the state within eps of
// g_star in the Euclidean norm. Throws StalledProgress when a flip search
// cannot realize stall_fraction of the predicted contraction and
// BudgetExceeded when the flip budget runs out first.
SteerResult steer_to_gstar(const SystemSpec& spec, const State& psi,
                           const SteerOptions& opt = {});

// Smallest free-flow time s in [0, horizon] with || e^{sA} psi - target ||_H
// <= eps; throws HorizonTooShort otherwise.
double recurrence_time(const SystemSpec& spec, const State& psi,
                       const State& target, double eps, double horizon,
                       long long grid);

// Two-leg transfer: forward schedule into the anchor, then the inverse of
// the target's schedule with every backward flow replaced by a forward
// near-recurrence. Throws BudgetExceeded when the combined schedule would
// exceed budget flips.
SteerResult steer_to_target(const SystemSpec& spec, const State& from,
                            const State& to, double eps, int budget,
                            const SteerOptions& opt = {});

struct ExactSteerN1 {
  double t1 = 0.0;       // gap before the single flip
  double t_total = 0.0;  // one full period 2 pi / omega
};

// Single-oscillator closed form: one flip at t1 inside one period maps psi
// onto psi_target exactly. Throws DifferentEnergy when the states lie on
// different circles.
ExactSteerN1 steer_exact_n1(double omega, const State& psi,
                            const State& psi_target, double tol = 1e-9);

}  // namespace flipflow
