#pragma once

#include <Eigen/Dense>
#include <vector>

#include "flipflow/system.hpp"

namespace flipflow {

struct State {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
};

// Action radii r_k >= 0; the surface of energy h carries sum r_k^2 = 2h.
using TorusVector = Eigen::VectorXd;

// Coordinates in the eigenbasis of v: qt = modes^T q, pt = modes^T p. The
// free flow acts mode by mode as a rotation of (omega_k qt_k, pt_k).
struct ModalState {
  Eigen::VectorXd qt;
  Eigen::VectorXd pt;
};

void check_finite(const State& psi);

ModalState to_modal(const SystemSpec& spec, const State& psi);
State from_modal(const SystemSpec& spec, const ModalState& m);
void advance_modal(const SystemSpec& spec, ModalState& m, double t);

// Exact free flow e^{tA}; t may be negative.
State propagate(const SystemSpec& spec, const State& psi, double t);

// Marked-coordinate velocity flip: negates p_1, q untouched.
State flip(const State& psi);

// One flip event: free flow for tau >= 0, then flip.
State jstep(const SystemSpec& spec, const State& psi, double tau);

// Flip word J(tau_m)...J(tau_1) applied left to right over the list.
State jcompose(const SystemSpec& spec, const State& psi,
               const std::vector<double>& taus);

// Inverse word: undoes jcompose with the same tau list.
State inverse_jcompose(const SystemSpec& spec, const State& psi,
                       const std::vector<double>& taus);

double energy(const SystemSpec& spec, const State& psi);

// Hamiltonian inner product 1/2 [(p,p') + (q, V q')]; the flow is an
// isometry for the induced norm and the flip is too.
double h_inner(const SystemSpec& spec, const State& a, const State& b);
double h_norm(const SystemSpec& spec, const State& psi);

Eigen::VectorXd modal_momenta(const SystemSpec& spec, const State& psi);

// r_k = sqrt(pt_k^2 + omega_k^2 qt_k^2); invariant under the free flow.
TorusVector action_vars(const SystemSpec& spec, const State& psi);

// Anchor state (0, sqrt(2h) e1); it lies on the energy-h surface.
State g_star(const SystemSpec& spec);

// Action radii of the anchor's torus, scaled to the energy-h surface.
TorusVector r_star(const SystemSpec& spec);

}  // namespace flipflow
