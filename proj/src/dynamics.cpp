#include "flipflow/dynamics.hpp"

#include <cmath>

#include "flipflow/errors.hpp"

namespace flipflow {

void check_finite(const State& psi) {
  if (!psi.q.allFinite() || !psi.p.allFinite()) throw NonFiniteState();
}

ModalState to_modal(const SystemSpec& spec, const State& psi) {
  return {spec.modes.transpose() * psi.q, spec.modes.transpose() * psi.p};
}

State from_modal(const SystemSpec& spec, const ModalState& m) {
  return {spec.modes * m.qt, spec.modes * m.pt};
}

void advance_modal(const SystemSpec& spec, ModalState& m, double t) {
  for (int k = 0; k < spec.n; ++k) {
    double w = spec.omega(k);
    double c = std::cos(w * t);
    double s = std::sin(w * t);
    double qt = m.qt(k);
    double pt = m.pt(k);
    m.qt(k) = c * qt + (s / w) * pt;
    m.pt(k) = -w * s * qt + c * pt;
  }
}

State propagate(const SystemSpec& spec, const State& psi, double t) {
  check_finite(psi);
  ModalState m = to_modal(spec, psi);
  advance_modal(spec, m, t);
  return from_modal(spec, m);
}

State flip(const State& psi) {
  State out = psi;
  out.p(0) = -out.p(0);
  return out;
}

State jstep(const SystemSpec& spec, const State& psi, double tau) {
  if (!(tau >= 0.0)) throw ConfigError("flip gap must be nonnegative");
  return flip(propagate(spec, psi, tau));
}

State jcompose(const SystemSpec& spec, const State& psi,
               const std::vector<double>& taus) {
  State out = psi;
  for (double tau : taus) out = jstep(spec, out, tau);
  return out;
}

State inverse_jcompose(const SystemSpec& spec, const State& psi,
                       const std::vector<double>& taus) {
  State out = psi;
  for (auto it = taus.rbegin(); it != taus.rend(); ++it) {
    if (!(*it >= 0.0)) throw ConfigError("flip gap must be nonnegative");
    out = propagate(spec, flip(out), -*it);
  }
  return out;
}

double energy(const SystemSpec& spec, const State& psi) {
  return 0.5 * (psi.p.squaredNorm() + psi.q.dot(spec.v * psi.q));
}

double h_inner(const SystemSpec& spec, const State& a, const State& b) {
  return 0.5 * (a.p.dot(b.p) + a.q.dot(spec.v * b.q));
}

double h_norm(const SystemSpec& spec, const State& psi) {
  return std::sqrt(std::max(0.0, h_inner(spec, psi, psi)));
}

Eigen::VectorXd modal_momenta(const SystemSpec& spec, const State& psi) {
  return spec.modes.transpose() * psi.p;
}

TorusVector action_vars(const SystemSpec& spec, const State& psi) {
  ModalState m = to_modal(spec, psi);
  TorusVector r(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    r(k) = std::hypot(m.pt(k), spec.omega(k) * m.qt(k));
  }
  return r;
}

State g_star(const SystemSpec& spec) {
  State s;
  s.q = Eigen::VectorXd::Zero(spec.n);
  s.p = Eigen::VectorXd::Zero(spec.n);
  s.p(0) = std::sqrt(2.0 * spec.h);
  return s;
}

TorusVector r_star(const SystemSpec& spec) {
  return std::sqrt(2.0 * spec.h) * spec.beta.cwiseAbs();
}

}  // namespace flipflow
