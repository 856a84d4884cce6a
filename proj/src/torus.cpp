#include "flipflow/torus.hpp"

#include <cmath>

#include "flipflow/errors.hpp"

namespace flipflow {

namespace {

void check_radii(const TorusVector& r) {
  for (int k = 0; k < r.size(); ++k) {
    if (!(r(k) >= 0.0)) throw ConfigError("action radii must be nonnegative");
  }
  double s = r.squaredNorm();
  if (std::abs(s - 1.0) > 1e-8) {
    throw ConfigError("action radii must be unit-normalized (sum r_k^2 = " +
                      std::to_string(s) + ")");
  }
}

}  // namespace

double rho(const TorusVector& a, const TorusVector& b) {
  double d = 0.0;
  for (int k = 0; k < a.size(); ++k) d += std::abs(a(k) * a(k) - b(k) * b(k));
  return d;
}

TorusMetrics metrics(const SystemSpec& spec, const TorusVector& r) {
  check_radii(r);
  TorusMetrics m;
  m.gamma.resize(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    double b = std::abs(spec.beta(k));
    if (b == 0.0) throw NotInVPlus(k);
    m.gamma(k) = r(k) / b;
    if (m.gamma(k) < m.gamma(m.argmin)) m.argmin = k;
    if (m.gamma(k) > m.gamma(m.argmax)) m.argmax = k;
  }
  m.a_val = m.gamma(m.argmin);
  m.b_val = m.gamma(m.argmax);
  m.d_val = m.b_val - m.a_val;
  m.delta = m.b_val * m.b_val - m.a_val * m.a_val;
  m.c_val = 1.0 / std::max(1.0, m.d_val * m.d_val);
  return m;
}

double f_plus(double x, double c) {
  return 0.5 * (x + std::sqrt(x * x + c * (1.0 - x * x)));
}

double f_minus(double x, double c) {
  return 0.5 * (x - std::sqrt(x * x + c * (1.0 - x * x)));
}

TorusVector psi_map(const SystemSpec& spec, const TorusVector& r,
                    const Eigen::VectorXd& p_modal, double cube_slack) {
  int worst = -1;
  double worst_margin = 0.0;
  for (int k = 0; k < spec.n; ++k) {
    double margin = std::abs(p_modal(k)) - r(k);
    if (margin > worst_margin) {
      worst_margin = margin;
      worst = k;
    }
  }
  if (worst >= 0 && worst_margin > cube_slack) {
    throw MomentumOutsideCube(worst, worst_margin);
  }

  double p1 = spec.beta.dot(p_modal);
  TorusVector out(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    double b = spec.beta(k);
    double sq = r(k) * r(k) + 4.0 * p1 * p1 * b * b - 4.0 * p1 * b * p_modal(k);
    if (sq < -1e-12) throw NegativeRadicand(k, sq);
    out(k) = std::sqrt(std::max(0.0, sq));
  }
  return out;
}

Eigen::VectorXd optimal_flip_momentum(const SystemSpec& spec,
                                      const TorusVector& r) {
  TorusMetrics m = metrics(spec, r);
  double y = f_plus(m.a_val, m.c_val);  // strictly positive: f_plus(0) > 0
  Eigen::VectorXd p(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    double b = spec.beta(k);
    p(k) = y * b - m.c_val * (b * b - r(k) * r(k)) / (4.0 * y * b);
  }
  return p;
}

bool cube_contains(const TorusVector& r, const Eigen::VectorXd& p_modal,
                   double slack) {
  for (int k = 0; k < r.size(); ++k) {
    if (std::abs(p_modal(k)) > r(k) + slack) return false;
  }
  return true;
}

Eigen::VectorXd sample_cube(const TorusVector& r, Rng& rng) {
  Eigen::VectorXd p(r.size());
  for (int k = 0; k < r.size(); ++k) p(k) = rng.uniform(-r(k), r(k));
  return p;
}

}  // namespace flipflow
