#pragma once

// Direct numerical integration of qdot = p, pdot = -V q with an adaptive
// Dormand-Prince 5(4) pair. Works straight from the matrix, shares nothing
// with the modal-coordinate flow it cross-checks.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "flipflow/dynamics.hpp"

namespace oracle {

inline flipflow::State integrate_linear(const Eigen::MatrixXd& v,
                                        const flipflow::State& psi0, double t,
                                        double rtol = 1e-11,
                                        double atol = 1e-13) {
  const Eigen::Index n = v.rows();
  Eigen::VectorXd y(2 * n);
  y.head(n) = psi0.q;
  y.tail(n) = psi0.p;
  auto f = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd d(2 * n);
    d.head(n) = s.tail(n);
    d.tail(n) = -v * s.head(n);
    return d;
  };

  const double dir = t >= 0.0 ? 1.0 : -1.0;
  const double t_abs = std::abs(t);
  double done = 0.0;
  double h = std::min(t_abs, 0.01);
  Eigen::VectorXd k1 = f(y);
  int guard = 0;
  while (done < t_abs && h > 0.0) {
    if (++guard > 2000000) break;
    h = std::min(h, t_abs - done);
    const double hs = dir * h;
    const Eigen::VectorXd k2 = f(y + hs * (1.0 / 5.0) * k1);
    const Eigen::VectorXd k3 = f(y + hs * ((3.0 / 40.0) * k1 + (9.0 / 40.0) * k2));
    const Eigen::VectorXd k4 =
        f(y + hs * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2 + (32.0 / 9.0) * k3));
    const Eigen::VectorXd k5 =
        f(y + hs * ((19372.0 / 6561.0) * k1 - (25360.0 / 2187.0) * k2 +
                    (64448.0 / 6561.0) * k3 - (212.0 / 729.0) * k4));
    const Eigen::VectorXd k6 =
        f(y + hs * ((9017.0 / 3168.0) * k1 - (355.0 / 33.0) * k2 +
                    (46732.0 / 5247.0) * k3 + (49.0 / 176.0) * k4 -
                    (5103.0 / 18656.0) * k5));
    const Eigen::VectorXd y5 =
        y + hs * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3 +
                  (125.0 / 192.0) * k4 - (2187.0 / 6784.0) * k5 +
                  (11.0 / 84.0) * k6);
    const Eigen::VectorXd k7 = f(y5);
    const Eigen::VectorXd y4 =
        y + hs * ((5179.0 / 57600.0) * k1 + (7571.0 / 16695.0) * k3 +
                  (393.0 / 640.0) * k4 - (92097.0 / 339200.0) * k5 +
                  (187.0 / 2100.0) * k6 + (1.0 / 40.0) * k7);

    double err = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc =
          atol + rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
      const double e = (y5(i) - y4(i)) / sc;
      err += e * e;
    }
    err = std::sqrt(err / static_cast<double>(y.size()));

    if (err <= 1.0) {
      done += h;
      y = y5;
      k1 = k7;  // first-same-as-last
    }
    const double factor =
        err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
  }

  flipflow::State out;
  out.q = y.head(n);
  out.p = y.tail(n);
  return out;
}

}  // namespace oracle
