#include "flipflow/steering.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>

#include "flipflow/errors.hpp"
#include "flipflow/parallel.hpp"
#include "flipflow/torus.hpp"

namespace flipflow {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr long long kMaxGrid = 60'000'000;

// Flip word without the nonnegativity guard; finite differencing perturbs
// gaps below the step size through zero.
State compose_unchecked(const SystemSpec& spec, const State& psi,
                        const std::vector<double>& taus) {
  State out = psi;
  for (double tau : taus) out = flip(propagate(spec, out, tau));
  return out;
}

double default_horizon(const SystemSpec& spec) {
  return 200.0 * 2.0 * kPi / spec.omega(0);
}

double golden_refine(const std::function<double(double)>& f, double a,
                     double b, double tol, double* value) {
  const double gr = 0.6180339887498948482;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    }
  }
  double mid = 0.5 * (a + b);
  *value = f(mid);
  return mid;
}

// Grid scan plus golden-section refinement of the winning bracket.
FlipTimeResult scan_min(const std::function<double(double)>& f, double horizon,
                        long long grid) {
  grid = std::clamp<long long>(grid, 2, kMaxGrid);
  double spacing = horizon / static_cast<double>(grid - 1);
  GridMin best = grid_argmin(
      grid, [&](std::int64_t j) { return f(static_cast<double>(j) * spacing); });
  double lo = std::max(0.0, static_cast<double>(best.index - 1) * spacing);
  double hi = std::min(horizon, static_cast<double>(best.index + 1) * spacing);
  double refined_val = 0.0;
  double refined_t =
      golden_refine(f, lo, hi, 1e-10 * std::max(horizon, 1.0), &refined_val);
  if (refined_val <= best.value) {
    return {refined_t, refined_val};
  }
  return {static_cast<double>(best.index) * spacing, best.value};
}

struct ModalTrig {
  Eigen::VectorXd qt, pt, omega;
};

double momentum_distance_sq(const ModalTrig& m, const Eigen::VectorXd& target,
                            double t) {
  double d2 = 0.0;
  for (int k = 0; k < m.omega.size(); ++k) {
    double w = m.omega(k);
    double pk = m.pt(k) * std::cos(w * t) - w * m.qt(k) * std::sin(w * t);
    double d = pk - target(k);
    d2 += d * d;
  }
  return d2;
}

// Squared distance of e^{tA} psi to a fixed state, in the norm selected by
// the weights (1 for Euclidean, omega-weighted plus the 1/2 for the energy
// norm). Both states enter as modal coordinates.
struct StateDistance {
  ModalTrig m;
  Eigen::VectorXd tqt, tpt;
  bool energy_norm = false;

  double operator()(double t) const {
    double d2 = 0.0;
    for (int k = 0; k < m.omega.size(); ++k) {
      double w = m.omega(k);
      double c = std::cos(w * t);
      double s = std::sin(w * t);
      double qk = c * m.qt(k) + (s / w) * m.pt(k);
      double pk = -w * s * m.qt(k) + c * m.pt(k);
      double dq = qk - tqt(k);
      double dp = pk - tpt(k);
      if (energy_norm) {
        d2 += 0.5 * (dp * dp + w * w * dq * dq);
      } else {
        d2 += dq * dq + dp * dp;
      }
    }
    return d2;
  }
};

}  // namespace

Eigen::MatrixXd jacobian_columns(const SystemSpec& spec, const State& psi,
                                 const std::vector<double>& taus) {
  check_finite(psi);
  const int k = static_cast<int>(taus.size());
  Eigen::MatrixXd cols(2 * spec.n, k);
  for (int i = 0; i < k; ++i) {
    double delta = 1e-6 * std::max(1.0, taus[static_cast<std::size_t>(i)]);
    std::vector<double> up = taus;
    std::vector<double> dn = taus;
    up[static_cast<std::size_t>(i)] += delta;
    dn[static_cast<std::size_t>(i)] -= delta;
    State su = compose_unchecked(spec, psi, up);
    State sd = compose_unchecked(spec, psi, dn);
    cols.col(i).head(spec.n) = (su.q - sd.q) / (2.0 * delta);
    cols.col(i).tail(spec.n) = (su.p - sd.p) / (2.0 * delta);
  }
  return cols;
}

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

CoveringResult verify_local_covering(const SystemSpec& spec, const State& psi,
                                     int k, int trials, Rng& rng,
                                     double t_max) {
  if (k < 1 || trials < 1) throw ConfigError("need k >= 1 and trials >= 1");
  // Columns are tangent to the energy surface, so ranks beyond its
  // dimension 2N-1 are unreachable by construction.
  if (k > 2 * spec.n - 1)
    throw ConfigError("k exceeds the energy surface dimension 2N-1");
  if (t_max <= 0.0) t_max = 2.0 * kPi / spec.omega(0);
  CoveringResult res;
  AdmissibilityReport rep = check_admissible(spec);
  res.admissibility_warning =
      !(rep.in_v_plus &&
        rep.independence == Independence::independent_up_to_bound);
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<double> taus(static_cast<std::size_t>(k));
    for (auto& tau : taus) tau = rng.uniform01() * t_max;
    int rank = numerical_rank(jacobian_columns(spec, psi, taus));
    ++res.trials_used;
    if (rank > res.achieved_rank) {
      res.achieved_rank = rank;
      res.witness = taus;
    }
    if (res.achieved_rank >= k) break;
  }
  return res;
}

FlipTimeResult find_flip_time(const SystemSpec& spec, const State& psi,
                              const Eigen::VectorXd& target_p_modal,
                              double horizon, long long grid,
                              std::optional<double> required_tol) {
  check_finite(psi);
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  ModalState ms = to_modal(spec, psi);
  ModalTrig m{ms.qt, ms.pt, spec.omega};
  auto f = [&](double t) { return momentum_distance_sq(m, target_p_modal, t); };
  FlipTimeResult res = scan_min(f, horizon, grid);
  res.distance = std::sqrt(res.distance);
  if (required_tol && res.distance > *required_tol) {
    throw HorizonTooShort(res.distance, horizon);
  }
  return res;
}

namespace {

// Best-phase Euclidean distance from the torus with unit radii r to the
// anchor: all betas are positive under the sign convention, so the optimum
// puts every mode at phase zero.
double torus_offset(const SystemSpec& spec, const TorusVector& r_unit,
                    double scale) {
  double s = 0.0;
  for (int k = 0; k < spec.n; ++k) {
    double d = r_unit(k) - std::abs(spec.beta(k));
    s += d * d;
  }
  return scale * std::sqrt(s);
}

struct Candidate {
  double t = 0.0;
  double delta = 0.0;
  double offset = 0.0;
  bool valid = false;
};

}  // namespace

SteerResult steer_to_gstar(const SystemSpec& spec, const State& psi,
                           const SteerOptions& opt) {
  check_finite(psi);
  double h0 = energy(spec, psi);
  if (std::abs(h0 - spec.h) > 1e-9 * std::max(1.0, spec.h)) {
    throw DifferentEnergy(h0, spec.h);
  }
  const double scale = std::sqrt(2.0 * spec.h);
  const double horizon0 = opt.horizon > 0.0 ? opt.horizon : default_horizon(spec);
  const double eps_delta = opt.eps_delta > 0.0 ? opt.eps_delta : 0.5 * opt.eps;
  const double offset_target = 0.5 * opt.eps;
  int budget = opt.budget;
  if (budget <= 0) {
    double worst = 0.0;
    for (int k = 0; k < spec.n; ++k) {
      double b2 = spec.beta(k) * spec.beta(k);
      if (b2 == 0.0) throw NotInVPlus(k);
      worst = std::max(worst, 1.0 / b2);
    }
    budget = static_cast<int>(std::ceil(worst)) + 3;
  }

  SteerResult res;
  State cur = psi;

  for (int flip_i = 0; flip_i < budget; ++flip_i) {
    TorusVector r_unit = action_vars(spec, cur) / scale;
    r_unit /= r_unit.norm();
    TorusMetrics met = metrics(spec, r_unit);
    double offset = torus_offset(spec, r_unit, scale);
    if (met.delta <= eps_delta && offset <= offset_target) break;

    Eigen::VectorXd p_opt = optimal_flip_momentum(spec, r_unit);
    TorusVector predicted = psi_map(spec, r_unit, p_opt);
    TorusMetrics pred_met = metrics(spec, predicted / predicted.norm());
    double predicted_dec = met.delta - pred_met.delta;
    if (predicted_dec <= 1e-12 && offset <= offset_target) break;

    Eigen::VectorXd target_p = scale * p_opt;
    ModalState ms = to_modal(spec, cur);
    ModalTrig mt{ms.qt, ms.pt, spec.omega};

    Candidate best;
    bool accepted = false;
    for (int attempt = 0; attempt <= opt.max_retries && !accepted; ++attempt) {
      double hz = horizon0 * static_cast<double>(1LL << attempt);
      long long grid =
          std::min<long long>(kMaxGrid, opt.grid << (2 * attempt));
      FlipTimeResult ft = find_flip_time(spec, cur, target_p, hz, grid);

      Eigen::VectorXd p_cand(spec.n);
      for (int k = 0; k < spec.n; ++k) {
        double w = spec.omega(k);
        p_cand(k) = mt.pt(k) * std::cos(w * ft.t) -
                    w * mt.qt(k) * std::sin(w * ft.t);
      }
      TorusVector img = psi_map(spec, r_unit, p_cand / scale, 1e-7);
      img /= img.norm();
      Candidate cand{ft.t, metrics(spec, img).delta,
                     torus_offset(spec, img, scale), true};
      if (!best.valid || cand.delta + cand.offset < best.delta + best.offset) {
        best = cand;
      }
      double realized_dec = met.delta - cand.delta;
      accepted = realized_dec >= opt.accept_fraction * predicted_dec ||
                 (cand.delta <= eps_delta && cand.offset <= offset_target);
    }
    double best_dec = met.delta - best.delta;
    bool exit_quality = best.delta <= eps_delta && best.offset <= offset_target;
    if (!accepted && best_dec < opt.stall_fraction * predicted_dec &&
        !exit_quality) {
      throw StalledProgress(flip_i + 1, best_dec, predicted_dec);
    }

    cur = jstep(spec, cur, best.t);
    res.taus.push_back(best.t);
    TorusVector r_new = action_vars(spec, cur) / scale;
    res.per_step_delta.push_back(metrics(spec, r_new / r_new.norm()).delta);
  }
  res.flips_used = static_cast<int>(res.taus.size());

  {
    TorusVector r_unit = action_vars(spec, cur) / scale;
    r_unit /= r_unit.norm();
    TorusMetrics met = metrics(spec, r_unit);
    double offset = torus_offset(spec, r_unit, scale);
    if (met.delta > eps_delta && offset > offset_target) {
      throw BudgetExceeded(budget, offset);
    }
  }

  // Terminal free flow: align the phases with the anchor.
  State anchor = g_star(spec);
  ModalState ms = to_modal(spec, cur);
  ModalState ta = to_modal(spec, anchor);
  StateDistance dist{{ms.qt, ms.pt, spec.omega}, ta.qt, ta.pt, false};
  FlipTimeResult align{0.0, dist(0.0)};
  for (int attempt = 0; attempt <= 8; ++attempt) {
    double hz = horizon0 * static_cast<double>(1LL << attempt);
    long long grid = std::min<long long>(kMaxGrid, opt.grid << (2 * attempt));
    FlipTimeResult cand = scan_min(dist, hz, grid);
    if (cand.distance < align.distance || attempt == 0) align = cand;
    if (std::sqrt(align.distance) <= 0.95 * opt.eps) break;
  }
  res.terminal_flow = align.t;
  res.final_state = propagate(spec, cur, align.t);
  State diff{res.final_state.q - anchor.q, res.final_state.p - anchor.p};
  res.final_error = std::sqrt(diff.q.squaredNorm() + diff.p.squaredNorm());
  return res;
}

double recurrence_time(const SystemSpec& spec, const State& psi,
                       const State& target, double eps, double horizon,
                       long long grid) {
  check_finite(psi);
  check_finite(target);
  if (!(horizon > 0.0) || grid < 2) {
    throw ConfigError("horizon must be positive and grid >= 2");
  }
  grid = std::min(grid, kMaxGrid);
  ModalState ms = to_modal(spec, psi);
  ModalState tm = to_modal(spec, target);
  StateDistance dist{{ms.qt, ms.pt, spec.omega}, tm.qt, tm.pt, true};
  double eps2 = eps * eps;

  // Lipschitz bound for the energy-norm distance along the flow.
  double lip = spec.omega(spec.n - 1) * h_norm(spec, psi) +
               spec.omega(spec.n - 1) * h_norm(spec, target);
  double spacing = horizon / static_cast<double>(grid - 1);
  double admit = eps + lip * spacing;
  double admit2 = admit * admit;

  const long long block = 1 << 20;
  std::vector<double> vals(static_cast<std::size_t>(
      std::min(block, grid)));
  double best_val = dist(0.0);
  double best_t = 0.0;
  auto golden_tol = 1e-10 * std::max(horizon, 1.0);
  for (long long start = 0; start < grid; start += block) {
    long long count = std::min(block, grid - start);
    parallel_for_index(count, [&](std::int64_t i) {
      vals[static_cast<std::size_t>(i)] =
          dist(static_cast<double>(start + i) * spacing);
    });
    for (long long i = 0; i < count; ++i) {
      double v = vals[static_cast<std::size_t>(i)];
      long long j = start + i;
      if (v < best_val) {
        best_val = v;
        best_t = static_cast<double>(j) * spacing;
      }
      if (v <= admit2) {
        double lo = std::max(0.0, static_cast<double>(j - 1) * spacing);
        double hi = std::min(horizon, static_cast<double>(j + 1) * spacing);
        double rv = 0.0;
        double rt = golden_refine(dist, lo, hi, golden_tol, &rv);
        if (rv <= eps2) return rt;  // earliest admissible basin wins
      }
    }
  }
  double rv = 0.0;
  double rt = golden_refine(dist, std::max(0.0, best_t - spacing),
                            std::min(horizon, best_t + spacing), golden_tol,
                            &rv);
  if (rv <= eps2) return rt;
  throw HorizonTooShort(std::sqrt(std::min(rv, best_val)), horizon);
}

namespace {

// Forward near-recurrence standing in for a backward flow; escalates the
// horizon until the energy-norm tolerance is met, else returns the best
// time found.
double recurrence_or_best(const SystemSpec& spec, const State& psi,
                          const State& target, double eps, double horizon0,
                          long long grid0, int retries) {
  for (int attempt = 0; attempt <= retries; ++attempt) {
    double hz = horizon0 * static_cast<double>(1LL << attempt);
    long long grid = std::min<long long>(kMaxGrid, grid0 << (2 * attempt));
    try {
      return recurrence_time(spec, psi, target, eps, hz, grid);
    } catch (const HorizonTooShort&) {
      if (attempt == retries) break;
    }
  }
  // Accept the global minimum at the largest horizon; the caller reports
  // the realized error.
  double hz = horizon0 * static_cast<double>(1LL << retries);
  long long grid = std::min<long long>(kMaxGrid, grid0 << (2 * retries));
  ModalState ms = to_modal(spec, psi);
  ModalState tm = to_modal(spec, target);
  StateDistance dist{{ms.qt, ms.pt, spec.omega}, tm.qt, tm.pt, true};
  return scan_min(dist, hz, grid).t;
}

}  // namespace

SteerResult steer_to_target(const SystemSpec& spec, const State& from,
                            const State& to, double eps, int budget,
                            const SteerOptions& opt) {
  double hf = energy(spec, from);
  double ht = energy(spec, to);
  if (std::abs(hf - ht) > 1e-9 * std::max(1.0, std::max(hf, ht))) {
    throw DifferentEnergy(hf, ht);
  }

  // Norm conversion factors between Euclidean and energy norms.
  double c_to_h = std::sqrt(std::max(1.0, spec.omega_sq(spec.n - 1)) / 2.0);
  double c_to_e = std::sqrt(2.0 / std::min(1.0, spec.omega_sq(0)));

  SteerOptions leg = opt;
  leg.eps = eps / (6.0 * c_to_h * c_to_e);
  SteerResult a = steer_to_gstar(spec, from, leg);
  SteerResult b = steer_to_gstar(spec, to, leg);
  int m = b.flips_used;
  if (a.flips_used + m > budget) {
    throw BudgetExceeded(budget, a.final_error + b.final_error);
  }

  double eps_r = eps / (3.0 * static_cast<double>(m + 1) * c_to_e);
  double horizon0 = opt.horizon > 0.0 ? opt.horizon : default_horizon(spec);

  SteerResult res;
  res.taus = a.taus;
  State cur = a.final_state;
  double pending = a.terminal_flow;

  // Backward flow by b.terminal_flow, realized forward.
  {
    State target = propagate(spec, cur, -b.terminal_flow);
    double s = recurrence_or_best(spec, cur, target, eps_r, horizon0, opt.grid,
                                  opt.max_retries);
    cur = propagate(spec, cur, s);
    pending += s;
  }
  res.per_step_delta = a.per_step_delta;
  double scale = std::sqrt(2.0 * spec.h);
  for (int i = m - 1; i >= 0; --i) {
    res.taus.push_back(pending);
    cur = flip(cur);
    TorusVector r_unit = action_vars(spec, cur) / scale;
    res.per_step_delta.push_back(metrics(spec, r_unit / r_unit.norm()).delta);
    State target =
        propagate(spec, cur, -b.taus[static_cast<std::size_t>(i)]);
    double s = recurrence_or_best(spec, cur, target, eps_r, horizon0, opt.grid,
                                  opt.max_retries);
    cur = propagate(spec, cur, s);
    pending = s;
  }

  res.terminal_flow = pending;
  res.final_state = cur;
  res.flips_used = static_cast<int>(res.taus.size());
  State diff{cur.q - to.q, cur.p - to.p};
  res.final_error = std::sqrt(diff.q.squaredNorm() + diff.p.squaredNorm());
  return res;
}

ExactSteerN1 steer_exact_n1(double omega, const State& psi,
                            const State& psi_target, double tol) {
  if (psi.q.size() != 1 || psi_target.q.size() != 1) {
    throw ConfigError("closed form requires a single oscillator");
  }
  if (!(omega > 0.0)) throw ConfigError("frequency must be positive");
  double e0 = 0.5 * (psi.p(0) * psi.p(0) + omega * omega * psi.q(0) * psi.q(0));
  double e1 = 0.5 * (psi_target.p(0) * psi_target.p(0) +
                     omega * omega * psi_target.q(0) * psi_target.q(0));
  if (std::abs(e0 - e1) > tol * std::max(1.0, std::max(e0, e1))) {
    throw DifferentEnergy(e0, e1);
  }
  const double t0 = 2.0 * kPi / omega;
  if (e0 <= 0.0) return {0.5 * t0, t0};

  // Phase moves as theta - omega t; the flip negates the momentum.
  double theta_flip = std::atan2(-psi.p(0), omega * psi.q(0));
  double theta_target = std::atan2(psi_target.p(0), omega * psi_target.q(0));
  double t2 = std::fmod((theta_flip - theta_target) / omega, t0);
  if (t2 < 0.0) t2 += t0;
  if (t0 - t2 < 1e-15 * t0) t2 = 0.0;  // wrapped all the way around
  return {0.5 * (t0 - t2), t0};
}

}  // namespace flipflow
