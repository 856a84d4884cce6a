#include "flipflow/pdmp.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "flipflow/errors.hpp"
#include "flipflow/parallel.hpp"

namespace flipflow {

WaitingLaw WaitingLaw::exponential(double rate) {
  if (!(rate > 0.0)) throw ConfigError("exponential rate must be positive");
  WaitingLaw law;
  law.kind_ = Kind::exponential;
  law.rate_ = rate;
  return law;
}

WaitingLaw WaitingLaw::gamma_law(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw ConfigError("gamma shape and scale must be positive");
  }
  WaitingLaw law;
  law.kind_ = Kind::gamma;
  law.shape_ = shape;
  law.scale_ = scale;
  return law;
}

WaitingLaw WaitingLaw::fixed_schedule(std::vector<double> gaps) {
  for (double g : gaps) {
    if (!(g >= 0.0)) throw ConfigError("schedule gaps must be nonnegative");
  }
  WaitingLaw law;
  law.kind_ = Kind::fixed_schedule;
  law.schedule_ = std::move(gaps);
  return law;
}

double WaitingLaw::mean() const {
  switch (kind_) {
    case Kind::exponential:
      return 1.0 / rate_;
    case Kind::gamma:
      return shape_ * scale_;
    case Kind::fixed_schedule: {
      if (schedule_.empty()) return 0.0;
      double s = 0.0;
      for (double g : schedule_) s += g;
      return s / static_cast<double>(schedule_.size());
    }
  }
  return 0.0;
}

double WaitingLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::exponential:
      return rng.exponential(rate_);
    case Kind::gamma:
      return rng.gamma(shape_, scale_);
    case Kind::fixed_schedule:
      // Exhausted schedules stop producing events.
      if (next_ >= schedule_.size()) {
        return std::numeric_limits<double>::infinity();
      }
      return schedule_[next_++];
  }
  return 0.0;
}

double sample_wait(const WaitingLaw& law, Rng& rng) { return law.sample(rng); }

State simulate_pdmp(const SystemSpec& spec, const State& psi0, double t_end,
                    const WaitingLaw& law, Rng& rng, EventLog* log,
                    const std::vector<SegmentObserver>& observers) {
  check_finite(psi0);
  if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  State psi = psi0;
  double t = 0.0;
  for (;;) {
    double tau = law.sample(rng);
    if (!(tau >= 0.0)) throw Error("waiting law produced a negative gap");
    if (t + tau >= t_end) {
      double rest = t_end - t;
      for (const auto& obs : observers) obs(psi, rest);
      return propagate(spec, psi, rest);
    }
    for (const auto& obs : observers) obs(psi, tau);
    psi = jstep(spec, psi, tau);
    t += tau;
    if (log) {
      log->events.push_back({t, tau});
      if (log->keep_states) log->states.push_back(psi);
    }
  }
}

std::vector<State> embedded_chain(const SystemSpec& spec, const State& psi0,
                                  int n_steps, const WaitingLaw& law,
                                  Rng& rng) {
  if (n_steps < 0) throw ConfigError("n_steps must be nonnegative");
  check_finite(psi0);
  std::vector<State> chain;
  chain.reserve(static_cast<std::size_t>(n_steps));
  State psi = psi0;
  for (int k = 0; k < n_steps; ++k) {
    double tau = law.sample(rng);
    if (!std::isfinite(tau)) throw Error("waiting law exhausted");
    psi = jstep(spec, psi, tau);
    chain.push_back(psi);
  }
  return chain;
}

Observable Observable::hamiltonian() {
  Observable o;
  o.kind_ = Kind::hamiltonian;
  o.name_ = "H";
  return o;
}

Observable Observable::action_sq(int k) {
  Observable o;
  o.kind_ = Kind::action_sq;
  o.i_ = k;
  o.name_ = "r" + std::to_string(k + 1) + "_sq";
  return o;
}

Observable Observable::momentum_sq(int i) {
  Observable o;
  o.kind_ = Kind::momentum_sq;
  o.i_ = i;
  o.name_ = "p" + std::to_string(i + 1) + "_sq";
  return o;
}

Observable Observable::position_sq(int i) {
  Observable o;
  o.kind_ = Kind::position_sq;
  o.i_ = i;
  o.name_ = "q" + std::to_string(i + 1) + "_sq";
  return o;
}

Observable Observable::momentum_prod(int i, int j) {
  Observable o;
  o.kind_ = Kind::momentum_prod;
  o.i_ = i;
  o.j_ = j;
  o.name_ =
      "p" + std::to_string(i + 1) + "p" + std::to_string(j + 1);
  return o;
}

Observable Observable::position_prod(int i, int j) {
  Observable o;
  o.kind_ = Kind::position_prod;
  o.i_ = i;
  o.j_ = j;
  o.name_ =
      "q" + std::to_string(i + 1) + "q" + std::to_string(j + 1);
  return o;
}

Observable Observable::generic(
    std::string name,
    std::function<double(const SystemSpec&, const State&)> fn) {
  Observable o;
  o.kind_ = Kind::generic;
  o.name_ = std::move(name);
  o.fn_ = std::move(fn);
  return o;
}

double Observable::eval(const SystemSpec& spec, const State& psi) const {
  switch (kind_) {
    case Kind::hamiltonian:
      return energy(spec, psi);
    case Kind::action_sq: {
      double r = action_vars(spec, psi)(i_);
      return r * r;
    }
    case Kind::momentum_sq:
      return psi.p(i_) * psi.p(i_);
    case Kind::position_sq:
      return psi.q(i_) * psi.q(i_);
    case Kind::momentum_prod:
      return psi.p(i_) * psi.p(j_);
    case Kind::position_prod:
      return psi.q(i_) * psi.q(j_);
    case Kind::generic:
      return fn_(spec, psi);
  }
  return 0.0;
}

namespace {

// Primitive integrals over [0, tau] used by the quadratic closed forms:
// sin_int(w) = int cos(w s) ds, versine_int(w) = int sin(w s) ds; both are
// series-stabilized near w = 0.
double sin_int(double w, double tau) {
  double x = w * tau;
  if (std::abs(x) < 1e-4) {
    return tau * (1.0 - x * x / 6.0 * (1.0 - x * x / 20.0));
  }
  return std::sin(x) / w;
}

double versine_int(double w, double tau) {
  if (w == 0.0) return 0.0;
  double half = std::sin(0.5 * w * tau);
  return 2.0 * half * half / w;
}

double int_cos_cos(double a, double b, double tau) {
  return 0.5 * (sin_int(a - b, tau) + sin_int(a + b, tau));
}

double int_sin_sin(double a, double b, double tau) {
  return 0.5 * (sin_int(a - b, tau) - sin_int(a + b, tau));
}

double int_cos_sin(double a, double b, double tau) {
  return 0.5 * (versine_int(a + b, tau) - versine_int(a - b, tau));
}

struct HarmonicAmps {
  Eigen::VectorXd a;  // cosine amplitudes per mode
  Eigen::VectorXd b;  // sine amplitudes per mode
};

// Mode amplitudes of a particle coordinate along the free flow.
HarmonicAmps momentum_amps(const SystemSpec& spec, const ModalState& m,
                           int i) {
  HarmonicAmps h;
  h.a.resize(spec.n);
  h.b.resize(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    double mik = spec.modes(i, k);
    h.a(k) = mik * m.pt(k);
    h.b(k) = -mik * spec.omega(k) * m.qt(k);
  }
  return h;
}

HarmonicAmps position_amps(const SystemSpec& spec, const ModalState& m,
                           int i) {
  HarmonicAmps h;
  h.a.resize(spec.n);
  h.b.resize(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    double mik = spec.modes(i, k);
    h.a(k) = mik * m.qt(k);
    h.b(k) = mik * m.pt(k) / spec.omega(k);
  }
  return h;
}

double integrate_product(const SystemSpec& spec, const HarmonicAmps& u,
                         const HarmonicAmps& v, double tau) {
  double total = 0.0;
  for (int k = 0; k < spec.n; ++k) {
    double wk = spec.omega(k);
    for (int l = 0; l < spec.n; ++l) {
      double wl = spec.omega(l);
      total += u.a(k) * v.a(l) * int_cos_cos(wk, wl, tau);
      total += u.a(k) * v.b(l) * int_cos_sin(wk, wl, tau);
      total += u.b(k) * v.a(l) * int_cos_sin(wl, wk, tau);
      total += u.b(k) * v.b(l) * int_sin_sin(wk, wl, tau);
    }
  }
  return total;
}

}  // namespace

double Observable::segment_integral(const SystemSpec& spec,
                                    const ModalState& start, double tau,
                                    double substep) const {
  switch (kind_) {
    case Kind::hamiltonian: {
      double h = 0.0;
      for (int k = 0; k < spec.n; ++k) {
        h += start.pt(k) * start.pt(k) +
             spec.omega_sq(k) * start.qt(k) * start.qt(k);
      }
      return 0.5 * h * tau;
    }
    case Kind::action_sq: {
      double r2 = start.pt(i_) * start.pt(i_) +
                  spec.omega_sq(i_) * start.qt(i_) * start.qt(i_);
      return r2 * tau;
    }
    case Kind::momentum_sq: {
      HarmonicAmps u = momentum_amps(spec, start, i_);
      return integrate_product(spec, u, u, tau);
    }
    case Kind::position_sq: {
      HarmonicAmps u = position_amps(spec, start, i_);
      return integrate_product(spec, u, u, tau);
    }
    case Kind::momentum_prod: {
      HarmonicAmps u = momentum_amps(spec, start, i_);
      HarmonicAmps v = momentum_amps(spec, start, j_);
      return integrate_product(spec, u, v, tau);
    }
    case Kind::position_prod: {
      HarmonicAmps u = position_amps(spec, start, i_);
      HarmonicAmps v = position_amps(spec, start, j_);
      return integrate_product(spec, u, v, tau);
    }
    case Kind::generic:
      break;
  }
  // Composite Simpson on the segment.
  if (tau <= 0.0) return 0.0;
  long long half = std::max<long long>(
      1, static_cast<long long>(std::ceil(tau / (2.0 * substep))));
  long long n = 2 * half;
  double step = tau / static_cast<double>(n);
  double acc = 0.0;
  ModalState node = start;
  for (long long j = 0; j <= n; ++j) {
    // Re-advance from the segment start to avoid drift in long segments.
    node = start;
    advance_modal(spec, node, step * static_cast<double>(j));
    double fj = fn_(spec, from_modal(spec, node));
    double w = (j == 0 || j == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    acc += w * fj;
  }
  return acc * step / 3.0;
}

namespace {

double default_substep(const SystemSpec& spec) {
  return (2.0 * 3.14159265358979323846 / spec.omega(spec.n - 1)) / 32.0;
}

}  // namespace

std::vector<TimeAverage> time_average_multi(const SystemSpec& spec,
                                            const State& psi0,
                                            const std::vector<Observable>& fs,
                                            double t_end, const WaitingLaw& law,
                                            Rng& rng, double substep) {
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (substep <= 0.0) substep = default_substep(spec);
  std::vector<double> acc(fs.size(), 0.0);
  long long events = -1;  // the final partial segment is not an event
  auto observer = [&](const State& seg_start, double tau) {
    ++events;
    if (tau <= 0.0) return;
    ModalState m = to_modal(spec, seg_start);
    for (std::size_t i = 0; i < fs.size(); ++i) {
      acc[i] += fs[i].segment_integral(spec, m, tau, substep);
    }
  };
  simulate_pdmp(spec, psi0, t_end, law, rng, nullptr, {observer});
  std::vector<TimeAverage> out(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    out[i] = {acc[i] / t_end, events};
  }
  return out;
}

TimeAverage time_average(const SystemSpec& spec, const State& psi0,
                         const Observable& f, double t_end,
                         const WaitingLaw& law, Rng& rng, double substep) {
  return time_average_multi(spec, psi0, {f}, t_end, law, rng, substep)[0];
}

std::vector<SeedResult> multi_trajectory(
    const SystemSpec& spec, const State& psi0, double t_end,
    const WaitingLaw& law, const std::vector<std::uint64_t>& seeds,
    const std::vector<Observable>& fs, double substep) {
  std::vector<SeedResult> out(seeds.size());
  parallel_for_index(static_cast<std::int64_t>(seeds.size()),
                     [&](std::int64_t i) {
                       auto idx = static_cast<std::size_t>(i);
                       WaitingLaw local = law;  // schedules restart per seed
                       Rng rng = Rng(seeds[idx]).child(stream::pdmp);
                       out[idx].seed = seeds[idx];
                       out[idx].averages = time_average_multi(
                           spec, psi0, fs, t_end, local, rng, substep);
                     });
  return out;
}

}  // namespace flipflow
