#pragma once

#include <functional>
#include <string>
#include <vector>

#include "flipflow/dynamics.hpp"
#include "flipflow/rng.hpp"

namespace flipflow {

// Distribution of the gaps between flip events. Gaps are positive, i.i.d.,
// with finite mean. fixed_schedule replays a given list (for tests; it makes
// no ergodicity claims).
class WaitingLaw {
 public:
  enum class Kind { exponential, gamma, fixed_schedule };

  static WaitingLaw exponential(double rate);
  static WaitingLaw gamma_law(double shape, double scale);
  static WaitingLaw fixed_schedule(std::vector<double> gaps);

  // Copies restart the schedule replay position.
  WaitingLaw(const WaitingLaw& other)
      : kind_(other.kind_),
        rate_(other.rate_),
        shape_(other.shape_),
        scale_(other.scale_),
        schedule_(other.schedule_),
        next_(0) {}
  WaitingLaw& operator=(const WaitingLaw& other) {
    kind_ = other.kind_;
    rate_ = other.rate_;
    shape_ = other.shape_;
    scale_ = other.scale_;
    schedule_ = other.schedule_;
    next_ = 0;
    return *this;
  }

  Kind kind() const { return kind_; }
  double rate() const { return rate_; }
  double shape() const { return shape_; }
  double scale() const { return scale_; }
  const std::vector<double>& schedule() const { return schedule_; }
  double mean() const;

  // Consumes rng draws for the random laws; replays (and advances) the
  // schedule otherwise. Copies of a law restart the schedule.
  double sample(Rng& rng) const;

 private:
  WaitingLaw() = default;
  Kind kind_ = Kind::exponential;
  double rate_ = 1.0;
  double shape_ = 1.0;
  double scale_ = 1.0;
  std::vector<double> schedule_;
  mutable std::size_t next_ = 0;
};

double sample_wait(const WaitingLaw& law, Rng& rng);

struct Event {
  double t;    // absolute event time
  double tau;  // gap that preceded the event
};

struct EventLog {
  std::vector<Event> events;
  bool keep_states = false;
  std::vector<State> states;  // post-flip states, filled when keep_states
};

// Called once per inter-event segment with the segment's starting state and
// its duration (the final partial segment included).
using SegmentObserver = std::function<void(const State&, double)>;

// Right-continuous piecewise-deterministic trajectory on [0, t_end]:
// free flow between events, flip at each event. Returns the state at t_end.
State simulate_pdmp(const SystemSpec& spec, const State& psi0, double t_end,
                    const WaitingLaw& law, Rng& rng, EventLog* log = nullptr,
                    const std::vector<SegmentObserver>& observers = {});

// States of the embedded chain psi_k = state just after the k-th flip.
std::vector<State> embedded_chain(const SystemSpec& spec, const State& psi0,
                                  int n_steps, const WaitingLaw& law, Rng& rng);

// Phase-space functions with closed-form averages along the free flow.
// Quadratic observables integrate exactly over a segment; generic ones fall
// back to composite Simpson quadrature.
class Observable {
 public:
  enum class Kind {
    hamiltonian,
    action_sq,    // r_k^2
    momentum_sq,  // p_i^2 (particle coordinates)
    position_sq,  // q_i^2
    momentum_prod,
    position_prod,
    generic
  };

  static Observable hamiltonian();
  static Observable action_sq(int k);
  static Observable momentum_sq(int i);
  static Observable position_sq(int i);
  static Observable momentum_prod(int i, int j);
  static Observable position_prod(int i, int j);
  static Observable generic(std::string name,
                            std::function<double(const SystemSpec&,
                                                 const State&)> fn);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  int i() const { return i_; }
  int j() const { return j_; }

  double eval(const SystemSpec& spec, const State& psi) const;
  bool exact_segment() const { return kind_ != Kind::generic; }

  // Integral of the observable along e^{sA} from the segment start over
  // s in [0, tau]; exact for the quadratic kinds.
  double segment_integral(const SystemSpec& spec, const ModalState& start,
                          double tau, double substep) const;

 private:
  Kind kind_ = Kind::generic;
  std::string name_;
  int i_ = 0;
  int j_ = 0;
  std::function<double(const SystemSpec&, const State&)> fn_;
};

struct TimeAverage {
  double mean = 0.0;
  long long n_events = 0;
};

// (1/t_end) integral of f along one trajectory. substep <= 0 picks
// (2 pi / omega_max) / 32 for the quadrature fallback.
TimeAverage time_average(const SystemSpec& spec, const State& psi0,
                         const Observable& f, double t_end,
                         const WaitingLaw& law, Rng& rng, double substep = 0.0);

// One pass, shared trajectory, several observables.
std::vector<TimeAverage> time_average_multi(const SystemSpec& spec,
                                            const State& psi0,
                                            const std::vector<Observable>& fs,
                                            double t_end, const WaitingLaw& law,
                                            Rng& rng, double substep = 0.0);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<TimeAverage> averages;  // one per observable
};

// Independent trajectories, one per seed, identical seeds giving identical
// rows; runs seeds in parallel with results in input order.
std::vector<SeedResult> multi_trajectory(const SystemSpec& spec,
                                         const State& psi0, double t_end,
                                         const WaitingLaw& law,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::vector<Observable>& fs,
                                         double substep = 0.0);

// Stream identifiers: every random draw in the library is addressed under
// (seed, purpose, ...), keeping subcommands reproducible and schedule-free.
namespace stream {
constexpr std::uint64_t pdmp = 1;
constexpr std::uint64_t liouville = 2;
constexpr std::uint64_t chain = 3;
constexpr std::uint64_t reference = 4;
}  // namespace stream

}  // namespace flipflow
