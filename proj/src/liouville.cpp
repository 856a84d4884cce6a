#include "flipflow/liouville.hpp"

#include <algorithm>
#include <cmath>

#include "flipflow/errors.hpp"
#include "flipflow/parallel.hpp"

namespace flipflow {

State sample_liouville(const SystemSpec& spec, Rng& rng) {
  const int dim = 2 * spec.n;
  Eigen::VectorXd z(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) z(i) = rng.normal();
    norm = z.norm();
  } while (norm == 0.0);
  z *= std::sqrt(2.0 * spec.h) / norm;
  ModalState m;
  m.pt.resize(spec.n);
  m.qt.resize(spec.n);
  for (int k = 0; k < spec.n; ++k) {
    m.pt(k) = z(2 * k);
    m.qt(k) = z(2 * k + 1) / spec.omega(k);
  }
  return from_modal(spec, m);
}

Expectation reference_expectation(const SystemSpec& spec, const Observable& f,
                                  long long n, const Rng& rng) {
  const double h = spec.h;
  const double per_coord = h / static_cast<double>(spec.n);
  switch (f.kind()) {
    case Observable::Kind::hamiltonian:
      return {h, 0.0, true};
    case Observable::Kind::action_sq:
      return {2.0 * per_coord, 0.0, true};
    case Observable::Kind::momentum_sq:
      // Rows of the mode matrix are unit vectors.
      return {per_coord, 0.0, true};
    case Observable::Kind::position_sq: {
      double s = 0.0;
      for (int k = 0; k < spec.n; ++k) {
        double mik = spec.modes(f.i(), k);
        s += mik * mik / spec.omega_sq(k);
      }
      return {per_coord * s, 0.0, true};
    }
    case Observable::Kind::momentum_prod: {
      double s = 0.0;
      for (int k = 0; k < spec.n; ++k) {
        s += spec.modes(f.i(), k) * spec.modes(f.j(), k);
      }
      return {per_coord * s, 0.0, true};
    }
    case Observable::Kind::position_prod: {
      double s = 0.0;
      for (int k = 0; k < spec.n; ++k) {
        s += spec.modes(f.i(), k) * spec.modes(f.j(), k) / spec.omega_sq(k);
      }
      return {per_coord * s, 0.0, true};
    }
    case Observable::Kind::generic:
      break;
  }
  if (n <= 0) throw EmptySample();
  std::vector<double> vals(static_cast<std::size_t>(n));
  parallel_for_index(n, [&](std::int64_t i) {
    Rng local = rng.child(static_cast<std::uint64_t>(i));
    State s = sample_liouville(spec, local);
    vals[static_cast<std::size_t>(i)] = f.eval(spec, s);
  });
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= std::max<double>(1.0, static_cast<double>(n - 1));
  return {mean, std::sqrt(var / static_cast<double>(n)), false};
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw EmptySample();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double sup = 0.0;
  while (ia < a.size() && ib < b.size()) {
    double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    double d = std::abs(static_cast<double>(ia) / na -
                        static_cast<double>(ib) / nb);
    sup = std::max(sup, d);
  }
  return sup;
}

double invariance_check(const SystemSpec& spec, long long n, double t_probe,
                        const Rng& rng) {
  if (n <= 0) throw EmptySample();
  const int dim = 2 * spec.n;
  std::vector<std::vector<double>> pushed(static_cast<std::size_t>(dim)),
      fresh(static_cast<std::size_t>(dim));
  for (auto& v : pushed) v.resize(static_cast<std::size_t>(n));
  for (auto& v : fresh) v.resize(static_cast<std::size_t>(n));

  parallel_for_index(n, [&](std::int64_t i) {
    auto idx = static_cast<std::size_t>(i);
    Rng ra = rng.child(0, static_cast<std::uint64_t>(i));
    State s = sample_liouville(spec, ra);
    s = flip(propagate(spec, s, t_probe));
    Rng rb = rng.child(1, static_cast<std::uint64_t>(i));
    State f = sample_liouville(spec, rb);
    for (int c = 0; c < spec.n; ++c) {
      pushed[static_cast<std::size_t>(c)][idx] = s.q(c);
      pushed[static_cast<std::size_t>(spec.n + c)][idx] = s.p(c);
      fresh[static_cast<std::size_t>(c)][idx] = f.q(c);
      fresh[static_cast<std::size_t>(spec.n + c)][idx] = f.p(c);
    }
  });

  double worst = 0.0;
  for (int c = 0; c < dim; ++c) {
    worst = std::max(worst, ks_two_sample(pushed[static_cast<std::size_t>(c)],
                                          fresh[static_cast<std::size_t>(c)]));
  }
  return worst;
}

ErgodicReport ergodicity_report(const SystemSpec& spec, const State& psi0,
                                double t_end, const WaitingLaw& law,
                                const std::vector<std::uint64_t>& seeds,
                                const std::vector<Observable>& fs,
                                const ErgodicOptions& opt) {
  if (seeds.empty()) throw ConfigError("need at least one seed");
  ErgodicReport rep;
  rep.t_end = t_end;
  rep.seeds = seeds;
  rep.per_seed = multi_trajectory(spec, psi0, t_end, law, seeds, fs,
                                  opt.substep);

  Rng ref_rng = Rng(seeds[0]).child(stream::reference);
  rep.pass = true;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    ErgodicityRow row;
    row.observable = fs[i].name();
    double sum = 0.0;
    for (const auto& sr : rep.per_seed) sum += sr.averages[i].mean;
    row.estimate = sum / static_cast<double>(rep.per_seed.size());
    Expectation ref =
        reference_expectation(spec, fs[i], opt.reference_n, ref_rng);
    row.reference = ref.value;
    row.ref_std_error = ref.std_error;
    row.ref_exact = ref.exact;
    row.abs_error = std::abs(row.estimate - row.reference);
    row.pass = row.abs_error <= opt.avg_threshold;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }

  // Distribution of the embedded chain against fresh invariant draws.
  Rng chain_rng = Rng(seeds[0]).child(stream::chain);
  std::vector<State> chain =
      embedded_chain(spec, psi0, opt.chain_length, law, chain_rng);
  std::vector<State> kept;
  for (std::size_t k = static_cast<std::size_t>(opt.burn_in); k < chain.size();
       k += static_cast<std::size_t>(opt.thin)) {
    kept.push_back(chain[k]);
  }
  if (kept.empty()) throw ConfigError("chain_length too short for burn_in");

  Rng liou_rng = Rng(seeds[0]).child(stream::liouville);
  std::vector<State> draws(static_cast<std::size_t>(opt.liouville_n));
  parallel_for_index(opt.liouville_n, [&](std::int64_t i) {
    Rng local = liou_rng.child(static_cast<std::uint64_t>(i));
    draws[static_cast<std::size_t>(i)] = sample_liouville(spec, local);
  });

  rep.chain_ks.resize(static_cast<std::size_t>(2 * spec.n));
  for (int c = 0; c < 2 * spec.n; ++c) {
    std::vector<double> xs(kept.size()), ys(draws.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
      xs[k] = c < spec.n ? kept[k].q(c) : kept[k].p(c - spec.n);
    }
    for (std::size_t k = 0; k < draws.size(); ++k) {
      ys[k] = c < spec.n ? draws[k].q(c) : draws[k].p(c - spec.n);
    }
    rep.chain_ks[static_cast<std::size_t>(c)] = ks_two_sample(xs, ys);
  }
  rep.max_chain_ks =
      *std::max_element(rep.chain_ks.begin(), rep.chain_ks.end());
  rep.chain_pass = rep.max_chain_ks <= opt.ks_threshold;
  rep.pass = rep.pass && rep.chain_pass;
  return rep;
}

}  // namespace flipflow
