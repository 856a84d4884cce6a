#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "flipflow/dynamics.hpp"
#include "flipflow/rng.hpp"
#include "oracle_ode.hpp"

using namespace flipflow;

namespace {

State random_state(int n, Rng& rng) {
  State psi;
  psi.q = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) {
    return rng.normal();
  });
  psi.p = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) {
    return rng.normal();
  });
  return psi;
}

double state_gap(const SystemSpec& s, const State& a, const State& b) {
  State d;
  d.q = a.q - b.q;
  d.p = a.p - b.p;
  return h_norm(s, d);
}

}  // namespace

TEST_CASE("flow matches direct integration of the equations of motion") {
  Rng rng(202);
  for (int rep = 0; rep < 12; ++rep) {
    const int n = 1 + static_cast<int>(rng.uniform01() * 5.0);
    SystemSpec s = decompose(random_spd(n, 500 + static_cast<unsigned>(rep)),
                             0.5);
    State psi = random_state(n, rng);
    const double t = rng.uniform(0.1, 8.0);
    State got = propagate(s, psi, t);
    State want = oracle::integrate_linear(s.v, psi, t);
    CHECK(state_gap(s, got, want) <= 1e-9 * h_norm(s, psi));
  }
}

TEST_CASE("quarter period of the unit oscillator") {
  SystemSpec s = decompose(Eigen::MatrixXd::Identity(1, 1), 0.5);
  State psi;
  psi.q = Eigen::VectorXd::Constant(1, 1.0);
  psi.p = Eigen::VectorXd::Zero(1);
  State out = propagate(s, psi, M_PI / 2.0);
  CHECK(std::abs(out.q(0)) < 1e-15);
  CHECK(out.p(0) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("flow is a one-parameter group") {
  SystemSpec s = decompose(harmonic_chain(3), 0.5);
  Rng rng(7);
  State psi = random_state(3, rng);
  State a = propagate(s, propagate(s, psi, 1.3), 2.4);
  State b = propagate(s, psi, 3.7);
  CHECK(state_gap(s, a, b) < 1e-12 * h_norm(s, psi));
  State back = propagate(s, propagate(s, psi, 5.0), -5.0);
  CHECK(state_gap(s, back, psi) < 1e-12 * h_norm(s, psi));
}

TEST_CASE("flip touches only the marked momentum and is an involution") {
  Rng rng(11);
  State psi = random_state(4, rng);
  State f = flip(psi);
  CHECK(f.q == psi.q);
  CHECK(f.p(0) == -psi.p(0));
  CHECK(f.p.tail(3) == psi.p.tail(3));
  State ff = flip(f);
  CHECK(ff.q == psi.q);
  CHECK(ff.p == psi.p);
}

TEST_CASE("flip preserves the energy exactly") {
  SystemSpec s = decompose(random_spd(4, 3), 0.5);
  Rng rng(13);
  State psi = random_state(4, rng);
  CHECK(energy(s, flip(psi)) == energy(s, psi));
}

TEST_CASE("negative waiting times are rejected") {
  SystemSpec s = decompose(harmonic_chain(2), 0.5);
  Rng rng(17);
  State psi = random_state(2, rng);
  CHECK_THROWS_AS(jstep(s, psi, -0.1), ConfigError);
  CHECK_THROWS_AS(jcompose(s, psi, {0.5, -0.5}), ConfigError);
}

TEST_CASE("inverse word undoes the flip word") {
  SystemSpec s = decompose(random_spd(5, 21), 0.5);
  Rng rng(19);
  State psi = random_state(5, rng);
  std::vector<double> taus;
  for (int i = 0; i < 10; ++i) taus.push_back(rng.exponential(1.0));
  State fwd = jcompose(s, psi, taus);
  State back = inverse_jcompose(s, fwd, taus);
  CHECK(state_gap(s, back, psi) <= 1e-9 * h_norm(s, psi));
}

TEST_CASE("actions are invariant under the free flow") {
  SystemSpec s = decompose(harmonic_chain(4), 0.5);
  Rng rng(23);
  State psi = random_state(4, rng);
  TorusVector r0 = action_vars(s, psi);
  for (double t : {0.1, 3.0, 17.5, 123.0}) {
    TorusVector rt = action_vars(s, propagate(s, psi, t));
    CHECK((rt - r0).cwiseAbs().maxCoeff() < 1e-12 * r0.maxCoeff());
  }
}

TEST_CASE("flow and flip are isometries of the energy inner product") {
  SystemSpec s = decompose(random_spd(3, 31), 0.5);
  Rng rng(29);
  State a = random_state(3, rng);
  State b = random_state(3, rng);
  const double ref = h_inner(s, a, b);
  const double after =
      h_inner(s, propagate(s, a, 2.7), propagate(s, b, 2.7));
  CHECK(after == doctest::Approx(ref).epsilon(1e-12));
  CHECK(h_norm(s, flip(a)) == doctest::Approx(h_norm(s, a)).epsilon(1e-14));
}

TEST_CASE("energy is conserved along long flows") {
  SystemSpec s = decompose(random_spd(6, 37), 0.5);
  Rng rng(31);
  State psi = random_state(6, rng);
  const double e0 = energy(s, psi);
  CHECK(std::abs(energy(s, propagate(s, psi, 1000.0)) - e0) < 1e-11 * e0);
}

TEST_CASE("anchor state lives on the energy surface") {
  for (double h : {0.5, 2.0}) {
    SystemSpec s = decompose(harmonic_chain(3), h);
    State g = g_star(s);
    CHECK(g.q.cwiseAbs().maxCoeff() == 0.0);
    CHECK(g.p(0) == doctest::Approx(std::sqrt(2.0 * h)).epsilon(1e-14));
    CHECK(g.p.tail(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(energy(s, g) == doctest::Approx(h).epsilon(1e-13));
    TorusVector want = r_star(s);
    TorusVector got = action_vars(s, g);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(want == (std::sqrt(2.0 * h) * s.beta.cwiseAbs()).eval());
  }
}

TEST_CASE("modal coordinates round-trip") {
  SystemSpec s = decompose(random_spd(4, 41), 0.5);
  Rng rng(37);
  State psi = random_state(4, rng);
  State back = from_modal(s, to_modal(s, psi));
  CHECK(state_gap(s, back, psi) < 1e-13 * h_norm(s, psi));
  Eigen::VectorXd pm = modal_momenta(s, psi);
  CHECK((pm - (s.modes.transpose() * psi.p)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("non-finite states are rejected") {
  SystemSpec s = decompose(harmonic_chain(2), 0.5);
  State bad;
  bad.q = Eigen::Vector2d(0.0, std::nan(""));
  bad.p = Eigen::Vector2d::Zero();
  CHECK_THROWS_AS(check_finite(bad), NonFiniteState);
  CHECK_THROWS_AS(propagate(s, bad, 1.0), NonFiniteState);
}
