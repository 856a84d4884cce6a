#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "flipflow/system.hpp"

using namespace flipflow;

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

TEST_CASE("single oscillator decomposition") {
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = 1.0;
  SystemSpec s = decompose(v, 0.5);
  CHECK(s.n == 1);
  CHECK(s.omega_sq(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.omega(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.beta(0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("two-particle chain modes") {
  Eigen::MatrixXd v = harmonic_chain(2);
  CHECK(v(0, 0) == 2.0);
  CHECK(v(0, 1) == -1.0);
  CHECK(v(1, 0) == -1.0);
  CHECK(v(1, 1) == 2.0);
  SystemSpec s = decompose(v, 0.5);
  CHECK(s.omega_sq(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.omega_sq(1) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.beta(0) == doctest::Approx(1.0 / kSqrt2).epsilon(1e-12));
  CHECK(s.beta(1) == doctest::Approx(1.0 / kSqrt2).epsilon(1e-12));
  // columns orthonormal, first component positive
  Eigen::MatrixXd gram = s.modes.transpose() * s.modes;
  CHECK((gram - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(s.modes(0, 0) > 0.0);
  CHECK(s.modes(0, 1) > 0.0);
}

TEST_CASE("three-particle chain spectrum") {
  SystemSpec s = decompose(harmonic_chain(3), 0.5);
  CHECK(s.omega_sq(0) == doctest::Approx(2.0 - kSqrt2).epsilon(1e-12));
  CHECK(s.omega_sq(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.omega_sq(2) == doctest::Approx(2.0 + kSqrt2).epsilon(1e-12));
  CHECK(s.beta.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("beta normalization holds for every decomposition") {
  for (int n : {1, 2, 3, 5, 8}) {
    SystemSpec s = decompose(random_spd(n, 42 + static_cast<unsigned>(n)), 1.0);
    CHECK(s.beta.squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s.beta == s.modes.row(0).transpose());
  }
}

TEST_CASE("diagonal matrix decouples a mode") {
  Eigen::MatrixXd v = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  SystemSpec s = decompose(v, 0.5);
  CHECK(s.beta(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(s.beta(1)) < 1e-14);
}

TEST_CASE("decompose validates its input") {
  Eigen::MatrixXd skew(2, 2);
  skew << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(decompose(skew, 0.5), NotSymmetric);

  Eigen::MatrixXd indef = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  CHECK_THROWS_AS(decompose(indef, 0.5), NotPositiveDefinite);

  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(decompose(singular, 0.5), NotPositiveDefinite);

  Eigen::MatrixXd good = harmonic_chain(2);
  CHECK_THROWS_AS(decompose(good, 0.0), ConfigError);
  CHECK_THROWS_AS(decompose(good, -1.0), ConfigError);
  CHECK_THROWS_AS(decompose(Eigen::MatrixXd::Zero(2, 3), 0.5), ConfigError);
  CHECK_THROWS_AS(decompose(Eigen::MatrixXd(0, 0), 0.5), ConfigError);
}

TEST_CASE("random_spd is deterministic in the seed") {
  Eigen::MatrixXd a = random_spd(4, 11);
  Eigen::MatrixXd b = random_spd(4, 11);
  Eigen::MatrixXd c = random_spd(4, 12);
  CHECK(a == b);
  CHECK(a != c);
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  CHECK(es.eigenvalues().minCoeff() > 0.5 - 1e-9);
  CHECK(es.eigenvalues().maxCoeff() < 4.0 + 1e-9);
}

TEST_CASE("random_spd respects a custom eigenvalue range") {
  Eigen::MatrixXd a = random_spd(3, 5, {2.0, 2.5});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  CHECK(es.eigenvalues().minCoeff() > 2.0 - 1e-9);
  CHECK(es.eigenvalues().maxCoeff() < 2.5 + 1e-9);
}

TEST_CASE("reference random instance is fully coupled") {
  SystemSpec s = decompose(random_spd(3, 7), 0.5);
  CHECK(s.beta.cwiseAbs().minCoeff() > 1e-6);
  CHECK(spectrum_simple(s));
}

TEST_CASE("mixing dimension counts coupled mode planes") {
  CHECK(mixing_dimension(decompose(
            Eigen::MatrixXd(Eigen::Vector2d(1.0, 2.0).asDiagonal()), 0.5)) ==
        2);
  CHECK(mixing_dimension(decompose(harmonic_chain(2), 0.5)) == 4);
  CHECK(mixing_dimension(decompose(harmonic_chain(3), 0.5)) == 6);
  CHECK(mixing_dimension(decompose(random_spd(3, 7), 0.5)) == 6);
}

TEST_CASE("spectrum_simple flags near-degenerate eigenvalues") {
  CHECK(spectrum_simple(decompose(harmonic_chain(3), 0.5)));
  Eigen::MatrixXd near = Eigen::Vector2d(1.0, 1.0 + 1e-12).asDiagonal();
  CHECK_FALSE(spectrum_simple(decompose(near, 0.5)));
}

TEST_CASE("chain of two has the classic frequency relation") {
  AdmissibilityReport rep = check_admissible(decompose(harmonic_chain(2), 0.5));
  CHECK(rep.independence == Independence::dependent);
  REQUIRE(rep.relation.size() == 2);
  CHECK(rep.relation[0] == 3);
  CHECK(rep.relation[1] == -1);
  CHECK(rep.in_v_plus);
}

TEST_CASE("chain of three is dependent via the symmetric relation") {
  AdmissibilityReport rep = check_admissible(decompose(harmonic_chain(3), 0.5));
  CHECK(rep.independence == Independence::dependent);
  REQUIRE(rep.relation.size() == 3);
  CHECK(rep.relation[0] == 1);
  CHECK(rep.relation[1] == -2);
  CHECK(rep.relation[2] == 1);
}

TEST_CASE("generic random instance shows no relation up to the bound") {
  AdmissibilityReport rep = check_admissible(decompose(random_spd(3, 7), 0.5));
  CHECK(rep.independence == Independence::independent_up_to_bound);
  CHECK(rep.relation.empty());
  CHECK(rep.in_v_plus);
}

TEST_CASE("oversized search space is reported inconclusive") {
  SystemSpec s = decompose(random_spd(6, 9), 0.5);
  AdmissibilityReport rep = check_admissible(s, 1e-9, 30);
  CHECK(rep.independence == Independence::inconclusive);
}

TEST_CASE("independence labels have stable names") {
  CHECK(std::string(to_string(Independence::independent_up_to_bound)) ==
        "independent_up_to_bound");
  CHECK(std::string(to_string(Independence::dependent)) == "dependent");
  CHECK(std::string(to_string(Independence::inconclusive)) == "inconclusive");
}
