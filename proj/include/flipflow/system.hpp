#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "flipflow/errors.hpp"

namespace flipflow {

// Interaction matrix plus its modal decomposition and the energy level of the
// invariant surface. Frequencies are stored ascending; eigenvector columns
// are orthonormal with the first nonzero component positive, which makes the
// decomposition unique for a simple spectrum. beta(k) is the first component
// of mode k, the coupling of that mode to the marked coordinate; the betas
// satisfy sum beta_k^2 = 1.
struct SystemSpec {
  int n = 0;
  double h = 0.5;
  Eigen::MatrixXd v;         // n x n, symmetric positive definite
  Eigen::VectorXd omega_sq;  // ascending eigenvalues of v
  Eigen::VectorXd omega;     // element-wise square roots
  Eigen::MatrixXd modes;     // columns are eigenvectors of v
  Eigen::VectorXd beta;      // modes.row(0)
};

// Throws NotSymmetric / NotPositiveDefinite. h must be positive.
SystemSpec decompose(const Eigen::MatrixXd& v, double h);

// Nearest-neighbor chain with fixed ends: 2 on the diagonal, -1 off it.
Eigen::MatrixXd harmonic_chain(int n);

// Q Lambda Q^T with Q the sign-fixed QR factor of a matrix of standard
// normals and Lambda uniform in [eig_range.first, eig_range.second].
// Deterministic in seed.
Eigen::MatrixXd random_spd(int n, std::uint64_t seed,
                           std::pair<double, double> eig_range = {0.5, 4.0});

// Numerical rank of the Krylov family {A^j g1 : j = 0..2n-1} where
// g1 = (0, e1) and A is the phase-space generator. Equals twice the number
// of modes coupled to the marked coordinate when the spectrum is simple.
int mixing_dimension(const SystemSpec& spec, double tol = 1e-9);

// True when all eigenvalue gaps exceed tol (relative to max(1, omega_sq)).
bool spectrum_simple(const SystemSpec& spec, double tol = 1e-9);

enum class Independence { independent_up_to_bound, dependent, inconclusive };

struct AdmissibilityReport {
  bool spectrum_is_simple = false;
  double min_abs_beta = 0.0;
  bool in_v_plus = false;
  int mixing_dim = 0;
  Independence independence = Independence::inconclusive;
  std::vector<long long> relation;  // nonempty iff dependent
  double tol = 0.0;
  int coeff_bound = 0;
};

// Exhaustive integer-relation search over |n_k| <= coeff_bound; a relation
// means |sum n_k omega_k^2| < tol * sum |n_k| omega_k^2. The verdict is
// heuristic: independence is only established up to the coefficient bound.
AdmissibilityReport check_admissible(const SystemSpec& spec, double tol = 1e-9,
                                     int coeff_bound = 20);

const char* to_string(Independence ind);

}  // namespace flipflow
