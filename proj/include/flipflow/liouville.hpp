#pragma once

#include <string>
#include <vector>

#include "flipflow/pdmp.hpp"

namespace flipflow {

// One draw from the microcanonical (surface) measure on the energy-h
// ellipsoid: a uniform point on the sphere of radius sqrt(2h) read back
// through the modal coordinates.
State sample_liouville(const SystemSpec& spec, Rng& rng);

struct Expectation {
  double value = 0.0;
  double std_error = 0.0;  // zero for closed forms
  bool exact = false;
};

// Closed form for the quadratic observables; Monte Carlo with standard
// error otherwise (n draws, streams derived from rng).
Expectation reference_expectation(const SystemSpec& spec, const Observable& f,
                                  long long n = 100000,
                                  const Rng& rng = Rng(0));

// Kolmogorov-Smirnov sup-distance between the empirical laws of two samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Max over phase-space coordinates of the KS distance between n pushed-
// forward draws (one flip event after a flow of t_probe) and n fresh draws.
double invariance_check(const SystemSpec& spec, long long n, double t_probe,
                        const Rng& rng);

struct ErgodicOptions {
  double avg_threshold = 0.02;
  double ks_threshold = 0.05;
  int chain_length = 100000;
  int burn_in = 1000;
  int thin = 10;
  long long liouville_n = 100000;
  long long reference_n = 200000;  // Monte Carlo fallback draws
  double substep = 0.0;
};

struct ErgodicityRow {
  std::string observable;
  double estimate = 0.0;   // mean over seeds of the time averages
  double reference = 0.0;  // invariant-measure expectation
  double ref_std_error = 0.0;
  bool ref_exact = false;
  double abs_error = 0.0;
  bool pass = false;
};

struct ErgodicReport {
  double t_end = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<SeedResult> per_seed;
  std::vector<ErgodicityRow> rows;
  std::vector<double> chain_ks;  // per coordinate: q1..qN then p1..pN
  double max_chain_ks = 0.0;
  bool chain_pass = false;
  bool pass = false;
};

// Time averages over independent trajectories against closed-form (or MC)
// references, plus a distributional check of the embedded chain against
// fresh invariant-measure draws.
ErgodicReport ergodicity_report(const SystemSpec& spec, const State& psi0,
                                double t_end, const WaitingLaw& law,
                                const std::vector<std::uint64_t>& seeds,
                                const std::vector<Observable>& fs,
                                const ErgodicOptions& opt = {});

}  // namespace flipflow
