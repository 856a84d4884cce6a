#pragma once

#include <stdexcept>
#include <string>

namespace flipflow {

// Base for everything thrown by the library. CLI maps ConfigError to exit
// code 2 and any other Error to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class NotSymmetric : public Error {
 public:
  explicit NotSymmetric(double max_asym)
      : Error("matrix is not symmetric (max |V - V^T| = " +
              std::to_string(max_asym) + ")"),
        max_asym(max_asym) {}
  double max_asym;
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(double min_eig)
      : Error("matrix is not positive definite (smallest eigenvalue = " +
              std::to_string(min_eig) + ")"),
        min_eig(min_eig) {}
  double min_eig;
};

class NotInVPlus : public Error {
 public:
  explicit NotInVPlus(int mode_index)
      : Error("mode " + std::to_string(mode_index + 1) +
              " is decoupled from the marked coordinate (beta_k = 0)"),
        mode_index(mode_index) {}
  int mode_index;
};

class MomentumOutsideCube : public Error {
 public:
  MomentumOutsideCube(int mode_index, double margin)
      : Error("momentum component " + std::to_string(mode_index + 1) +
              " violates |p_k| <= r_k by " + std::to_string(margin)),
        mode_index(mode_index),
        margin(margin) {}
  int mode_index;
  double margin;
};

class NegativeRadicand : public Error {
 public:
  NegativeRadicand(int mode_index, double value)
      : Error("flip image squared radius " + std::to_string(mode_index + 1) +
              " is negative: " + std::to_string(value)),
        mode_index(mode_index),
        value(value) {}
  int mode_index;
  double value;
};

class HorizonTooShort : public Error {
 public:
  HorizonTooShort(double best_distance, double horizon)
      : Error("no flip time within horizon " + std::to_string(horizon) +
              " meets the requested tolerance (best distance " +
              std::to_string(best_distance) + ")"),
        best_distance(best_distance),
        horizon(horizon) {}
  double best_distance;
  double horizon;
};

class StalledProgress : public Error {
 public:
  StalledProgress(int flip_index, double realized, double predicted)
      : Error("flip " + std::to_string(flip_index) +
              " stalled: realized contraction " + std::to_string(realized) +
              " vs predicted " + std::to_string(predicted)),
        flip_index(flip_index),
        realized(realized),
        predicted(predicted) {}
  int flip_index;
  double realized;
  double predicted;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(int budget, double best_error)
      : Error("flip budget " + std::to_string(budget) +
              " exhausted (best error " + std::to_string(best_error) + ")"),
        budget(budget),
        best_error(best_error) {}
  int budget;
  double best_error;
};

class DifferentEnergy : public Error {
 public:
  DifferentEnergy(double h_from, double h_to)
      : Error("states lie on different energy surfaces: " +
              std::to_string(h_from) + " vs " + std::to_string(h_to)),
        h_from(h_from),
        h_to(h_to) {}
  double h_from;
  double h_to;
};

class EmptySample : public Error {
 public:
  EmptySample() : Error("sample size must be positive") {}
};

class NonFiniteState : public Error {
 public:
  NonFiniteState() : Error("state contains NaN or Inf") {}
};

}  // namespace flipflow
