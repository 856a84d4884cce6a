#pragma once

#include <Eigen/Dense>
#include <string>

#include "flipflow/dynamics.hpp"

namespace flipflow {

// Shortest round-trip decimal form; used for every number we write so that
// repeated runs are byte-identical.
std::string format_double(double x);

// Matrix files: JSON {"n": N, "v": [row-major reals]} or CSV with one row
// per line. The extension picks the format (.json / .csv).
Eigen::MatrixXd read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);

// State files: JSON {"q": [...], "p": [...]}.
State read_state(const std::string& path);
void write_state(const std::string& path, const State& psi);

}  // namespace flipflow
