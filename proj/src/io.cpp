#include "flipflow/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "flipflow/errors.hpp"

namespace flipflow {

using nlohmann::json;

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

Eigen::MatrixXd read_matrix(const std::string& path) {
  if (ends_with(path, ".csv")) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        try {
          row.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw ConfigError("bad number '" + cell + "' in " + path);
        }
      }
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("empty matrix file " + path);
    std::size_t n = rows.size();
    Eigen::MatrixXd m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) {
        throw ConfigError("matrix in " + path + " is not square");
      }
      for (std::size_t j = 0; j < n; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            rows[i][j];
      }
    }
    return m;
  }

  json j = load_json(path);
  if (!j.contains("n") || !j.contains("v")) {
    throw ConfigError("matrix file " + path + " needs keys 'n' and 'v'");
  }
  int n = j.at("n").get<int>();
  auto v = j.at("v").get<std::vector<double>>();
  if (n < 1 || v.size() != static_cast<std::size_t>(n) * n) {
    throw ConfigError("matrix file " + path + ": 'v' must hold n*n entries");
  }
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      m(i, k) = v[static_cast<std::size_t>(i) * n + k];
    }
  }
  return m;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  if (ends_with(path, ".csv")) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) out << ',';
        out << format_double(m(i, j));
      }
      out << '\n';
    }
    return;
  }
  json j;
  j["n"] = m.rows();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) v.push_back(m(i, k));
  }
  j["v"] = v;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

State read_state(const std::string& path) {
  json j = load_json(path);
  if (!j.contains("q") || !j.contains("p")) {
    throw ConfigError("state file " + path + " needs keys 'q' and 'p'");
  }
  auto q = j.at("q").get<std::vector<double>>();
  auto p = j.at("p").get<std::vector<double>>();
  if (q.empty() || q.size() != p.size()) {
    throw ConfigError("state file " + path + ": q and p must match in size");
  }
  State s;
  s.q = Eigen::Map<Eigen::VectorXd>(q.data(),
                                    static_cast<Eigen::Index>(q.size()));
  s.p = Eigen::Map<Eigen::VectorXd>(p.data(),
                                    static_cast<Eigen::Index>(p.size()));
  check_finite(s);
  return s;
}

void write_state(const std::string& path, const State& psi) {
  json j;
  j["q"] = std::vector<double>(psi.q.data(), psi.q.data() + psi.q.size());
  j["p"] = std::vector<double>(psi.p.data(), psi.p.data() + psi.p.size());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace flipflow
