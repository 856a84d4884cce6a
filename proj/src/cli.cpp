#include "flipflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "flipflow/io.hpp"
#include "flipflow/parallel.hpp"
#include "flipflow/torus.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flipflow {
namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return j;
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (item.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

double num_at(const json& j, const std::string& where, const char* key,
              double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number())
    throw ConfigError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

long long int_at(const json& j, const std::string& where, const char* key,
                 long long dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer())
    throw ConfigError(where + ": '" + key + "' must be an integer");
  return j.at(key).get<long long>();
}

bool bool_at(const json& j, const std::string& where, const char* key,
             bool dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_boolean())
    throw ConfigError(where + ": '" + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::string str_at(const json& j, const std::string& where, const char* key,
                   const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_string())
    throw ConfigError(where + ": '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

MatrixSource parse_matrix(const json& j) {
  if (!j.is_object()) throw ConfigError("'matrix' must be an object");
  check_keys(j, "matrix", {"kind", "path", "n", "seed", "eig_range"});
  MatrixSource src;
  const std::string kind = str_at(j, "matrix", "kind", "random_spd");
  if (kind == "file") {
    src.kind = MatrixSource::Kind::file;
    src.path = str_at(j, "matrix", "path", "");
    if (src.path.empty())
      throw ConfigError("matrix kind 'file' needs a 'path'");
  } else if (kind == "harmonic_chain") {
    src.kind = MatrixSource::Kind::harmonic_chain;
  } else if (kind == "random_spd") {
    src.kind = MatrixSource::Kind::random_spd;
  } else {
    throw ConfigError("unknown matrix kind '" + kind +
                      "' (file, harmonic_chain, random_spd)");
  }
  src.n = static_cast<int>(int_at(j, "matrix", "n", src.n));
  if (src.kind != MatrixSource::Kind::file && src.n < 1)
    throw ConfigError("matrix: 'n' must be >= 1");
  long long seed = int_at(j, "matrix", "seed", static_cast<long long>(src.seed));
  if (seed < 0) throw ConfigError("matrix: 'seed' must be >= 0");
  src.seed = static_cast<std::uint64_t>(seed);
  if (j.contains("eig_range")) {
    const json& r = j.at("eig_range");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() ||
        !r[1].is_number())
      throw ConfigError("matrix: 'eig_range' must be [lo, hi]");
    src.eig_range = {r[0].get<double>(), r[1].get<double>()};
    if (!(src.eig_range.first > 0.0) ||
        !(src.eig_range.second >= src.eig_range.first))
      throw ConfigError("matrix: 'eig_range' needs 0 < lo <= hi");
  }
  return src;
}

WaitingLaw parse_law(const json& j) {
  if (!j.is_object()) throw ConfigError("'law' must be an object");
  check_keys(j, "law", {"kind", "rate", "shape", "scale", "gaps"});
  const std::string kind = str_at(j, "law", "kind", "exponential");
  if (kind == "exponential")
    return WaitingLaw::exponential(num_at(j, "law", "rate", 1.0));
  if (kind == "gamma")
    return WaitingLaw::gamma_law(num_at(j, "law", "shape", 1.0),
                                 num_at(j, "law", "scale", 1.0));
  if (kind == "fixed_schedule") {
    if (!j.contains("gaps") || !j.at("gaps").is_array())
      throw ConfigError("law kind 'fixed_schedule' needs a 'gaps' array");
    std::vector<double> gaps;
    for (const json& g : j.at("gaps")) {
      if (!g.is_number())
        throw ConfigError("law: 'gaps' entries must be numbers");
      gaps.push_back(g.get<double>());
    }
    return WaitingLaw::fixed_schedule(std::move(gaps));
  }
  throw ConfigError("unknown law kind '" + kind +
                    "' (exponential, gamma, fixed_schedule)");
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json state_json(const State& psi) {
  return json{{"q", vec_json(psi.q)}, {"p", vec_json(psi.p)}};
}

std::ofstream open_text(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

void write_json_file(const std::filesystem::path& p, const json& j) {
  auto f = open_text(p);
  f << j.dump(2) << '\n';
}

std::filesystem::path out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.out);
  return dir;
}

// States supplied by the user must sit on the configured energy surface;
// everything downstream assumes it.
void check_on_surface(const SystemSpec& spec, const State& psi,
                      const std::string& label) {
  const double e = energy(spec, psi);
  if (std::abs(e - spec.h) > 1e-6 * std::max(1.0, spec.h)) {
    std::ostringstream msg;
    msg << label << " has energy " << e << " but the configured surface is h="
        << spec.h;
    throw ConfigError(msg.str());
  }
}

State initial_state(const RunConfig& cfg, const SystemSpec& spec) {
  if (!cfg.state_path.empty()) {
    State psi = read_state(cfg.state_path);
    if (psi.q.size() != spec.n)
      throw ConfigError(cfg.state_path + ": state dimension " +
                        std::to_string(psi.q.size()) + " does not match n=" +
                        std::to_string(spec.n));
    check_on_surface(spec, psi, cfg.state_path);
    return psi;
  }
  return g_star(spec);
}

int default_target_budget(const SystemSpec& spec) {
  double worst = 0.0;
  for (int k = 0; k < spec.n; ++k)
    worst = std::max(worst, 1.0 / (spec.beta(k) * spec.beta(k)));
  return 2 * (static_cast<int>(std::ceil(worst)) + 3);
}

void apply_threads(int threads) {
  if (threads < 0) throw ConfigError("'threads' must be >= 0");
  if (threads == 1) {
    set_default_exec(Exec::serial);
    return;
  }
#ifdef _OPENMP
  if (threads > 1) omp_set_num_threads(threads);
#endif
}

}  // namespace

RunConfig load_config(const std::string& path) {
  const json j = load_json_file(path);
  if (!j.is_object()) throw ConfigError(path + ": top level must be an object");
  check_keys(j, path,
             {"matrix", "energy", "law", "t_end", "seeds", "observables",
              "state", "target", "steering", "trajectory_dt", "events",
              "report", "admissibility", "out", "threads"});
  RunConfig cfg;
  if (j.contains("matrix")) cfg.matrix = parse_matrix(j.at("matrix"));
  cfg.energy = num_at(j, path, "energy", cfg.energy);
  if (!(cfg.energy > 0.0)) throw ConfigError("'energy' must be positive");
  if (j.contains("law")) cfg.law = parse_law(j.at("law"));
  cfg.t_end = num_at(j, path, "t_end", cfg.t_end);
  if (cfg.t_end < 0.0) throw ConfigError("'t_end' must be >= 0");
  if (j.contains("seeds")) {
    if (!j.at("seeds").is_array() || j.at("seeds").empty())
      throw ConfigError("'seeds' must be a nonempty array of integers");
    cfg.seeds.clear();
    for (const json& s : j.at("seeds")) {
      if (!s.is_number_integer() || s.get<long long>() < 0)
        throw ConfigError("'seeds' entries must be integers >= 0");
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (j.contains("observables")) {
    if (!j.at("observables").is_array())
      throw ConfigError("'observables' must be an array of names");
    cfg.observables.clear();
    for (const json& s : j.at("observables")) {
      if (!s.is_string())
        throw ConfigError("'observables' entries must be strings");
      cfg.observables.push_back(s.get<std::string>());
    }
  }
  cfg.state_path = str_at(j, path, "state", "");
  cfg.target_path = str_at(j, path, "target", "");
  if (j.contains("steering")) {
    const json& s = j.at("steering");
    if (!s.is_object()) throw ConfigError("'steering' must be an object");
    check_keys(s, "steering",
               {"eps", "horizon", "grid", "budget", "eps_delta",
                "stall_fraction", "accept_fraction", "max_retries"});
    cfg.steering.eps = num_at(s, "steering", "eps", cfg.steering.eps);
    if (!(cfg.steering.eps > 0.0))
      throw ConfigError("steering: 'eps' must be positive");
    cfg.steering.horizon = num_at(s, "steering", "horizon",
                                  cfg.steering.horizon);
    cfg.steering.grid = int_at(s, "steering", "grid", cfg.steering.grid);
    if (cfg.steering.grid < 2)
      throw ConfigError("steering: 'grid' must be >= 2");
    cfg.steering.budget = static_cast<int>(
        int_at(s, "steering", "budget", cfg.steering.budget));
    cfg.steering.eps_delta = num_at(s, "steering", "eps_delta",
                                    cfg.steering.eps_delta);
    cfg.steering.stall_fraction = num_at(s, "steering", "stall_fraction",
                                         cfg.steering.stall_fraction);
    cfg.steering.accept_fraction = num_at(s, "steering", "accept_fraction",
                                          cfg.steering.accept_fraction);
    cfg.steering.max_retries = static_cast<int>(
        int_at(s, "steering", "max_retries", cfg.steering.max_retries));
  }
  cfg.trajectory_dt = num_at(j, path, "trajectory_dt", cfg.trajectory_dt);
  if (cfg.trajectory_dt < 0.0)
    throw ConfigError("'trajectory_dt' must be >= 0");
  cfg.events = bool_at(j, path, "events", cfg.events);
  if (j.contains("report")) {
    const json& r = j.at("report");
    if (!r.is_object()) throw ConfigError("'report' must be an object");
    check_keys(r, "report",
               {"avg_threshold", "ks_threshold", "chain_length", "burn_in",
                "thin", "liouville_n", "reference_n", "substep"});
    cfg.report.avg_threshold =
        num_at(r, "report", "avg_threshold", cfg.report.avg_threshold);
    cfg.report.ks_threshold =
        num_at(r, "report", "ks_threshold", cfg.report.ks_threshold);
    cfg.report.chain_length = static_cast<int>(
        int_at(r, "report", "chain_length", cfg.report.chain_length));
    cfg.report.burn_in =
        static_cast<int>(int_at(r, "report", "burn_in", cfg.report.burn_in));
    cfg.report.thin =
        static_cast<int>(int_at(r, "report", "thin", cfg.report.thin));
    cfg.report.liouville_n =
        int_at(r, "report", "liouville_n", cfg.report.liouville_n);
    cfg.report.reference_n =
        int_at(r, "report", "reference_n", cfg.report.reference_n);
    cfg.report.substep = num_at(r, "report", "substep", cfg.report.substep);
    if (cfg.report.chain_length < 1 || cfg.report.burn_in < 0 ||
        cfg.report.thin < 1 || cfg.report.liouville_n < 1)
      throw ConfigError("report: chain_length/thin/liouville_n must be >= 1 "
                        "and burn_in >= 0");
  }
  if (j.contains("admissibility")) {
    const json& a = j.at("admissibility");
    if (!a.is_object()) throw ConfigError("'admissibility' must be an object");
    check_keys(a, "admissibility", {"tol", "coeff_bound"});
    cfg.admissibility_tol =
        num_at(a, "admissibility", "tol", cfg.admissibility_tol);
    cfg.coeff_bound = static_cast<int>(
        int_at(a, "admissibility", "coeff_bound", cfg.coeff_bound));
    if (!(cfg.admissibility_tol > 0.0) || cfg.coeff_bound < 1)
      throw ConfigError("admissibility: need tol > 0 and coeff_bound >= 1");
  }
  cfg.out = str_at(j, path, "out", cfg.out);
  cfg.threads = static_cast<int>(int_at(j, path, "threads", cfg.threads));
  if (cfg.threads < 0) throw ConfigError("'threads' must be >= 0");
  return cfg;
}

void apply_seed_override(RunConfig& cfg, std::optional<std::uint64_t> seed) {
  if (seed) cfg.seeds = {*seed};
}

void apply_out_override(RunConfig& cfg, const std::string& out) {
  if (!out.empty()) cfg.out = out;
}

SystemSpec build_spec(const RunConfig& cfg) {
  Eigen::MatrixXd v;
  switch (cfg.matrix.kind) {
    case MatrixSource::Kind::file:
      v = read_matrix(cfg.matrix.path);
      break;
    case MatrixSource::Kind::harmonic_chain:
      v = harmonic_chain(cfg.matrix.n);
      break;
    case MatrixSource::Kind::random_spd:
      v = random_spd(cfg.matrix.n, cfg.matrix.seed, cfg.matrix.eig_range);
      break;
  }
  return decompose(v, cfg.energy);
}

std::vector<Observable> parse_observables(const std::vector<std::string>& names,
                                          int n) {
  static const std::regex re_r("^r([0-9]+)_sq$");
  static const std::regex re_p("^p([0-9]+)_sq$");
  static const std::regex re_q("^q([0-9]+)_sq$");
  static const std::regex re_pp("^p([0-9]+)p([0-9]+)$");
  static const std::regex re_qq("^q([0-9]+)q([0-9]+)$");
  auto idx = [n](const std::string& name, const std::string& digits) {
    const long v = std::stol(digits);
    if (v < 1 || v > n)
      throw ConfigError("observable '" + name + "': index " + digits +
                        " out of range 1.." + std::to_string(n));
    return static_cast<int>(v - 1);
  };
  std::vector<Observable> out;
  out.reserve(names.size());
  std::smatch m;
  for (const std::string& name : names) {
    if (name == "H")
      out.push_back(Observable::hamiltonian());
    else if (std::regex_match(name, m, re_r))
      out.push_back(Observable::action_sq(idx(name, m[1])));
    else if (std::regex_match(name, m, re_p))
      out.push_back(Observable::momentum_sq(idx(name, m[1])));
    else if (std::regex_match(name, m, re_q))
      out.push_back(Observable::position_sq(idx(name, m[1])));
    else if (std::regex_match(name, m, re_pp))
      out.push_back(Observable::momentum_prod(idx(name, m[1]), idx(name, m[2])));
    else if (std::regex_match(name, m, re_qq))
      out.push_back(Observable::position_prod(idx(name, m[1]), idx(name, m[2])));
    else
      throw ConfigError(
          "unknown observable '" + name +
          "'; valid names: H, r<k>_sq, p<i>_sq, q<i>_sq, p<i>p<j>, q<i>q<j> "
          "with 1-based indices");
  }
  return out;
}

int cmd_spectrum(const RunConfig& cfg, bool quiet) {
  apply_threads(cfg.threads);
  const SystemSpec spec = build_spec(cfg);
  const AdmissibilityReport rep =
      check_admissible(spec, cfg.admissibility_tol, cfg.coeff_bound);
  const int mix = mixing_dimension(spec);

  json j;
  j["n"] = spec.n;
  j["energy"] = spec.h;
  j["omega_sq"] = vec_json(spec.omega_sq);
  j["omega"] = vec_json(spec.omega);
  j["beta"] = vec_json(spec.beta);
  j["min_abs_beta"] = rep.min_abs_beta;
  j["in_v_plus"] = rep.in_v_plus;
  j["spectrum_simple"] = rep.spectrum_is_simple;
  j["mixing_dimension"] = mix;
  j["independence"] = to_string(rep.independence);
  j["relation"] = rep.relation;
  j["tol"] = rep.tol;
  j["coeff_bound"] = rep.coeff_bound;
  const auto dir = out_dir(cfg);
  write_json_file(dir / "spectrum.json", j);

  if (!quiet) {
    std::cout << "n=" << spec.n << " h=" << format_double(spec.h) << '\n';
    std::cout << "omega_sq:";
    for (int k = 0; k < spec.n; ++k)
      std::cout << ' ' << format_double(spec.omega_sq(k));
    std::cout << '\n' << "beta:";
    for (int k = 0; k < spec.n; ++k)
      std::cout << ' ' << format_double(spec.beta(k));
    std::cout << '\n';
    std::cout << "in_v_plus=" << (rep.in_v_plus ? "true" : "false")
              << " spectrum_simple="
              << (rep.spectrum_is_simple ? "true" : "false")
              << " mixing_dimension=" << mix << '\n';
    std::cout << "frequency independence: " << to_string(rep.independence);
    if (!rep.relation.empty()) {
      std::cout << " relation:";
      for (long long c : rep.relation) std::cout << ' ' << c;
    }
    std::cout << '\n';
    std::cout << "wrote " << (dir / "spectrum.json").string() << '\n';
  }
  return 0;
}

int cmd_simulate(const RunConfig& cfg, bool quiet) {
  apply_threads(cfg.threads);
  const SystemSpec spec = build_spec(cfg);
  const std::vector<Observable> fs = parse_observables(cfg.observables, spec.n);
  const State psi0 = initial_state(cfg, spec);
  const auto dir = out_dir(cfg);

  const auto results = multi_trajectory(spec, psi0, cfg.t_end, cfg.law,
                                        cfg.seeds, fs, cfg.report.substep);

  std::vector<Expectation> refs;
  refs.reserve(fs.size());
  for (const Observable& f : fs)
    refs.push_back(reference_expectation(
        spec, f, cfg.report.reference_n,
        Rng(cfg.seeds.front()).child(stream::reference)));

  {
    auto csv = open_text(dir / "results.csv");
    csv << "seed,T,observable,estimate,reference,abs_error\n";
    for (const SeedResult& r : results) {
      for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        const double est = r.averages[fi].mean;
        const double ref = refs[fi].value;
        csv << r.seed << ',' << format_double(cfg.t_end) << ','
            << fs[fi].name() << ',' << format_double(est) << ','
            << format_double(ref) << ',' << format_double(std::abs(est - ref))
            << '\n';
      }
    }
  }

  // Optional per-seed dumps replay the same event stream the averages used.
  if (cfg.events || cfg.trajectory_dt > 0.0) {
    for (std::uint64_t seed : cfg.seeds) {
      Rng rng = Rng(seed).child(stream::pdmp);
      WaitingLaw law = cfg.law;
      EventLog log;
      std::vector<SegmentObserver> observers;
      std::ofstream traj;
      double cursor = 0.0;
      long long next_k = 0;
      if (cfg.trajectory_dt > 0.0) {
        traj = open_text(dir /
                         ("trajectory_" + std::to_string(seed) + ".csv"));
        traj << "t";
        for (int i = 1; i <= spec.n; ++i) traj << ",q" << i;
        for (int i = 1; i <= spec.n; ++i) traj << ",p" << i;
        traj << '\n';
        const double dt = cfg.trajectory_dt;
        observers.push_back([&, dt](const State& s, double tau) {
          while (true) {
            const double ts = static_cast<double>(next_k) * dt;
            if (ts >= cursor + tau) break;
            const State at = propagate(spec, s, std::max(0.0, ts - cursor));
            traj << format_double(ts);
            for (int i = 0; i < spec.n; ++i)
              traj << ',' << format_double(at.q(i));
            for (int i = 0; i < spec.n; ++i)
              traj << ',' << format_double(at.p(i));
            traj << '\n';
            ++next_k;
          }
          cursor += tau;
        });
      }
      const State last = simulate_pdmp(spec, psi0, cfg.t_end, law, rng,
                                       cfg.events ? &log : nullptr, observers);
      if (cfg.trajectory_dt > 0.0) {
        const double ts = static_cast<double>(next_k) * cfg.trajectory_dt;
        if (std::abs(ts - cfg.t_end) <= 1e-9 * std::max(1.0, cfg.t_end)) {
          traj << format_double(cfg.t_end);
          for (int i = 0; i < spec.n; ++i)
            traj << ',' << format_double(last.q(i));
          for (int i = 0; i < spec.n; ++i)
            traj << ',' << format_double(last.p(i));
          traj << '\n';
        }
      }
      if (cfg.events) {
        auto ev = open_text(dir / ("events_" + std::to_string(seed) + ".csv"));
        ev << "t_m,tau_m\n";
        for (const Event& e : log.events)
          ev << format_double(e.t) << ',' << format_double(e.tau) << '\n';
      }
    }
  }

  if (!quiet) {
    std::cout << "n=" << spec.n << " h=" << format_double(spec.h)
              << " t_end=" << format_double(cfg.t_end)
              << " seeds=" << cfg.seeds.size() << '\n';
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
      double mean = 0.0;
      for (const SeedResult& r : results) mean += r.averages[fi].mean;
      mean /= static_cast<double>(results.size());
      std::cout << fs[fi].name() << ": mean=" << format_double(mean)
                << " ref=" << format_double(refs[fi].value)
                << " abs_err=" << format_double(std::abs(mean - refs[fi].value))
                << '\n';
    }
    std::cout << "wrote " << (dir / "results.csv").string() << '\n';
  }
  return 0;
}

int cmd_steer(const RunConfig& cfg, bool quiet) {
  apply_threads(cfg.threads);
  const SystemSpec spec = build_spec(cfg);
  const auto dir = out_dir(cfg);

  State from;
  if (!cfg.state_path.empty()) {
    from = initial_state(cfg, spec);
  } else {
    Rng rng = Rng(cfg.seeds.front()).child(stream::liouville);
    from = sample_liouville(spec, rng);
  }

  SteerResult res;
  State target;
  if (cfg.target_path.empty()) {
    target = g_star(spec);
    res = steer_to_gstar(spec, from, cfg.steering);
  } else {
    target = read_state(cfg.target_path);
    if (target.q.size() != spec.n)
      throw ConfigError(cfg.target_path + ": state dimension does not match");
    check_on_surface(spec, target, cfg.target_path);
    const int budget = cfg.steering.budget > 0 ? cfg.steering.budget
                                               : default_target_budget(spec);
    res = steer_to_target(spec, from, target, cfg.steering.eps, budget,
                          cfg.steering);
  }

  json j;
  j["taus"] = res.taus;
  j["terminal_flow"] = res.terminal_flow;
  j["flips_used"] = res.flips_used;
  j["final_error"] = res.final_error;
  j["per_step_delta"] = res.per_step_delta;
  j["initial_state"] = state_json(from);
  j["final_state"] = state_json(res.final_state);
  j["target"] = state_json(target);
  write_json_file(dir / "steer.json", j);

  if (!quiet) {
    std::cout << "flips_used=" << res.flips_used
              << " final_error=" << format_double(res.final_error) << '\n';
    if (!res.per_step_delta.empty())
      std::cout << "spread after last flip: "
                << format_double(res.per_step_delta.back()) << '\n';
    std::cout << "wrote " << (dir / "steer.json").string() << '\n';
  }
  return 0;
}

int cmd_report(const RunConfig& cfg, bool quiet) {
  apply_threads(cfg.threads);
  const SystemSpec spec = build_spec(cfg);
  const std::vector<Observable> fs = parse_observables(cfg.observables, spec.n);
  const State psi0 = initial_state(cfg, spec);
  const auto dir = out_dir(cfg);

  const ErgodicReport rep = ergodicity_report(spec, psi0, cfg.t_end, cfg.law,
                                              cfg.seeds, fs, cfg.report);

  json j;
  j["t_end"] = rep.t_end;
  j["seeds"] = rep.seeds;
  j["avg_threshold"] = cfg.report.avg_threshold;
  j["ks_threshold"] = cfg.report.ks_threshold;
  json rows = json::array();
  for (const ErgodicityRow& r : rep.rows) {
    rows.push_back(json{{"observable", r.observable},
                        {"estimate", r.estimate},
                        {"reference", r.reference},
                        {"ref_std_error", r.ref_std_error},
                        {"ref_exact", r.ref_exact},
                        {"abs_error", r.abs_error},
                        {"pass", r.pass}});
  }
  j["rows"] = rows;
  j["chain_ks"] = rep.chain_ks;
  j["max_chain_ks"] = rep.max_chain_ks;
  j["chain_pass"] = rep.chain_pass;
  j["pass"] = rep.pass;
  write_json_file(dir / "report.json", j);

  {
    auto csv = open_text(dir / "results.csv");
    csv << "seed,T,observable,estimate,reference,abs_error\n";
    for (const SeedResult& sr : rep.per_seed) {
      for (std::size_t fi = 0; fi < fs.size(); ++fi) {
        const double est = sr.averages[fi].mean;
        const double ref = rep.rows[fi].reference;
        csv << sr.seed << ',' << format_double(rep.t_end) << ','
            << fs[fi].name() << ',' << format_double(est) << ','
            << format_double(ref) << ',' << format_double(std::abs(est - ref))
            << '\n';
      }
    }
  }

  if (!quiet) {
    for (const ErgodicityRow& r : rep.rows) {
      std::cout << r.observable << ": est=" << format_double(r.estimate)
                << " ref=" << format_double(r.reference)
                << " abs_err=" << format_double(r.abs_error) << ' '
                << (r.pass ? "pass" : "FAIL") << '\n';
    }
    std::cout << "chain KS max=" << format_double(rep.max_chain_ks) << ' '
              << (rep.chain_pass ? "pass" : "FAIL") << '\n';
    std::cout << "overall: " << (rep.pass ? "PASS" : "FAIL") << '\n';
    std::cout << "wrote " << (dir / "report.json").string() << '\n';
  }
  return 0;
}

int run_command(const std::string& name, const RunConfig& cfg, bool quiet) {
  try {
    if (name == "spectrum") return cmd_spectrum(cfg, quiet);
    if (name == "simulate") return cmd_simulate(cfg, quiet);
    if (name == "steer") return cmd_steer(cfg, quiet);
    if (name == "report") return cmd_report(cfg, quiet);
    throw ConfigError("unknown command '" + name + "'");
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace flipflow
